//! Binary and ASCII STL parsing.
//!
//! Binary layout: 80-byte header, little-endian u32 triangle count, then one
//! 50-byte record per triangle (normal 3×f32, vertices 9×f32, 2-byte
//! attribute). ASCII follows the `solid`/`facet` grammar. Some exporters
//! write ASCII-like headers into binary files, so format detection goes by
//! record arithmetic first and the `solid` keyword second.

use nalgebra::Point3;
use std::collections::HashMap;

use super::mesh::{Triangle, TriangleMesh};
use crate::error::GeometryError;

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

/// Result of parsing an STL file.
#[derive(Debug, Clone)]
pub struct ParsedStl {
    pub mesh: TriangleMesh,
    /// Zero-area triangles dropped during cleanup.
    pub degenerate_dropped: usize,
    /// Raw vertex references merged into shared vertices.
    pub vertices_welded: usize,
}

/// Parse binary or ASCII STL bytes into a mesh for `part_id`.
///
/// Vertices are deduplicated within `weld_tol` (default 1e-9 when using
/// [`parse_stl`]); degenerate triangles are dropped and counted.
pub fn parse_stl_with(
    bytes: &[u8],
    part_id: &str,
    weld_tol: f64,
) -> Result<ParsedStl, GeometryError> {
    let raw = if looks_binary(bytes) {
        parse_binary(bytes)?
    } else {
        parse_ascii(bytes)?
    };
    build_mesh(part_id, raw, weld_tol)
}

/// Parse STL bytes with the default weld tolerance.
pub fn parse_stl(bytes: &[u8], part_id: &str) -> Result<ParsedStl, GeometryError> {
    parse_stl_with(bytes, part_id, 1e-9)
}

/// Serialize a mesh as binary STL. Normals are recomputed from the winding.
pub fn write_binary_stl(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + RECORD_LEN * mesh.triangle_count());
    let mut header = [0u8; HEADER_LEN];
    let tag = b"mesh export";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangle_count() as u32).to_le_bytes());
    for i in 0..mesh.triangle_count() {
        let tri = mesh.triangle(i);
        let n = tri.normal().normalize();
        for v in [n.x, n.y, n.z] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        for p in tri.vertices() {
            for c in [p.x, p.y, p.z] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

fn looks_binary(bytes: &[u8]) -> bool {
    if bytes.len() >= HEADER_LEN + 4 {
        let declared =
            u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap()) as usize;
        if bytes.len() == HEADER_LEN + 4 + declared * RECORD_LEN {
            return true;
        }
    }
    let head = bytes.iter().take(512).copied().collect::<Vec<_>>();
    let text = String::from_utf8_lossy(&head);
    !text.trim_start().starts_with("solid")
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<Triangle>, GeometryError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(GeometryError::TruncatedFile(format!(
            "{} bytes is shorter than the 84-byte binary preamble",
            bytes.len()
        )));
    }
    let declared =
        u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN + 4..];
    let available = body.len() / RECORD_LEN;
    if body.len() % RECORD_LEN != 0 || available < declared {
        return Err(GeometryError::TruncatedFile(format!(
            "declared {declared} triangles, found {available} complete records"
        )));
    }
    if available > declared {
        return Err(GeometryError::CountMismatch {
            declared,
            found: available,
        });
    }
    let mut triangles = Vec::with_capacity(declared);
    for rec in body.chunks_exact(RECORD_LEN) {
        // skip the 12-byte stored normal; it is recomputed from the winding
        let mut coords = [0.0f64; 9];
        for (k, c) in coords.iter_mut().enumerate() {
            let off = 12 + 4 * k;
            let v = f32::from_le_bytes(rec[off..off + 4].try_into().unwrap());
            if !v.is_finite() {
                return Err(GeometryError::NonFiniteCoordinate);
            }
            *c = v as f64;
        }
        triangles.push(Triangle {
            a: Point3::new(coords[0], coords[1], coords[2]),
            b: Point3::new(coords[3], coords[4], coords[5]),
            c: Point3::new(coords[6], coords[7], coords[8]),
        });
    }
    Ok(triangles)
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<Triangle>, GeometryError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| GeometryError::MalformedStl("not valid UTF-8".to_owned()))?;
    let mut triangles = Vec::new();
    let mut current: Vec<Point3<f64>> = Vec::new();
    let mut in_solid = false;
    let mut closed = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("solid") => in_solid = true,
            Some("endsolid") => closed = true,
            Some("facet") | Some("endloop") => {}
            Some("outer") => current.clear(),
            Some("vertex") => {
                let mut coords = [0.0f64; 3];
                for c in &mut coords {
                    let tok = tokens.next().ok_or_else(|| {
                        GeometryError::MalformedStl(format!("line {}: short vertex", lineno + 1))
                    })?;
                    *c = tok.parse::<f64>().map_err(|_| {
                        GeometryError::MalformedStl(format!(
                            "line {}: bad number `{tok}`",
                            lineno + 1
                        ))
                    })?;
                    if !c.is_finite() {
                        return Err(GeometryError::NonFiniteCoordinate);
                    }
                }
                current.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("endfacet") => {
                if current.len() != 3 {
                    return Err(GeometryError::MalformedStl(format!(
                        "line {}: facet with {} vertices",
                        lineno + 1,
                        current.len()
                    )));
                }
                triangles.push(Triangle {
                    a: current[0],
                    b: current[1],
                    c: current[2],
                });
                current.clear();
            }
            Some(other) => {
                return Err(GeometryError::MalformedStl(format!(
                    "line {}: unexpected token `{other}`",
                    lineno + 1
                )));
            }
            None => {}
        }
    }
    if !in_solid {
        return Err(GeometryError::MalformedStl("missing `solid` header".into()));
    }
    if !closed {
        return Err(GeometryError::TruncatedFile("missing `endsolid`".into()));
    }
    Ok(triangles)
}

fn build_mesh(
    part_id: &str,
    triangles: Vec<Triangle>,
    weld_tol: f64,
) -> Result<ParsedStl, GeometryError> {
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut lookup: HashMap<[i64; 3], u32> = HashMap::new();
    let quantum = weld_tol.max(1e-300);
    let mut welded = 0usize;
    let mut indices: Vec<[u32; 3]> = Vec::new();
    let mut degenerate = 0usize;

    let mut intern = |p: Point3<f64>, vertices: &mut Vec<Point3<f64>>| -> u32 {
        let key = [
            (p.x / quantum).round() as i64,
            (p.y / quantum).round() as i64,
            (p.z / quantum).round() as i64,
        ];
        if let Some(&idx) = lookup.get(&key) {
            welded += 1;
            idx
        } else {
            let idx = vertices.len() as u32;
            vertices.push(p);
            lookup.insert(key, idx);
            idx
        }
    };

    for tri in triangles {
        let ids = [
            intern(tri.a, &mut vertices),
            intern(tri.b, &mut vertices),
            intern(tri.c, &mut vertices),
        ];
        if ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2] {
            degenerate += 1;
            continue;
        }
        let t = Triangle {
            a: vertices[ids[0] as usize],
            b: vertices[ids[1] as usize],
            c: vertices[ids[2] as usize],
        };
        if t.area2() == 0.0 {
            degenerate += 1;
            continue;
        }
        indices.push(ids);
    }

    let mesh = TriangleMesh::new(part_id, vertices, indices)?;
    Ok(ParsedStl {
        mesh,
        degenerate_dropped: degenerate,
        vertices_welded: welded,
    })
}
