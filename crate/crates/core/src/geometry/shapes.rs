//! Simple procedural meshes, mainly for tests and demo assemblies.

use nalgebra::Point3;

use super::mesh::TriangleMesh;

/// Axis-aligned box as a closed 12-triangle mesh with outward-facing
/// winding. `min` and `max` are opposite corners.
pub fn box_mesh(id: &str, min: [f64; 3], max: [f64; 3]) -> TriangleMesh {
    let [x0, y0, z0] = min;
    let [x1, y1, z1] = max;
    let v = vec![
        Point3::new(x0, y0, z0), // 0
        Point3::new(x1, y0, z0), // 1
        Point3::new(x1, y1, z0), // 2
        Point3::new(x0, y1, z0), // 3
        Point3::new(x0, y0, z1), // 4
        Point3::new(x1, y0, z1), // 5
        Point3::new(x1, y1, z1), // 6
        Point3::new(x0, y1, z1), // 7
    ];
    let t = vec![
        // bottom (−z)
        [0, 2, 1],
        [0, 3, 2],
        // top (+z)
        [4, 5, 6],
        [4, 6, 7],
        // front (−y)
        [0, 1, 5],
        [0, 5, 4],
        // back (+y)
        [3, 7, 6],
        [3, 6, 2],
        // left (−x)
        [0, 4, 7],
        [0, 7, 3],
        // right (+x)
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriangleMesh::new(id, v, t).expect("box mesh is valid")
}

/// Several boxes merged into one mesh (shared id, disjoint vertex ranges).
pub fn multi_box_mesh(id: &str, boxes: &[([f64; 3], [f64; 3])]) -> TriangleMesh {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (min, max) in boxes {
        let part = box_mesh(id, *min, *max);
        let base = vertices.len() as u32;
        vertices.extend_from_slice(part.vertices());
        triangles.extend(
            part.triangle_indices()
                .iter()
                .map(|t| [t[0] + base, t[1] + base, t[2] + base]),
        );
    }
    TriangleMesh::new(id, vertices, triangles).expect("multi-box mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_has_expected_counts() {
        let m = box_mesh("cube", [0.0; 3], [1.0; 3]);
        assert_eq!(m.triangle_count(), 12);
        assert_eq!(m.vertices().len(), 8);
        assert!((m.diagonal() - 3.0f64.sqrt()).abs() < 1e-12);
    }
}
