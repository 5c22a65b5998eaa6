//! Pairwise mesh predicates: contact, blocking, penetration, containment.
//!
//! The penetration predicate stands in for "intersection volume is not
//! zero": two triangles count as intersecting only when each strictly
//! straddles the other's plane and the crossing segments overlap with
//! positive length. Touching contacts (coplanar overlap, shared faces,
//! edge-on-face) have zero volume and are deliberately excluded; surface
//! contact is detected separately through the distance test.

use nalgebra::{Point3, Vector3};

use super::mesh::{Triangle, TriangleMesh};

/// Relative epsilon applied to plane distances and overlap lengths.
const REL_EPS: f64 = 1e-9;

/// True if the triangles cross transversally (positive intersection measure).
pub fn tri_tri_penetrates(t1: &Triangle, t2: &Triangle, eps: f64) -> bool {
    let Some((p1, q1)) = plane_crossing_segment(t1, t2, eps) else {
        return false;
    };
    let Some((p2, q2)) = plane_crossing_segment(t2, t1, eps) else {
        return false;
    };
    // all four points lie on the line of intersection of the two planes;
    // measure the overlap of the two segments along it
    let dir = q1 - p1;
    let len = dir.norm();
    if len <= eps {
        return false;
    }
    let d = dir / len;
    let (a1, b1) = (0.0f64, len);
    let (mut a2, mut b2) = ((p2 - p1).dot(&d), (q2 - p1).dot(&d));
    if a2 > b2 {
        std::mem::swap(&mut a2, &mut b2);
    }
    let overlap = b1.min(b2) - a1.max(a2);
    overlap > eps
}

/// Segment where `tri` crosses the plane of `other`, or None when `tri`
/// does not strictly straddle that plane.
fn plane_crossing_segment(
    tri: &Triangle,
    other: &Triangle,
    eps: f64,
) -> Option<(Point3<f64>, Point3<f64>)> {
    let n = other.normal();
    let n_len = n.norm();
    if n_len == 0.0 {
        return None;
    }
    let n = n / n_len;
    let verts = tri.vertices();
    let d: Vec<f64> = verts.iter().map(|v| n.dot(&(v - other.a))).collect();
    let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(min < -eps && max > eps) {
        return None;
    }
    // lone vertex = the one on the side with a single strictly-signed vertex
    let pos: Vec<usize> = (0..3).filter(|&i| d[i] > 0.0).collect();
    let lone = if pos.len() == 1 {
        pos[0]
    } else {
        (0..3).find(|&i| d[i] <= 0.0).unwrap()
    };
    let (j, k) = ((lone + 1) % 3, (lone + 2) % 3);
    let cross = |i: usize, l: usize| -> Point3<f64> {
        let t = d[i] / (d[i] - d[l]);
        verts[i] + (verts[l] - verts[i]) * t
    };
    Some((cross(lone, j), cross(lone, k)))
}

/// Minimum distance between two non-penetrating triangles: the smallest of
/// the nine edge-edge and six vertex-triangle distances. Coplanar overlap
/// yields zero through the vertex-triangle projection.
pub fn tri_tri_distance(t1: &Triangle, t2: &Triangle) -> f64 {
    let e1 = [(t1.a, t1.b), (t1.b, t1.c), (t1.c, t1.a)];
    let e2 = [(t2.a, t2.b), (t2.b, t2.c), (t2.c, t2.a)];
    let mut best = f64::INFINITY;
    for (p1, q1) in e1 {
        for (p2, q2) in e2 {
            best = best.min(segment_segment_distance(&p1, &q1, &p2, &q2));
        }
    }
    for v in t1.vertices() {
        best = best.min((closest_point_on_triangle(&v, t2) - v).norm());
    }
    for v in t2.vertices() {
        best = best.min((closest_point_on_triangle(&v, t1) - v).norm());
    }
    best
}

/// Closest point on triangle `t` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Point3<f64>, t: &Triangle) -> Point3<f64> {
    let ab = t.b - t.a;
    let ac = t.c - t.a;
    let ap = p - t.a;

    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return t.a;
    }

    let bp = p - t.b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return t.b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return t.a + ab * v;
    }

    let cp = p - t.c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return t.c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return t.a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return t.b + (t.c - t.b) * w;
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    t.a + ab * v + ac * w
}

/// Minimum distance between segments `p1q1` and `p2q2`.
pub fn segment_segment_distance(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);

    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s_ = if denom != 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t_ = (b * s_ + f) / e;
            if t_ < 0.0 {
                t_ = 0.0;
                s_ = (-c / a).clamp(0.0, 1.0);
            } else if t_ > 1.0 {
                t_ = 1.0;
                s_ = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s_;
            t = t_;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Möller–Trumbore ray/triangle intersection; returns the ray parameter of
/// the hit when `t > t_min`.
pub fn ray_triangle_intersection(
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
    tri: &Triangle,
    t_min: f64,
) -> Option<f64> {
    let e1 = tri.b - tri.a;
    let e2 = tri.c - tri.a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - tri.a;
    let u = tvec.dot(&pvec) * inv_det;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    (t > t_min).then_some(t)
}

/// Parity directions chosen so rays from points of axis-aligned geometry do
/// not graze edges or corners of other axis-aligned geometry.
const PARITY_DIRS: [[f64; 3]; 3] = [
    [0.9451941511930273, 0.3008545471134434, 0.1278553771856487],
    [-0.2793054933595582, 0.8921963402924082, 0.3553784926429087],
    [0.1429618926034769, -0.4303589494207869, 0.8912616813887743],
];

/// Point-in-mesh test by ray parity, majority over three fixed directions.
pub fn point_in_mesh(p: &Point3<f64>, mesh: &TriangleMesh) -> bool {
    let mut votes = 0u32;
    for d in PARITY_DIRS {
        let dir = Vector3::new(d[0], d[1], d[2]);
        let mut hits = 0usize;
        mesh.bvh().for_ray_candidates(p, &dir, |ti| {
            if ray_triangle_intersection(p, &dir, &mesh.triangle(ti as usize), 1e-12).is_some() {
                hits += 1;
            }
            false
        });
        if hits % 2 == 1 {
            votes += 1;
        }
    }
    votes >= 2
}

fn pair_eps(a: &TriangleMesh, b: &TriangleMesh) -> f64 {
    REL_EPS * a.diagonal().max(b.diagonal()).max(1e-300)
}

/// True when one mesh's bounding box could fit inside the other's.
fn aabbs_nest(inner: &TriangleMesh, outer: &TriangleMesh) -> bool {
    let (i, o) = (inner.aabb(), outer.aabb());
    (0..3).all(|k| i.min[k] >= o.min[k] && i.max[k] <= o.max[k])
}

fn contained(inner: &TriangleMesh, outer: &TriangleMesh) -> bool {
    aabbs_nest(inner, outer)
        && inner
            .vertices()
            .iter()
            .any(|v| point_in_mesh(v, outer))
}

/// Positive-volume overlap between two closed meshes: transversal surface
/// penetration or full containment of one in the other.
pub fn meshes_intersect(a: &TriangleMesh, b: &TriangleMesh) -> bool {
    let eps = pair_eps(a, b);
    let hit = a.bvh().for_overlapping_pairs(b.bvh(), eps, |i, j| {
        tri_tri_penetrates(&a.triangle(i as usize), &b.triangle(j as usize), eps)
    });
    hit || contained(a, b) || contained(b, a)
}

/// Contact: any triangle of `a` intersects or comes within `tol` of a
/// triangle of `b`, or one mesh is fully contained in the other.
pub fn detect_contact(a: &TriangleMesh, b: &TriangleMesh, tol: f64) -> bool {
    let eps = pair_eps(a, b);
    let hit = a.bvh().for_overlapping_pairs(b.bvh(), tol.max(eps), |i, j| {
        let (ta, tb) = (a.triangle(i as usize), b.triangle(j as usize));
        tri_tri_penetrates(&ta, &tb, eps) || tri_tri_distance(&ta, &tb) <= tol
    });
    hit || contained(a, b) || contained(b, a)
}

/// Blocking: some ray cast from a vertex of `a` along one of `directions`
/// hits `b`. Intended for mesh pairs that are not in contact.
pub fn detect_blocking(a: &TriangleMesh, b: &TriangleMesh, directions: &[Vector3<f64>]) -> bool {
    for v in a.vertices() {
        for dir in directions {
            let hit = b.bvh().for_ray_candidates(v, dir, |ti| {
                ray_triangle_intersection(v, dir, &b.triangle(ti as usize), 1e-9).is_some()
            });
            if hit {
                return true;
            }
        }
    }
    false
}

/// The six signed world axes, the default blocking-ray directions.
pub fn axis_directions() -> Vec<Vector3<f64>> {
    vec![
        Vector3::x(),
        -Vector3::x(),
        Vector3::y(),
        -Vector3::y(),
        Vector3::z(),
        -Vector3::z(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::box_mesh;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Triangle {
        Triangle {
            a: Point3::new(a[0], a[1], a[2]),
            b: Point3::new(b[0], b[1], b[2]),
            c: Point3::new(c[0], c[1], c[2]),
        }
    }

    #[test]
    fn crossing_triangles_penetrate() {
        let t1 = tri([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]);
        let t2 = tri([0.5, 0.5, -1.0], [0.5, 0.5, 1.0], [1.5, 0.5, 0.0]);
        assert!(tri_tri_penetrates(&t1, &t2, 1e-9));
        assert!(tri_tri_penetrates(&t2, &t1, 1e-9));
    }

    #[test]
    fn touching_and_coplanar_triangles_do_not_penetrate() {
        // coplanar overlap: zero volume
        let t1 = tri([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]);
        let t2 = tri([0.5, 0.5, 0.0], [2.5, 0.5, 0.0], [0.5, 2.5, 0.0]);
        assert!(!tri_tri_penetrates(&t1, &t2, 1e-9));
        assert_eq!(tri_tri_distance(&t1, &t2), 0.0);

        // vertical wall standing on a horizontal floor: touches, no volume
        let floor = tri([-5.0, -5.0, 0.0], [5.0, -5.0, 0.0], [0.0, 5.0, 0.0]);
        let wall = tri([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]);
        assert!(!tri_tri_penetrates(&floor, &wall, 1e-9));
        // pushing the wall down through the floor is a real crossing
        let sunk = tri([-1.0, 0.0, -0.5], [1.0, 0.0, -0.5], [0.0, 0.0, 1.5]);
        assert!(tri_tri_penetrates(&floor, &sunk, 1e-9));
    }

    #[test]
    fn cubes_sharing_a_face_are_in_contact() {
        let a = box_mesh("a", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let b = box_mesh("b", [1.0, 0.0, 0.0], [2.0, 1.0, 1.0]);
        assert!(detect_contact(&a, &b, 1e-6));
        assert!(detect_contact(&b, &a, 1e-6));
        assert!(!meshes_intersect(&a, &b), "touching faces have no volume");
    }

    #[test]
    fn separated_cubes_are_not_in_contact() {
        let a = box_mesh("a", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let b = box_mesh("b", [6.0, 0.0, 0.0], [7.0, 1.0, 1.0]);
        assert!(!detect_contact(&a, &b, 1e-6));
    }

    #[test]
    fn containment_counts_as_contact_and_intersection() {
        let small = box_mesh("small", [0.4, 0.4, 0.4], [0.6, 0.6, 0.6]);
        let large = box_mesh("large", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        assert!(detect_contact(&small, &large, 1e-9));
        assert!(detect_contact(&large, &small, 1e-9));
        assert!(meshes_intersect(&small, &large));

        // independent parity oracle on the cube: exact axis-crossing count
        for v in small.vertices() {
            assert!(point_in_mesh(v, &large));
            let inside = (0..3).all(|k| v[k] > 0.0 && v[k] < 1.0);
            assert!(inside, "oracle: every vertex lies strictly inside");
        }
    }

    #[test]
    fn overlapping_cubes_penetrate() {
        let a = box_mesh("a", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let b = box_mesh("b", [0.5, 0.5, 0.5], [1.5, 1.5, 1.5]);
        assert!(meshes_intersect(&a, &b));
        assert!(detect_contact(&a, &b, 0.0));
    }

    #[test]
    fn blocking_rays_hit_an_axis_aligned_neighbor() {
        let a = box_mesh("a", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let b = box_mesh("b", [3.0, 0.0, 0.0], [4.0, 1.0, 1.0]);
        assert!(detect_blocking(&a, &b, &axis_directions()));

        // far along the space diagonal: axis rays all miss
        let c = box_mesh("c", [5.0, 5.0, 5.0], [6.0, 6.0, 6.0]);
        assert!(!detect_blocking(&a, &c, &axis_directions()));
        assert!(!detect_contact(&a, &c, 1e-6));
    }

    #[test]
    fn contact_is_symmetric() {
        let cases = [
            ([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 0.0, 0.0], [2.0, 1.0, 1.0]),
            ([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [5.0, 5.0, 0.0], [6.0, 6.0, 1.0]),
            ([0.0, 0.0, 0.0], [3.0, 3.0, 3.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]),
        ];
        for (amin, amax, bmin, bmax) in cases {
            let a = box_mesh("a", amin, amax);
            let b = box_mesh("b", bmin, bmax);
            assert_eq!(
                detect_contact(&a, &b, 1e-6),
                detect_contact(&b, &a, 1e-6)
            );
        }
    }
}
