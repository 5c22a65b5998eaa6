//! Triangle meshes and the axis-aligned bounding volumes used to accelerate
//! pairwise queries.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::GeometryError;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point3<f64>>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Point3<f64>) {
        for i in 0..3 {
            self.min[i] = self.min[i].min(p[i]);
            self.max[i] = self.max[i].max(p[i]);
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut b = *self;
        b.grow(&other.min);
        b.grow(&other.max);
        b
    }

    /// True if the boxes, each expanded by `pad/2`, overlap (equivalently:
    /// the boxes come within `pad` of each other on every axis).
    pub fn overlaps(&self, other: &Aabb, pad: f64) -> bool {
        (0..3).all(|i| self.min[i] - pad <= other.max[i] && other.min[i] - pad <= self.max[i])
    }

    pub fn diagonal(&self) -> f64 {
        if self.min.x > self.max.x {
            return 0.0;
        }
        (self.max - self.min).norm()
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    /// Slab test for a ray; returns true if the ray hits the box expanded by `pad`.
    pub fn hit_by_ray(&self, origin: &Point3<f64>, dir: &Vector3<f64>, pad: f64) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = f64::INFINITY;
        for i in 0..3 {
            let lo = self.min[i] - pad;
            let hi = self.max[i] + pad;
            if dir[i].abs() < 1e-300 {
                if origin[i] < lo || origin[i] > hi {
                    return false;
                }
            } else {
                let inv = 1.0 / dir[i];
                let (mut ta, mut tb) = ((lo - origin[i]) * inv, (hi - origin[i]) * inv);
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// One triangle in world coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    pub c: Point3<f64>,
}

impl Triangle {
    pub fn normal(&self) -> Vector3<f64> {
        (self.b - self.a).cross(&(self.c - self.a))
    }

    /// Twice the area (norm of the edge cross product).
    pub fn area2(&self) -> f64 {
        self.normal().norm()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::of_points([&self.a, &self.b, &self.c])
    }

    pub fn vertices(&self) -> [Point3<f64>; 3] {
        [self.a, self.b, self.c]
    }
}

/// Immutable triangle mesh for one part. A bounding-volume hierarchy over
/// the triangles is built at construction so queries stay cheap and the
/// mesh can be shared across threads without interior mutability.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    id: String,
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
    aabb: Aabb,
    bvh: Bvh,
}

impl TriangleMesh {
    /// Build a mesh. Triangle indices must be in range and no triangle may
    /// be degenerate; parsers clean their input before calling this.
    pub fn new(
        id: impl Into<String>,
        vertices: Vec<Point3<f64>>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self, GeometryError> {
        let id = id.into();
        for p in &vertices {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(GeometryError::NonFiniteCoordinate);
            }
        }
        for t in &triangles {
            for &ix in t {
                if ix as usize >= vertices.len() {
                    return Err(GeometryError::InvalidMesh {
                        mesh: id,
                        detail: format!("triangle index {ix} out of range"),
                    });
                }
            }
            let tri = Triangle {
                a: vertices[t[0] as usize],
                b: vertices[t[1] as usize],
                c: vertices[t[2] as usize],
            };
            if tri.area2() == 0.0 {
                return Err(GeometryError::InvalidMesh {
                    mesh: id,
                    detail: "degenerate triangle".to_owned(),
                });
            }
        }
        let aabb = Aabb::of_points(&vertices);
        let tri_boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| {
                Aabb::of_points([
                    &vertices[t[0] as usize],
                    &vertices[t[1] as usize],
                    &vertices[t[2] as usize],
                ])
            })
            .collect();
        let bvh = Bvh::build(&tri_boxes);
        Ok(TriangleMesh {
            id,
            vertices,
            triangles,
            aabb,
            bvh,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_indices(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, i: usize) -> Triangle {
        let [a, b, c] = self.triangles[i];
        Triangle {
            a: self.vertices[a as usize],
            b: self.vertices[b as usize],
            c: self.vertices[c as usize],
        }
    }

    pub fn aabb(&self) -> &Aabb {
        &self.aabb
    }

    pub fn diagonal(&self) -> f64 {
        self.aabb.diagonal()
    }

    pub(crate) fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn translated(&self, offset: &Vector3<f64>) -> TriangleMesh {
        self.mapped(|p| p + offset)
    }

    /// Rigid transform `p ↦ R (p − pivot) + pivot + t`.
    pub fn rigid_transformed(
        &self,
        rotation: &Matrix3<f64>,
        pivot: &Point3<f64>,
        translation: &Vector3<f64>,
    ) -> TriangleMesh {
        self.mapped(|p| pivot + rotation * (p - pivot) + translation)
    }

    fn mapped(&self, f: impl Fn(&Point3<f64>) -> Point3<f64>) -> TriangleMesh {
        let vertices: Vec<Point3<f64>> = self.vertices.iter().map(f).collect();
        TriangleMesh::new(self.id.clone(), vertices, self.triangles.clone())
            .expect("rigid transform preserves mesh validity")
    }
}

/// Flat binary BVH over triangle bounding boxes, longest-axis median split.
#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<BvhNode>,
}

#[derive(Debug, Clone)]
struct BvhNode {
    aabb: Aabb,
    /// Leaf: triangle indices. Inner: child node indices.
    content: NodeContent,
}

#[derive(Debug, Clone)]
enum NodeContent {
    Leaf(Vec<u32>),
    Inner(u32, u32),
}

const LEAF_SIZE: usize = 8;

impl Bvh {
    fn build(tri_boxes: &[Aabb]) -> Bvh {
        let mut nodes = Vec::new();
        if tri_boxes.is_empty() {
            nodes.push(BvhNode {
                aabb: Aabb::empty(),
                content: NodeContent::Leaf(Vec::new()),
            });
            return Bvh { nodes };
        }
        let mut order: Vec<u32> = (0..tri_boxes.len() as u32).collect();
        build_node(tri_boxes, &mut order, &mut nodes);
        Bvh { nodes }
    }

    /// Visit triangle pairs whose padded boxes overlap. The callback returns
    /// `true` to stop early; the traversal result mirrors that.
    pub(crate) fn for_overlapping_pairs(
        &self,
        other: &Bvh,
        pad: f64,
        mut visit: impl FnMut(u32, u32) -> bool,
    ) -> bool {
        let mut stack = vec![(0u32, 0u32)];
        while let Some((i, j)) = stack.pop() {
            let (a, b) = (&self.nodes[i as usize], &other.nodes[j as usize]);
            if !a.aabb.overlaps(&b.aabb, pad) {
                continue;
            }
            match (&a.content, &b.content) {
                (NodeContent::Leaf(ta), NodeContent::Leaf(tb)) => {
                    for &x in ta {
                        for &y in tb {
                            if visit(x, y) {
                                return true;
                            }
                        }
                    }
                }
                (NodeContent::Inner(l, r), _) => {
                    stack.push((*l, j));
                    stack.push((*r, j));
                }
                (_, NodeContent::Inner(l, r)) => {
                    stack.push((i, *l));
                    stack.push((i, *r));
                }
            }
        }
        false
    }

    /// Visit triangles whose boxes are hit by the ray. Early exit as above.
    pub(crate) fn for_ray_candidates(
        &self,
        origin: &Point3<f64>,
        dir: &Vector3<f64>,
        mut visit: impl FnMut(u32) -> bool,
    ) -> bool {
        let mut stack = vec![0u32];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            if !node.aabb.hit_by_ray(origin, dir, 1e-12) {
                continue;
            }
            match &node.content {
                NodeContent::Leaf(tris) => {
                    for &t in tris {
                        if visit(t) {
                            return true;
                        }
                    }
                }
                NodeContent::Inner(l, r) => {
                    stack.push(*l);
                    stack.push(*r);
                }
            }
        }
        false
    }
}

fn build_node(tri_boxes: &[Aabb], order: &mut [u32], nodes: &mut Vec<BvhNode>) -> u32 {
    let mut aabb = Aabb::empty();
    for &t in order.iter() {
        aabb = aabb.union(&tri_boxes[t as usize]);
    }
    let idx = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(BvhNode {
            aabb,
            content: NodeContent::Leaf(order.to_vec()),
        });
        return idx;
    }
    let extent = aabb.max - aabb.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        let ca = tri_boxes[a as usize].center()[axis];
        let cb = tri_boxes[b as usize].center()[axis];
        ca.partial_cmp(&cb).unwrap_or(std::cmp::Ordering::Equal)
    });
    nodes.push(BvhNode {
        aabb,
        content: NodeContent::Inner(0, 0), // patched below
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(tri_boxes, lo, nodes);
    let right = build_node(tri_boxes, hi, nodes);
    nodes[idx as usize].content = NodeContent::Inner(left, right);
    idx
}
