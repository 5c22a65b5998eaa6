//! Mesh geometry: STL parsing, spatial relationship detection, and
//! degree-of-freedom constraint extraction.

pub mod constraints;
pub mod dof;
pub mod intersect;
pub mod mesh;
pub mod relations;
pub mod shapes;
pub mod stl;

pub use constraints::{export_geometry_constraints, DofEntry, FrameData, GeometryConstraints};
pub use dof::{extract_dof_matrix, DofMatrix, JointFrame, ProbeConfig};
pub use intersect::{detect_blocking, detect_contact, meshes_intersect, point_in_mesh};
pub use mesh::{Aabb, Triangle, TriangleMesh};
pub use relations::{build_relational_matrix, RelationConfig, RelationalMatrix, SpatialRelation};
pub use stl::{parse_stl, parse_stl_with, write_binary_stl, ParsedStl};
