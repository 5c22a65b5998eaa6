//! Pairwise spatial relationship classification over a set of part meshes.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::intersect::{axis_directions, detect_blocking, detect_contact};
use super::mesh::TriangleMesh;
use crate::error::GeometryError;

/// Spatial relationship between two parts. Contact takes priority over
/// blocking, blocking over free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum SpatialRelation {
    SelfPair = 0,
    Contact = 1,
    Blocking = 2,
    Free = 3,
}

impl SpatialRelation {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(SpatialRelation::SelfPair),
            1 => Some(SpatialRelation::Contact),
            2 => Some(SpatialRelation::Blocking),
            3 => Some(SpatialRelation::Free),
            _ => None,
        }
    }
}

/// Symmetric part-pair matrix of [`SpatialRelation`] codes, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationalMatrix {
    part_order: Vec<String>,
    codes: Vec<Vec<u8>>,
}

impl RelationalMatrix {
    pub fn new(part_order: Vec<String>, codes: Vec<Vec<u8>>) -> Self {
        RelationalMatrix { part_order, codes }
    }

    pub fn part_order(&self) -> &[String] {
        &self.part_order
    }

    pub fn codes(&self) -> &Vec<Vec<u8>> {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.part_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.part_order.is_empty()
    }

    pub fn relation(&self, a: &str, b: &str) -> Option<SpatialRelation> {
        let i = self.part_order.iter().position(|p| p == a)?;
        let j = self.part_order.iter().position(|p| p == b)?;
        SpatialRelation::from_code(self.codes[i][j])
    }
}

/// Knobs for relationship detection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationConfig {
    /// Contact tolerance as a fraction of the larger bounding-box diagonal.
    pub contact_tol_factor: f64,
    /// Blocking-ray directions; defaults to the six signed axes.
    #[serde(skip)]
    pub ray_directions: Vec<Vector3<f64>>,
}

impl Default for RelationConfig {
    fn default() -> Self {
        RelationConfig {
            contact_tol_factor: 1e-6,
            ray_directions: axis_directions(),
        }
    }
}

/// Classify every mesh pair: contact first, then blocking (rays in either
/// direction), otherwise free. The result is symmetric with a zero diagonal.
pub fn build_relational_matrix(
    meshes: &[TriangleMesh],
    cfg: &RelationConfig,
) -> Result<RelationalMatrix, GeometryError> {
    if meshes.len() < 2 {
        return Err(GeometryError::TooFewMeshes(meshes.len()));
    }
    let n = meshes.len();
    let mut codes = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&meshes[i], &meshes[j]);
            let tol = cfg.contact_tol_factor * a.diagonal().max(b.diagonal());
            let rel = if detect_contact(a, b, tol) {
                SpatialRelation::Contact
            } else if detect_blocking(a, b, &cfg.ray_directions)
                || detect_blocking(b, a, &cfg.ray_directions)
            {
                SpatialRelation::Blocking
            } else {
                SpatialRelation::Free
            };
            codes[i][j] = rel.code();
            codes[j][i] = rel.code();
        }
    }
    Ok(RelationalMatrix {
        part_order: meshes.iter().map(|m| m.id().to_owned()).collect(),
        codes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::box_mesh;

    #[test]
    fn two_distant_cubes_are_free() {
        let meshes = vec![
            box_mesh("a", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]),
            box_mesh("b", [8.0, 9.0, 7.0], [9.0, 10.0, 8.0]),
        ];
        let rm = build_relational_matrix(&meshes, &RelationConfig::default()).unwrap();
        assert_eq!(rm.codes(), &vec![vec![0, 3], vec![3, 0]]);
    }

    #[test]
    fn two_touching_cubes_are_in_contact() {
        let meshes = vec![
            box_mesh("a", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]),
            box_mesh("b", [1.0, 0.0, 0.0], [2.0, 1.0, 1.0]),
        ];
        let rm = build_relational_matrix(&meshes, &RelationConfig::default()).unwrap();
        assert_eq!(rm.codes(), &vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn single_mesh_is_rejected() {
        let meshes = vec![box_mesh("a", [0.0; 3], [1.0; 3])];
        assert!(matches!(
            build_relational_matrix(&meshes, &RelationConfig::default()),
            Err(GeometryError::TooFewMeshes(1))
        ));
    }
}
