//! The geometric constraint document exchanged between the pre-processing
//! stage and the planner: relational matrix, per-joint frames, and DoF
//! matrices, serialized as JSON.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Point3};
use serde::{Deserialize, Serialize};

use super::dof::{DofMatrix, JointFrame};
use super::relations::RelationalMatrix;
use crate::error::GeometryError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameData {
    pub origin: [f64; 3],
    /// Row-major 3×3 rotation; columns are the joint-local axes in world
    /// coordinates.
    pub rotation: [[f64; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofEntry {
    pub joint_id: String,
    pub part_id: String,
    pub frame_id: String,
    pub matrix: [[u8; 4]; 3],
}

/// Geometric constraints for an assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstraints {
    pub relations: Vec<Vec<u8>>,
    pub part_order: Vec<String>,
    pub frames: BTreeMap<String, FrameData>,
    pub dof: Vec<DofEntry>,
}

impl GeometryConstraints {
    pub fn frame(&self, joint_id: &str) -> Option<JointFrame> {
        self.frames.get(joint_id).map(|f| JointFrame {
            joint_id: joint_id.to_owned(),
            origin: Point3::new(f.origin[0], f.origin[1], f.origin[2]),
            rotation: rotation_from_rows(&f.rotation),
        })
    }

    pub fn dof_for(&self, part_id: &str, joint_id: &str) -> Option<&DofEntry> {
        self.dof
            .iter()
            .find(|d| d.part_id == part_id && d.joint_id == joint_id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constraint doc serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let doc: GeometryConstraints =
            serde_json::from_str(text).map_err(|e| GeometryError::MalformedStl(e.to_string()))?;
        doc.check_refs()?;
        Ok(doc)
    }

    fn check_refs(&self) -> Result<(), GeometryError> {
        for d in &self.dof {
            if !self.frames.contains_key(&d.frame_id) {
                return Err(GeometryError::DanglingFrameRef(d.frame_id.clone()));
            }
        }
        for (id, f) in &self.frames {
            JointFrame {
                joint_id: id.clone(),
                origin: Point3::new(f.origin[0], f.origin[1], f.origin[2]),
                rotation: rotation_from_rows(&f.rotation),
            }
            .validate()?;
        }
        Ok(())
    }
}

fn rotation_from_rows(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::new(
        rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2], rows[2][0],
        rows[2][1], rows[2][2],
    )
}

fn rotation_to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

/// Bundle relations, DoF matrices, and frames into one document, checking
/// that every DoF matrix references a known frame.
pub fn export_geometry_constraints(
    relations: &RelationalMatrix,
    dofs: &[DofMatrix],
    frames: &[JointFrame],
) -> Result<GeometryConstraints, GeometryError> {
    let mut frame_map = BTreeMap::new();
    for f in frames {
        f.validate()?;
        frame_map.insert(
            f.joint_id.clone(),
            FrameData {
                origin: [f.origin.x, f.origin.y, f.origin.z],
                rotation: rotation_to_rows(&f.rotation),
            },
        );
    }
    for d in dofs {
        if !frame_map.contains_key(&d.frame_id) {
            return Err(GeometryError::DanglingFrameRef(d.frame_id.clone()));
        }
    }
    Ok(GeometryConstraints {
        relations: relations.codes().clone(),
        part_order: relations.part_order().to_vec(),
        frames: frame_map,
        dof: dofs
            .iter()
            .map(|d| DofEntry {
                joint_id: d.joint_id.clone(),
                part_id: d.part_id.clone(),
                frame_id: d.frame_id.clone(),
                matrix: d.entries,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GeometryConstraints {
        let rm = RelationalMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0, 1], vec![1, 0]],
        );
        let frame = JointFrame::identity("j1", Point3::new(0.5, 0.0, 0.25));
        let dof = DofMatrix {
            joint_id: "j1".into(),
            part_id: "a".into(),
            frame_id: "j1".into(),
            entries: [[1, 1, 0, 0], [1, 1, 0, 0], [1, 0, 1, 1]],
        };
        export_geometry_constraints(&rm, &[dof], &[frame]).unwrap()
    }

    #[test]
    fn round_trip_is_lossless() {
        let doc = sample();
        let json = doc.to_json();
        let back = GeometryConstraints::from_json(&json).unwrap();
        assert_eq!(doc, back);
        // bit-for-bit: re-serialization is identical
        assert_eq!(json, back.to_json());
    }

    #[test]
    fn empty_constraint_set_serializes() {
        let rm = RelationalMatrix::new(vec![], vec![]);
        let doc = export_geometry_constraints(&rm, &[], &[]).unwrap();
        let back = GeometryConstraints::from_json(&doc.to_json()).unwrap();
        assert!(back.dof.is_empty());
        assert!(back.frames.is_empty());
    }

    #[test]
    fn dangling_frame_reference_is_an_error() {
        let rm = RelationalMatrix::new(
            vec!["a".into(), "b".into()],
            vec![vec![0, 1], vec![1, 0]],
        );
        let dof = DofMatrix {
            joint_id: "j1".into(),
            part_id: "a".into(),
            frame_id: "ghost".into(),
            entries: [[1; 4]; 3],
        };
        assert!(matches!(
            export_geometry_constraints(&rm, &[dof], &[]),
            Err(GeometryError::DanglingFrameRef(_))
        ));
    }
}
