//! Degree-of-freedom matrix extraction.
//!
//! For a (moved, fixed) part pair and a joint coordinate frame, the DoF
//! matrix records which of the twelve signed axis motions (translations and
//! rotations along/about the frame's x, y, z axes) the moved part can
//! perform without its volume intersecting the fixed part. Each motion is
//! probed at several magnitudes; a collision at any magnitude blocks the
//! motion.

use nalgebra::{Matrix3, Point3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::intersect::{detect_blocking, detect_contact, meshes_intersect};
use super::mesh::TriangleMesh;
use crate::error::GeometryError;

/// Orthonormality tolerance for joint frames.
const FRAME_TOL: f64 = 1e-9;

/// A joint's coordinate system: origin and a rotation whose columns are the
/// joint-local x, y, z axes expressed in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct JointFrame {
    pub joint_id: String,
    pub origin: Point3<f64>,
    pub rotation: Matrix3<f64>,
}

impl JointFrame {
    pub fn identity(joint_id: impl Into<String>, origin: Point3<f64>) -> Self {
        JointFrame {
            joint_id: joint_id.into(),
            origin,
            rotation: Matrix3::identity(),
        }
    }

    /// Checks RᵀR = I within 1e-9 and det R = +1.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let gram = self.rotation.transpose() * self.rotation;
        let dev = (gram - Matrix3::identity()).abs().max();
        if dev > FRAME_TOL || (self.rotation.determinant() - 1.0).abs() > 1e-6 {
            return Err(GeometryError::InvalidFrame(self.joint_id.clone()));
        }
        Ok(())
    }

    /// World-space direction of the signed local axis (0=x, 1=y, 2=z).
    pub fn axis(&self, index: usize, positive: bool) -> Vector3<f64> {
        let col = self.rotation.column(index).into_owned();
        if positive {
            col
        } else {
            -col
        }
    }
}

/// 3×4 binary matrix with rows x, y, z and columns T+, T−, R+, R−.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofMatrix {
    pub joint_id: String,
    pub part_id: String,
    pub frame_id: String,
    pub entries: [[u8; 4]; 3],
}

impl DofMatrix {
    pub fn translation_allowed(&self, axis: usize, positive: bool) -> bool {
        self.entries[axis][if positive { 0 } else { 1 }] == 1
    }

    pub fn rotation_allowed(&self, axis: usize, positive: bool) -> bool {
        self.entries[axis][if positive { 2 } else { 3 }] == 1
    }

    /// Count of ones, handy for monotonicity checks.
    pub fn free_count(&self) -> usize {
        self.entries
            .iter()
            .flat_map(|r| r.iter())
            .filter(|&&e| e == 1)
            .count()
    }
}

/// Probe magnitudes for DoF extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Translation distances as fractions of the moved part's bounding-box
    /// diagonal.
    pub distance_factors: Vec<f64>,
    /// Rotation probe angles in degrees.
    pub angles_deg: Vec<f64>,
    /// Rotation pivot; the frame origin when absent.
    pub pivot: Option<[f64; 3]>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            distance_factors: vec![0.01, 0.1, 0.5],
            angles_deg: vec![5.0, 15.0],
            pivot: None,
        }
    }
}

/// Extract the DoF matrix of `moved` relative to `fixed` in `frame`.
///
/// The pair must have a contact or blocking relationship; probing a free
/// pair is a contract violation and returns an error.
pub fn extract_dof_matrix(
    moved: &TriangleMesh,
    fixed: &TriangleMesh,
    frame: &JointFrame,
    probes: &ProbeConfig,
) -> Result<DofMatrix, GeometryError> {
    frame.validate()?;
    if probes.distance_factors.is_empty() {
        return Err(GeometryError::EmptyProbeSet("distance_factors"));
    }
    if probes.angles_deg.is_empty() {
        return Err(GeometryError::EmptyProbeSet("angles_deg"));
    }

    let contact_tol = 1e-6 * moved.diagonal().max(fixed.diagonal());
    let frame_dirs: Vec<Vector3<f64>> = (0..3)
        .flat_map(|i| [frame.axis(i, true), frame.axis(i, false)])
        .collect();
    let related = detect_contact(moved, fixed, contact_tol)
        || detect_blocking(moved, fixed, &frame_dirs)
        || detect_blocking(fixed, moved, &frame_dirs);
    if !related {
        return Err(GeometryError::FreePair(
            moved.id().to_owned(),
            fixed.id().to_owned(),
        ));
    }

    let diag = moved.diagonal();
    let pivot = probes
        .pivot
        .map(|p| Point3::new(p[0], p[1], p[2]))
        .unwrap_or(frame.origin);

    let mut entries = [[1u8; 4]; 3];
    for axis in 0..3 {
        for (col, positive) in [(0usize, true), (1usize, false)] {
            let dir = frame.axis(axis, positive);
            let blocked = probes.distance_factors.iter().any(|&f| {
                let displaced = moved.translated(&(dir * (f * diag)));
                meshes_intersect(&displaced, fixed)
            });
            if blocked {
                entries[axis][col] = 0;
            }
        }
        for (col, sign) in [(2usize, 1.0f64), (3usize, -1.0f64)] {
            let axis_dir = Unit::new_normalize(frame.axis(axis, true));
            let blocked = probes.angles_deg.iter().any(|&deg| {
                let rot = Rotation3::from_axis_angle(&axis_dir, sign * deg.to_radians());
                let displaced = moved.rigid_transformed(rot.matrix(), &pivot, &Vector3::zeros());
                meshes_intersect(&displaced, fixed)
            });
            if blocked {
                entries[axis][col] = 0;
            }
        }
    }

    Ok(DofMatrix {
        joint_id: frame.joint_id.clone(),
        part_id: moved.id().to_owned(),
        frame_id: frame.joint_id.clone(),
        entries,
    })
}
