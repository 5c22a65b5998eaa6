//! Feasibility predicates applied while expanding the digraph: single-piece
//! flow and the degree-of-freedom collision check.

use std::collections::BTreeSet;

use nalgebra::{Matrix3, Vector3};

use crate::error::DigraphError;
use crate::geometry::GeometryConstraints;
use crate::model::{DisjointSet, Joint, JointId, PartGraph};

/// Single-piece flow: the subgraph induced by the cutset's joints has at
/// most one connected component with two or more parts, so the factory
/// never holds two growing subassemblies at once.
pub fn is_single_piece(cutset: &BTreeSet<JointId>, g: &PartGraph) -> bool {
    if cutset.is_empty() {
        return true;
    }
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    let mut dsu = DisjointSet::new(g.parts().len());
    for id in cutset {
        let Some(j) = g.joint(id) else {
            return false;
        };
        let (a, b) = (
            g.part_idx(&j.part_a).unwrap(),
            g.part_idx(&j.part_b).unwrap(),
        );
        touched.insert(a);
        touched.insert(b);
        dsu.union(a, b);
    }
    // every touched component has ≥ 2 parts; require a single root
    let roots: BTreeSet<usize> = touched.into_iter().map(|p| dsu.find(p)).collect();
    roots.len() <= 1
}

/// Allowed translation directions as a 6-bit mask; bit 2·axis selects the
/// positive direction, bit 2·axis+1 the negative one.
pub(crate) const ALL_DIRECTIONS: u8 = 0b0011_1111;

pub(crate) fn canonical_axes() -> [Vector3<f64>; 6] {
    [
        Vector3::x(),
        -Vector3::x(),
        Vector3::y(),
        -Vector3::y(),
        Vector3::z(),
        -Vector3::z(),
    ]
}

/// Snap a direction to the nearest canonical signed axis within
/// `snap_tol_deg`; None when no axis is close enough.
pub(crate) fn snap_direction(dir: &Vector3<f64>, snap_tol_deg: f64) -> Option<u8> {
    let cos_tol = snap_tol_deg.to_radians().cos();
    let n = dir.norm();
    if n == 0.0 {
        return None;
    }
    let unit = dir / n;
    canonical_axes()
        .iter()
        .enumerate()
        .find(|(_, axis)| unit.dot(axis) >= cos_tol)
        .map(|(i, _)| i as u8)
}

/// Allowed-direction mask of one DoF matrix, transformed into the reference
/// frame. Each allowed translation axis of the constraint's own frame is
/// rotated into the reference frame and snapped to a canonical axis;
/// directions that do not snap are dropped.
pub(crate) fn transformed_direction_mask(
    entries: &[[u8; 4]; 3],
    own_rotation: &Matrix3<f64>,
    reference_rotation: &Matrix3<f64>,
    snap_tol_deg: f64,
) -> u8 {
    let to_ref = reference_rotation.transpose();
    let mut mask = 0u8;
    for axis in 0..3 {
        for (col, sign) in [(0usize, 1.0f64), (1usize, -1.0f64)] {
            if entries[axis][col] != 1 {
                continue;
            }
            let local = Vector3::from_iterator((0..3).map(|i| if i == axis { sign } else { 0.0 }));
            let world = own_rotation * local;
            let in_ref = to_ref * world;
            if let Some(bit) = snap_direction(&in_ref, snap_tol_deg) {
                mask |= 1 << bit;
            }
        }
    }
    mask
}

/// Five-step collision check for adding `new_joint` to `cutset`:
/// collect the inserted part's joints whose mate is already assembled,
/// transform each DoF matrix's allowed translations into the new joint's
/// frame, and require a common allowed direction. Without an inserted part
/// (first joint, or a cycle-closing joint between assembled parts) there is
/// nothing to move and the edge is feasible.
pub fn collision_feasible(
    cutset: &BTreeSet<JointId>,
    new_joint: &Joint,
    g: &PartGraph,
    geo: &GeometryConstraints,
    snap_tol_deg: f64,
) -> Result<bool, DigraphError> {
    // parts already in the subassembly
    let mut assembled: BTreeSet<&crate::model::PartId> = BTreeSet::new();
    for id in cutset {
        let j = g
            .joint(id)
            .ok_or_else(|| DigraphError::UnknownJoint(id.0.clone()))?;
        assembled.insert(&j.part_a);
        assembled.insert(&j.part_b);
    }

    let a_new = !assembled.contains(&new_joint.part_a);
    let b_new = !assembled.contains(&new_joint.part_b);
    let inserted = match (a_new, b_new) {
        (true, false) => &new_joint.part_a,
        (false, true) => &new_joint.part_b,
        // both new (first joint) or neither new (cycle closing): no motion
        _ => return Ok(true),
    };

    let reference = geo
        .frame(new_joint.id.as_str())
        .ok_or_else(|| DigraphError::MissingFrame(new_joint.id.0.clone()))?;

    let mut intersection = ALL_DIRECTIONS;
    let mut constrained = false;
    for j in g.joints() {
        let Some(other) = j.other_part(inserted) else {
            continue;
        };
        let mate_assembled = assembled.contains(other) || j.id == new_joint.id;
        if !mate_assembled {
            continue;
        }
        let frame = geo
            .frame(j.id.as_str())
            .ok_or_else(|| DigraphError::MissingFrame(j.id.0.clone()))?;
        let dof = geo
            .dof_for(inserted.as_str(), j.id.as_str())
            .ok_or_else(|| DigraphError::MissingDof {
                part: inserted.0.clone(),
                joint: j.id.0.clone(),
            })?;
        constrained = true;
        intersection &= transformed_direction_mask(
            &dof.matrix,
            &frame.rotation,
            &reference.rotation,
            snap_tol_deg,
        );
        if intersection == 0 {
            return Ok(false);
        }
    }
    Ok(!constrained || intersection != 0)
}
