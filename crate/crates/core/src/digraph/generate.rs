//! Digraph generation: layer-by-layer forward expansion over deduplicated
//! cutsets, gated by single-piece flow and the optional DoF collision check.

use std::collections::{BTreeMap, HashMap};

use nalgebra::Matrix3;

use super::feasibility::{transformed_direction_mask, ALL_DIRECTIONS};
use super::{edge_weight, CutsetDigraph, EdgeAttrs, RawEdge, WeightConfig, MAX_JOINTS};
use crate::error::DigraphError;
use crate::geometry::GeometryConstraints;
use crate::model::{NormalizedAttributes, PartGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    /// Abort when the live edge count exceeds this cap.
    pub max_edges: usize,
    /// Angular tolerance for snapping transformed DoF directions onto the
    /// reference frame's axes, in degrees.
    pub snap_tol_deg: f64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            max_edges: 5_000_000,
            snap_tol_deg: 1.0,
        }
    }
}

struct JointInfo {
    part_a: usize,
    part_b: usize,
    tech: f64,
    tol: f64,
    hand_a: f64,
    hand_b: f64,
    hand_fallback: f64,
}

/// Per-joint geometric data resolved up front so the inner loop only does
/// bitmask work and memoized direction-mask lookups.
struct GeoTables {
    rotations: Vec<Option<Matrix3<f64>>>,
    /// (part, joint) → DoF entries
    dof: BTreeMap<(usize, usize), [[u8; 4]; 3]>,
    /// joints incident to each part
    joints_of: Vec<Vec<usize>>,
    snap_tol_deg: f64,
    /// (reference joint, constraint joint, part) → direction mask
    memo: HashMap<(u16, u16, u16), u8>,
}

impl GeoTables {
    fn build(
        g: &PartGraph,
        geo: &GeometryConstraints,
        snap_tol_deg: f64,
    ) -> Result<Self, DigraphError> {
        let mut rotations = Vec::with_capacity(g.joints().len());
        for j in g.joints() {
            rotations.push(geo.frame(j.id.as_str()).map(|f| f.rotation));
        }
        let mut dof = BTreeMap::new();
        for entry in &geo.dof {
            let part = g.part_idx(&entry.part_id.as_str().into());
            let joint = g.joint_idx(&entry.joint_id.as_str().into());
            if let (Some(p), Some(j)) = (part, joint) {
                dof.insert((p, j), entry.matrix);
            }
        }
        let mut joints_of = vec![Vec::new(); g.parts().len()];
        for (ji, j) in g.joints().iter().enumerate() {
            joints_of[g.part_idx(&j.part_a).unwrap()].push(ji);
            joints_of[g.part_idx(&j.part_b).unwrap()].push(ji);
        }
        Ok(GeoTables {
            rotations,
            dof,
            joints_of,
            snap_tol_deg,
            memo: HashMap::new(),
        })
    }

    fn rotation(&self, g: &PartGraph, joint: usize) -> Result<Matrix3<f64>, DigraphError> {
        self.rotations[joint]
            .ok_or_else(|| DigraphError::MissingFrame(g.joints()[joint].id.0.clone()))
    }

    fn direction_mask(
        &mut self,
        g: &PartGraph,
        reference_joint: usize,
        constraint_joint: usize,
        part: usize,
    ) -> Result<u8, DigraphError> {
        let key = (
            reference_joint as u16,
            constraint_joint as u16,
            part as u16,
        );
        if let Some(&m) = self.memo.get(&key) {
            return Ok(m);
        }
        let reference = self.rotation(g, reference_joint)?;
        let own = self.rotation(g, constraint_joint)?;
        let entries = self.dof.get(&(part, constraint_joint)).ok_or_else(|| {
            DigraphError::MissingDof {
                part: g.parts()[part].id.0.clone(),
                joint: g.joints()[constraint_joint].id.0.clone(),
            }
        })?;
        let mask = transformed_direction_mask(entries, &own, &reference, self.snap_tol_deg);
        self.memo.insert(key, mask);
        Ok(mask)
    }

    /// Collision check for inserting `part` via `new_joint` into a cutset
    /// whose assembled parts are `partmask`.
    fn insertion_feasible(
        &mut self,
        g: &PartGraph,
        new_joint: usize,
        part: usize,
        partmask: u64,
    ) -> Result<bool, DigraphError> {
        let mut intersection = ALL_DIRECTIONS;
        let mut constrained = false;
        let incident = self.joints_of[part].clone();
        for cj in incident {
            let j = &g.joints()[cj];
            let other = if g.part_idx(&j.part_a).unwrap() == part {
                g.part_idx(&j.part_b).unwrap()
            } else {
                g.part_idx(&j.part_a).unwrap()
            };
            if partmask & (1u64 << other) == 0 {
                continue;
            }
            constrained = true;
            intersection &= self.direction_mask(g, new_joint, cj, part)?;
            if intersection == 0 {
                return Ok(false);
            }
        }
        Ok(!constrained || intersection != 0)
    }
}

/// Generate the layered weighted digraph of all feasible assembly states.
///
/// Expansion walks layer by layer from the empty cutset, deduplicating
/// states by joint bitmask. A joint can extend a cutset only when it touches
/// the existing subassembly (single-piece flow) and, when geometric
/// constraints are supplied, when the inserted part has a collision-free
/// insertion direction. Dead-end states are pruned afterwards so that every
/// surviving node lies on a start-to-end path.
pub fn generate_digraph(
    g: &PartGraph,
    norm: &NormalizedAttributes,
    mu: &WeightConfig,
    geo: Option<&GeometryConstraints>,
    opts: &GenerateOptions,
) -> Result<CutsetDigraph, DigraphError> {
    mu.validate()?;
    let j_count = g.joints().len();
    let p_count = g.parts().len();
    if j_count == 0 || j_count > MAX_JOINTS || p_count > 64 {
        return Err(DigraphError::TooLarge {
            joints: j_count,
            parts: p_count,
            max: MAX_JOINTS,
        });
    }
    if !g.is_connected() {
        return Err(DigraphError::PlanningInfeasible);
    }

    let joints: Vec<JointInfo> = g
        .joints()
        .iter()
        .map(|j| JointInfo {
            part_a: g.part_idx(&j.part_a).unwrap(),
            part_b: g.part_idx(&j.part_b).unwrap(),
            tech: norm.tech(&j.id),
            tol: norm.tolerance(&j.id),
            hand_a: norm.part_handling(&j.part_a),
            hand_b: norm.part_handling(&j.part_b),
            hand_fallback: norm.joint_handling(&j.id),
        })
        .collect();

    let mut geo_tables = geo
        .map(|geo| GeoTables::build(g, geo, opts.snap_tol_deg))
        .transpose()?;

    let mut raw_edges: Vec<RawEdge> = Vec::new();
    // current layer: joint mask → assembled-part mask
    let mut current: BTreeMap<u64, u64> = BTreeMap::new();
    current.insert(0, 0);

    for layer in 1..=j_count {
        let mut next: BTreeMap<u64, u64> = BTreeMap::new();
        for (&mask, &partmask) in &current {
            for (op, info) in joints.iter().enumerate() {
                let bit = 1u64 << op;
                if mask & bit != 0 {
                    continue;
                }
                let a_in = partmask & (1u64 << info.part_a) != 0;
                let b_in = partmask & (1u64 << info.part_b) != 0;
                // single-piece flow: the joint must touch the subassembly
                if mask != 0 && !a_in && !b_in {
                    continue;
                }

                let hand = match (a_in, b_in) {
                    (true, true) => 0.0, // cycle closing: nothing is moved
                    (false, true) => info.hand_a,
                    (true, false) => info.hand_b,
                    (false, false) => info.hand_fallback,
                };

                if let Some(tables) = geo_tables.as_mut() {
                    let inserted = match (a_in, b_in) {
                        (false, true) => Some(info.part_a),
                        (true, false) => Some(info.part_b),
                        _ => None,
                    };
                    if let Some(part) = inserted {
                        if !tables.insertion_feasible(g, op, part, partmask)? {
                            continue;
                        }
                    }
                }

                let attrs = EdgeAttrs {
                    tech: info.tech,
                    hand,
                    tol: info.tol,
                };
                let weight = edge_weight(&attrs, mu, layer)?;
                raw_edges.push(RawEdge {
                    source_mask: mask,
                    op: op as u16,
                    weight,
                });
                if raw_edges.len() > opts.max_edges {
                    return Err(DigraphError::SizeLimitExceeded {
                        cap: opts.max_edges,
                    });
                }
                next.entry(mask | bit)
                    .or_insert(partmask | (1u64 << info.part_a) | (1u64 << info.part_b));
            }
        }
        current = next;
    }

    let joint_ids = g.joints().iter().map(|j| j.id.clone()).collect();
    CutsetDigraph::assemble(joint_ids, &raw_edges)
}
