//! The layered weighted digraph of assembly states.
//!
//! Nodes are cutsets: the sets of joints already executed. Layer `k` holds
//! the feasible `k`-joint cutsets; each edge adds exactly one joint, so
//! every start-to-end path is a complete assembly sequence. Joint sets are
//! stored as bitmasks over the canonical (id-sorted) joint order, which
//! bounds supported assemblies to 62 joints — far beyond what the edge cap
//! admits anyway.

mod feasibility;
mod generate;
mod persist;

pub use feasibility::{collision_feasible, is_single_piece};
pub use generate::{generate_digraph, GenerateOptions};
pub use persist::{digraph_dot, DigraphDoc};

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::DigraphError;
use crate::model::JointId;

/// Hard limit imposed by the bitmask representation.
pub const MAX_JOINTS: usize = 62;

/// User weights for the engineering attributes; must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WeightConfig {
    pub tech: f64,
    pub hand: f64,
    pub tol: f64,
}

impl WeightConfig {
    pub fn new(tech: f64, hand: f64, tol: f64) -> Result<Self, DigraphError> {
        let w = WeightConfig { tech, hand, tol };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), DigraphError> {
        let in_range = |v: f64| (0.0..=1.0).contains(&v);
        let sum = self.tech + self.hand + self.tol;
        if !(in_range(self.tech) && in_range(self.hand) && in_range(self.tol))
            || (sum - 1.0).abs() > 1e-9
        {
            return Err(DigraphError::InvalidWeights {
                tech: self.tech,
                hand: self.hand,
                tol: self.tol,
            });
        }
        Ok(())
    }

    /// Equal thirds.
    pub fn uniform() -> Self {
        WeightConfig {
            tech: 1.0 / 3.0,
            hand: 1.0 / 3.0,
            tol: 1.0 / 3.0,
        }
    }
}

/// Normalized attribute values attached to one digraph edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeAttrs {
    pub tech: f64,
    pub hand: f64,
    pub tol: f64,
}

/// Weight of an edge at 1-based layer `layer`: the μ-blend of the normalized
/// attributes divided by the layer index, so early operations cost more and
/// expensive joints are pushed late.
pub fn edge_weight(attrs: &EdgeAttrs, mu: &WeightConfig, layer: usize) -> Result<f64, DigraphError> {
    if layer == 0 {
        return Err(DigraphError::LayerZero);
    }
    let blend = mu.tech * attrs.tech + mu.hand * attrs.hand + mu.tol * attrs.tol;
    Ok(blend / layer as f64)
}

/// Maximum possible number of digraph edges for `j` assembly joints:
/// Σ_{k=0}^{j−1} (j−k)·C(j,k), evaluated exactly.
pub fn max_edge_bound(j: u64) -> BigUint {
    let mut total = BigUint::zero();
    let mut binom = BigUint::one(); // C(j, 0)
    for k in 0..j {
        total += (j - k) * binom.clone();
        // C(j, k+1) = C(j, k) * (j - k) / (k + 1), exact division
        binom = binom * (j - k) / (k + 1);
    }
    total
}

/// One assembly state: the set of executed joints at a given layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cutset {
    pub joints: BTreeSet<JointId>,
    pub layer: usize,
}

impl Cutset {
    pub fn new(joints: BTreeSet<JointId>) -> Self {
        let layer = joints.len();
        Cutset { joints, layer }
    }
}

/// Node of the cutset digraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigraphNode {
    /// Bitmask over the canonical joint order.
    pub mask: u64,
    /// Layer index = number of executed joints.
    pub layer: u32,
}

/// Edge of the cutset digraph: executing joint `op` moves the assembly from
/// `source` (layer−1) to `target` (layer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigraphEdge {
    pub source: u32,
    pub target: u32,
    /// Canonical joint index of the operation.
    pub op: u16,
    /// 1-based target layer.
    pub layer: u32,
    pub weight: f64,
}

/// Layered weighted DAG of assembly states.
///
/// Nodes are sorted by (layer, mask) and edges by (layer, source, op), so
/// two digraphs over the same assembly compare equal regardless of how they
/// were produced.
#[derive(Debug, Clone)]
pub struct CutsetDigraph {
    joint_ids: Vec<JointId>,
    nodes: Vec<DigraphNode>,
    edges: Vec<DigraphEdge>,
    layers: Vec<Vec<u32>>,
    out_edges: Vec<Vec<u32>>,
    in_edges: Vec<Vec<u32>>,
    start: u32,
    end: u32,
}

impl PartialEq for CutsetDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.joint_ids == other.joint_ids
            && self.nodes == other.nodes
            && self.edges == other.edges
    }
}

/// Edge described by source mask and operation, before node ids exist.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RawEdge {
    pub source_mask: u64,
    pub op: u16,
    pub weight: f64,
}

impl CutsetDigraph {
    /// Build a digraph from raw edges: resolve node ids, prune every node
    /// not on a start-to-end path, and sort canonically.
    pub(crate) fn assemble(
        joint_ids: Vec<JointId>,
        raw_edges: &[RawEdge],
    ) -> Result<Self, DigraphError> {
        let j = joint_ids.len();
        assert!(j >= 1 && j <= MAX_JOINTS, "joint count {j} out of range");
        let full: u64 = (1u64 << j) - 1;

        // adjacency over masks
        let mut fwd: BTreeMap<u64, Vec<(u64, usize)>> = BTreeMap::new();
        let mut bwd: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        fwd.entry(0).or_default();
        for (i, e) in raw_edges.iter().enumerate() {
            let target = e.source_mask | (1u64 << e.op);
            debug_assert_ne!(target, e.source_mask, "op already in cutset");
            fwd.entry(e.source_mask).or_default().push((target, i));
            fwd.entry(target).or_default();
            bwd.entry(target).or_default().push(e.source_mask);
        }

        let reachable_from_start = reach(&[0], |m| {
            fwd.get(&m)
                .map(|v| v.iter().map(|&(t, _)| t).collect())
                .unwrap_or_default()
        });
        let reaches_end = reach(&[full], |m| bwd.get(&m).cloned().unwrap_or_default());
        if !reachable_from_start.contains(&full) {
            return Err(DigraphError::PlanningInfeasible);
        }
        let keep: BTreeSet<u64> = reachable_from_start
            .intersection(&reaches_end)
            .copied()
            .collect();

        // canonical node order: (layer, mask)
        let mut masks: Vec<u64> = keep.iter().copied().collect();
        masks.sort_by_key(|&m| (m.count_ones(), m));
        let id_of: BTreeMap<u64, u32> = masks
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i as u32))
            .collect();

        let nodes: Vec<DigraphNode> = masks
            .iter()
            .map(|&m| DigraphNode {
                mask: m,
                layer: m.count_ones(),
            })
            .collect();

        let mut edges: Vec<DigraphEdge> = raw_edges
            .iter()
            .filter_map(|e| {
                let target = e.source_mask | (1u64 << e.op);
                let (s, t) = (id_of.get(&e.source_mask)?, id_of.get(&target)?);
                Some(DigraphEdge {
                    source: *s,
                    target: *t,
                    op: e.op,
                    layer: target.count_ones(),
                    weight: e.weight,
                })
            })
            .collect();
        edges.sort_by_key(|e| (e.layer, e.source, e.op));
        edges.dedup_by_key(|e| (e.source, e.op));

        let mut layers: Vec<Vec<u32>> = vec![Vec::new(); j + 1];
        for (i, n) in nodes.iter().enumerate() {
            layers[n.layer as usize].push(i as u32);
        }
        let mut out_edges: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
        let mut in_edges: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.source as usize].push(i as u32);
            in_edges[e.target as usize].push(i as u32);
        }

        let start = id_of[&0];
        let end = id_of[&full];
        Ok(CutsetDigraph {
            joint_ids,
            nodes,
            edges,
            layers,
            out_edges,
            in_edges,
            start,
            end,
        })
    }

    pub fn joint_ids(&self) -> &[JointId] {
        &self.joint_ids
    }

    /// Number of edge layers (= joint count). Node layers run 0..=L.
    pub fn layer_count(&self) -> usize {
        self.joint_ids.len()
    }

    pub fn nodes(&self) -> &[DigraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[DigraphEdge] {
        &self.edges
    }

    pub fn layers(&self) -> &[Vec<u32>] {
        &self.layers
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn end(&self) -> u32 {
        self.end
    }

    pub fn out_edges(&self, node: u32) -> &[u32] {
        &self.out_edges[node as usize]
    }

    pub fn in_edges(&self, node: u32) -> &[u32] {
        &self.in_edges[node as usize]
    }

    pub fn op_id(&self, edge: &DigraphEdge) -> &JointId {
        &self.joint_ids[edge.op as usize]
    }

    /// Joint-id set of a node, in canonical order.
    pub fn node_joints(&self, node: u32) -> BTreeSet<JointId> {
        let mask = self.nodes[node as usize].mask;
        self.joint_ids
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1u64 << i) != 0)
            .map(|(_, id)| id.clone())
            .collect()
    }

    /// Total weight of the minimum-weight start-to-end path, when one exists.
    pub fn shortest_path_weight(&self) -> Option<f64> {
        let dist = self.distances_to_end();
        let d = dist[self.start as usize];
        d.is_finite().then_some(d)
    }

    /// Minimum remaining weight from every node to the end node.
    pub fn distances_to_end(&self) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        dist[self.end as usize] = 0.0;
        for layer in (0..self.layer_count()).rev() {
            for &n in &self.layers[layer] {
                let mut best = f64::INFINITY;
                for &e in self.out_edges(n) {
                    let edge = &self.edges[e as usize];
                    let cand = edge.weight + dist[edge.target as usize];
                    if cand < best {
                        best = cand;
                    }
                }
                dist[n as usize] = best;
            }
        }
        dist
    }
}

fn reach(seeds: &[u64], succ: impl Fn(u64) -> Vec<u64>) -> BTreeSet<u64> {
    let mut seen: BTreeSet<u64> = seeds.iter().copied().collect();
    let mut stack: Vec<u64> = seeds.to_vec();
    while let Some(m) = stack.pop() {
        for next in succ(m) {
            if seen.insert(next) {
                stack.push(next);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_edge_bound_small_values() {
        assert_eq!(max_edge_bound(1), BigUint::from(1u32));
        // hand expansion: 3·C(3,0) + 2·C(3,1) + 1·C(3,2) = 3 + 6 + 3
        assert_eq!(max_edge_bound(3), BigUint::from(12u32));
        assert_eq!(max_edge_bound(13), BigUint::from(53_248u32));
    }

    #[test]
    fn max_edge_bound_matches_closed_form() {
        // independent oracle: the sum telescopes to J·2^(J−1)
        for j in 1u64..=40 {
            let closed = BigUint::from(j) * (BigUint::one() << (j - 1));
            assert_eq!(max_edge_bound(j), closed, "J = {j}");
        }
    }

    #[test]
    fn edge_weight_arithmetic() {
        let attrs = EdgeAttrs {
            tech: 0.5,
            hand: 0.25,
            tol: 0.0,
        };
        let mu = WeightConfig::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(edge_weight(&attrs, &mu, 2).unwrap(), 0.25);

        let mu = WeightConfig::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(edge_weight(&attrs, &mu, 7).unwrap(), 0.0);

        let ones = EdgeAttrs {
            tech: 1.0,
            hand: 1.0,
            tol: 1.0,
        };
        let mu = WeightConfig::uniform();
        assert!((edge_weight(&ones, &mu, 1).unwrap() - 1.0).abs() < 1e-12);

        assert!(matches!(
            edge_weight(&attrs, &mu, 0),
            Err(DigraphError::LayerZero)
        ));
    }

    #[test]
    fn weight_config_must_sum_to_one() {
        assert!(WeightConfig::new(0.5, 0.5, 0.5).is_err());
        assert!(WeightConfig::new(-0.5, 1.0, 0.5).is_err());
        assert!(WeightConfig::new(0.2, 0.3, 0.5).is_ok());
    }
}
