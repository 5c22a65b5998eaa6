//! Joint sequence selection and station assignment.
//!
//! One full start-to-end path through the cutset digraph fixes the joint
//! order; the `L` layers are then split into `P` contiguous phases
//! (stations). The objective blends the path's engineering weight with the
//! bottleneck phase load:
//!
//! ```text
//! J = (1 − λ) · Σ w_e  +  λ · c · α,   α = max_p Σ_{o in phase p} t_o
//! ```
//!
//! [`solve_balance`] finds the proven optimum (or an incumbent within a
//! relative gap) by branch and bound; [`brute_force_balance`] is the
//! deliberately naive oracle used to cross-check it.

mod export;
mod oracle;
mod solver;

pub use export::{instance_lp, solution_document, OperationRow, SolutionDoc};
pub use oracle::brute_force_balance;
pub use solver::solve_balance;

use std::collections::BTreeMap;

use crate::digraph::CutsetDigraph;
use crate::error::BalanceError;
use crate::model::JointId;

/// Absolute tolerance for objective comparisons.
pub const OBJECTIVE_TOL: f64 = 1e-9;

/// Guard against division by zero in relative-gap computations.
pub const GAP_EPS: f64 = 1e-12;

/// A sequence-selection and station-assignment instance.
#[derive(Debug, Clone)]
pub struct BalanceProblem<'a> {
    pub digraph: &'a CutsetDigraph,
    /// Operation time per joint.
    pub times: BTreeMap<JointId, f64>,
    /// Number of phases (stations).
    pub phases: usize,
    /// Trade-off between engineering cost (0) and station time (1).
    pub lambda: f64,
    /// Equal-contribution factor scaling the time term.
    pub c: f64,
    /// Relative optimality gap at which the solver may stop.
    pub gap: f64,
    /// Wall-clock limit in seconds; the incumbent is returned unproven when
    /// it expires.
    pub time_limit_s: Option<f64>,
}

impl<'a> BalanceProblem<'a> {
    /// Problem with an explicitly chosen contribution factor.
    pub fn new(
        digraph: &'a CutsetDigraph,
        times: BTreeMap<JointId, f64>,
        phases: usize,
        lambda: f64,
        c: f64,
        gap: f64,
    ) -> Result<Self, BalanceError> {
        let p = BalanceProblem {
            digraph,
            times,
            phases,
            lambda,
            c,
            gap,
            time_limit_s: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Problem with `c` pre-calculated by [`equal_contribution_factor`].
    pub fn with_equal_contribution(
        digraph: &'a CutsetDigraph,
        times: BTreeMap<JointId, f64>,
        phases: usize,
        lambda: f64,
        gap: f64,
    ) -> Result<Self, BalanceError> {
        let mut p = BalanceProblem {
            digraph,
            times,
            phases,
            lambda,
            c: 1.0,
            gap,
            time_limit_s: None,
        };
        p.validate()?;
        p.c = equal_contribution_factor(digraph, phases, &p.times)?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), BalanceError> {
        let layers = self.digraph.layer_count();
        if self.phases < 1 || self.phases > layers {
            return Err(BalanceError::InvalidPhaseCount {
                phases: self.phases,
                layers,
            });
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(BalanceError::InvalidLambda(self.lambda));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(BalanceError::InvalidContributionFactor(self.c));
        }
        if !(0.0..1.0).contains(&self.gap) {
            return Err(BalanceError::InvalidGap(self.gap));
        }
        self.times_by_index()?;
        Ok(())
    }

    /// Operation times in canonical joint order.
    pub(crate) fn times_by_index(&self) -> Result<Vec<f64>, BalanceError> {
        self.digraph
            .joint_ids()
            .iter()
            .map(|id| {
                let t = self
                    .times
                    .get(id)
                    .copied()
                    .ok_or_else(|| BalanceError::NonPositiveTime(id.0.clone()))?;
                if t > 0.0 && t.is_finite() {
                    Ok(t)
                } else {
                    Err(BalanceError::NonPositiveTime(id.0.clone()))
                }
            })
            .collect()
    }
}

/// Scaling constant making the engineering and time terms commensurate:
/// the minimum full-path weight divided by the perfect-balance load
/// `Σt / P`. Zero-weight digraphs fall back to 1 so the time term survives.
pub fn equal_contribution_factor(
    d: &CutsetDigraph,
    phases: usize,
    times: &BTreeMap<JointId, f64>,
) -> Result<f64, BalanceError> {
    if phases < 1 {
        return Err(BalanceError::InvalidPhaseCount {
            phases,
            layers: d.layer_count(),
        });
    }
    let w_ref = d.shortest_path_weight().ok_or(BalanceError::Infeasible)?;
    let total: f64 = d
        .joint_ids()
        .iter()
        .map(|id| times.get(id).copied().unwrap_or(0.0))
        .sum();
    let alpha_ref = total / phases as f64;
    if w_ref == 0.0 || alpha_ref <= 0.0 {
        return Ok(1.0);
    }
    Ok(w_ref / alpha_ref)
}

/// A feasible (and usually proven-optimal) balancing solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Joint sequence in execution order.
    pub operations: Vec<JointId>,
    /// Chosen digraph edges, one per layer.
    pub edge_indices: Vec<u32>,
    /// Phase of each 0-based layer; monotone, onto `0..phases`.
    pub layer_phase: Vec<usize>,
    pub phase_loads: Vec<f64>,
    /// Bottleneck phase load.
    pub alpha: f64,
    /// Total engineering weight of the path.
    pub weight_sum: f64,
    pub objective: f64,
    /// Best proven lower bound at termination.
    pub bound: f64,
    /// Relative gap (objective − bound) / objective at termination.
    pub gap: f64,
    /// False when the solver stopped on the wall-clock limit.
    pub proven: bool,
    pub wall_time_s: f64,
    pub nodes_explored: u64,
}

impl Solution {
    /// Phase of every operation (the `z` variables).
    pub fn op_phase(&self) -> BTreeMap<JointId, usize> {
        self.operations
            .iter()
            .cloned()
            .zip(self.layer_phase.iter().copied())
            .collect()
    }

    /// Check every structural invariant against the problem; returns a
    /// description of the first violation.
    pub fn check(&self, p: &BalanceProblem<'_>) -> Result<(), String> {
        let d = p.digraph;
        let l_count = d.layer_count();
        if self.operations.len() != l_count
            || self.edge_indices.len() != l_count
            || self.layer_phase.len() != l_count
        {
            return Err("solution length does not match the layer count".into());
        }
        let mut node = d.start();
        for (i, &e) in self.edge_indices.iter().enumerate() {
            let edge = &d.edges()[e as usize];
            if edge.source != node {
                return Err(format!("edge {i} does not continue the path"));
            }
            if d.op_id(edge) != &self.operations[i] {
                return Err(format!("operation {i} does not match its edge"));
            }
            node = edge.target;
        }
        if node != d.end() {
            return Err("path does not reach the end node".into());
        }
        let distinct: std::collections::BTreeSet<_> = self.operations.iter().collect();
        if distinct.len() != l_count {
            return Err("operations are not a permutation of the joints".into());
        }
        if self.layer_phase[0] != 0 || self.layer_phase[l_count - 1] != p.phases - 1 {
            return Err("phases must start at 0 and end at P−1".into());
        }
        for w in self.layer_phase.windows(2) {
            if w[1] != w[0] && w[1] != w[0] + 1 {
                return Err("phases must ascend contiguously".into());
            }
        }
        let (loads, alpha) = phase_loads(self, &p.times, p.phases);
        if loads
            .iter()
            .zip(self.phase_loads.iter())
            .any(|(a, b)| (a - b).abs() > OBJECTIVE_TOL)
        {
            return Err("recorded phase loads disagree with the assignment".into());
        }
        if (alpha - self.alpha).abs() > OBJECTIVE_TOL {
            return Err("recorded alpha disagrees with the max phase load".into());
        }
        let expected = (1.0 - p.lambda) * self.weight_sum + p.lambda * p.c * self.alpha;
        if (expected - self.objective).abs() > OBJECTIVE_TOL {
            return Err("objective does not match its definition".into());
        }
        if self.objective + OBJECTIVE_TOL < self.bound {
            return Err("objective lies below the proof bound".into());
        }
        Ok(())
    }
}

/// Per-phase loads and their maximum, recomputed from the assignment.
pub fn phase_loads(
    s: &Solution,
    times: &BTreeMap<JointId, f64>,
    phases: usize,
) -> (Vec<f64>, f64) {
    let mut loads = vec![0.0; phases];
    for (op, &phase) in s.operations.iter().zip(s.layer_phase.iter()) {
        loads[phase] += times.get(op).copied().unwrap_or(0.0);
    }
    let alpha = loads.iter().cloned().fold(0.0, f64::max);
    (loads, alpha)
}

/// Number of adjacent operation pairs whose attribute differs.
pub fn count_attribute_changes<T: PartialEq>(
    operations: &[JointId],
    attr: &BTreeMap<JointId, T>,
) -> usize {
    operations
        .windows(2)
        .filter(|w| attr.get(&w[0]) != attr.get(&w[1]))
        .count()
}

/// Partial sums of a numeric attribute along the sequence.
pub fn cumulative_attribute(operations: &[JointId], attr: &BTreeMap<JointId, f64>) -> Vec<f64> {
    let mut total = 0.0;
    operations
        .iter()
        .map(|op| {
            total += attr.get(op).copied().unwrap_or(0.0);
            total
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::digraph::{generate_digraph, GenerateOptions, WeightConfig};
    use crate::model::{normalize_attributes, Joint, Part, PartGraph};

    pub fn part(id: &str, handling: i64) -> Part {
        Part {
            id: id.into(),
            name: id.to_owned(),
            mass_kg: 1.0,
            handling,
        }
    }

    pub fn joint(id: &str, a: &str, b: &str, time: f64, tol: i64, tech: &str) -> Joint {
        Joint {
            id: id.into(),
            part_a: a.into(),
            part_b: b.into(),
            time,
            tolerance: tol,
            technology: tech.to_owned(),
        }
    }

    /// Chain of `n` joints: parts p0..pn, joint ji connects pi to pi+1.
    pub fn chain_graph(times: &[f64]) -> PartGraph {
        let n = times.len();
        let parts = (0..=n).map(|i| part(&format!("p{i}"), 1)).collect();
        let joints = times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                joint(
                    &format!("j{i}"),
                    &format!("p{i}"),
                    &format!("p{}", i + 1),
                    t,
                    1,
                    "MAG",
                )
            })
            .collect();
        PartGraph::new(parts, joints).unwrap()
    }

    /// Triangle assembly with the given joint times.
    pub fn triangle_graph(times: [f64; 3]) -> PartGraph {
        PartGraph::new(
            vec![part("A", 1), part("B", 1), part("C", 1)],
            vec![
                joint("j1", "A", "B", times[0], 1, "MAG"),
                joint("j2", "B", "C", times[1], 1, "MAG"),
                joint("j3", "A", "C", times[2], 1, "MAG"),
            ],
        )
        .unwrap()
    }

    pub fn digraph_for(g: &PartGraph) -> CutsetDigraph {
        let norm = normalize_attributes(g);
        generate_digraph(
            g,
            &norm,
            &WeightConfig::uniform(),
            None,
            &GenerateOptions::default(),
        )
        .unwrap()
    }

    pub fn times_of(g: &PartGraph) -> BTreeMap<JointId, f64> {
        g.joints().iter().map(|j| (j.id.clone(), j.time)).collect()
    }
}
