//! Brute-force verification oracle: enumerate every full path and every
//! contiguous split of its layers into phases, score each candidate
//! directly from the objective definition, and keep the best. Deliberately
//! naive and independent of the solver's search, bounds, and partition DP.

use std::time::Instant;

use super::{BalanceProblem, Solution, OBJECTIVE_TOL};
use crate::error::BalanceError;
use crate::model::JointId;

/// Default layer cap; `L! · C(L−1, P−1)` grows quickly beyond this.
pub const BRUTE_FORCE_CAP: usize = 8;

struct Best {
    objective: f64,
    operations: Vec<JointId>,
    edges: Vec<u32>,
    layer_phase: Vec<usize>,
    alpha: f64,
    weight: f64,
}

/// [`brute_force_balance_with_cap`] at the default cap of 8 layers.
pub fn brute_force_balance(p: &BalanceProblem<'_>) -> Result<Solution, BalanceError> {
    brute_force_balance_with_cap(p, BRUTE_FORCE_CAP)
}

/// Globally optimal solution by exhaustive enumeration. Ties on the
/// objective (within 1e-9) resolve to the lexicographically smallest
/// operation sequence, then to the smaller bottleneck.
pub fn brute_force_balance_with_cap(
    p: &BalanceProblem<'_>,
    cap: usize,
) -> Result<Solution, BalanceError> {
    let started = Instant::now();
    p.validate()?;
    let d = p.digraph;
    let layers = d.layer_count();
    if layers > cap {
        return Err(BalanceError::InstanceTooLarge { layers, cap });
    }
    let times = p.times_by_index()?;

    let mut best: Option<Best> = None;
    let mut paths_seen = 0u64;
    let mut prefix: Vec<u32> = Vec::with_capacity(layers);
    walk_paths(
        p,
        &times,
        d.start(),
        &mut prefix,
        &mut paths_seen,
        &mut best,
    );

    let best = best.ok_or(BalanceError::Infeasible)?;
    let mut phase_loads = vec![0.0; p.phases];
    for (i, &e) in best.edges.iter().enumerate() {
        phase_loads[best.layer_phase[i]] += times[d.edges()[e as usize].op as usize];
    }
    Ok(Solution {
        operations: best.operations,
        edge_indices: best.edges,
        layer_phase: best.layer_phase,
        phase_loads,
        alpha: best.alpha,
        weight_sum: best.weight,
        objective: best.objective,
        bound: best.objective,
        gap: 0.0,
        proven: true,
        wall_time_s: started.elapsed().as_secs_f64(),
        nodes_explored: paths_seen,
    })
}

fn walk_paths(
    p: &BalanceProblem<'_>,
    times: &[f64],
    node: u32,
    prefix: &mut Vec<u32>,
    paths_seen: &mut u64,
    best: &mut Option<Best>,
) {
    let d = p.digraph;
    if node == d.end() && prefix.len() == d.layer_count() {
        *paths_seen += 1;
        evaluate_path(p, times, prefix, best);
        return;
    }
    for &e in d.out_edges(node) {
        prefix.push(e);
        walk_paths(p, times, d.edges()[e as usize].target, prefix, paths_seen, best);
        prefix.pop();
    }
}

fn evaluate_path(p: &BalanceProblem<'_>, times: &[f64], edges: &[u32], best: &mut Option<Best>) {
    let d = p.digraph;
    let layers = edges.len();
    let ts: Vec<f64> = edges
        .iter()
        .map(|&e| times[d.edges()[e as usize].op as usize])
        .collect();
    let weight: f64 = edges.iter().map(|&e| d.edges()[e as usize].weight).sum();
    let operations: Vec<JointId> = edges
        .iter()
        .map(|&e| d.op_id(&d.edges()[e as usize]).clone())
        .collect();

    // every way of placing P−1 split points into the L−1 gaps
    let gaps = layers - 1;
    for mask in 0u64..(1u64 << gaps) {
        if mask.count_ones() as usize != p.phases - 1 {
            continue;
        }
        let mut layer_phase = vec![0usize; layers];
        let mut phase = 0usize;
        for i in 1..layers {
            if mask & (1u64 << (i - 1)) != 0 {
                phase += 1;
            }
            layer_phase[i] = phase;
        }
        let mut loads = vec![0.0; p.phases];
        for (i, &t) in ts.iter().enumerate() {
            loads[layer_phase[i]] += t;
        }
        let alpha = loads.iter().cloned().fold(0.0, f64::max);
        let objective = (1.0 - p.lambda) * weight + p.lambda * p.c * alpha;
        let better = match best.as_ref() {
            None => true,
            Some(b) => {
                objective < b.objective - OBJECTIVE_TOL
                    || ((objective - b.objective).abs() <= OBJECTIVE_TOL
                        && (operations < b.operations
                            || (operations == b.operations && alpha < b.alpha)))
            }
        };
        if better {
            *best = Some(Best {
                objective,
                operations: operations.clone(),
                edges: edges.to_vec(),
                layer_phase,
                alpha,
                weight,
            });
        }
    }
}
