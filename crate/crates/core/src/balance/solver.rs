//! Exact solver: best-first branch and bound over (node, phase, open-phase
//! load, max closed load, accumulated weight) states with Pareto dominance
//! pruning per (node, phase).
//!
//! The lower bound is consistent (children never bound below their parent),
//! so states pop in non-decreasing bound order and the last popped bound is
//! a valid proof bound. After the value search terminates, a pruned
//! depth-first pass reconstructs the lexicographically smallest operation
//! sequence that attains the incumbent objective, and the bottleneck-
//! minimal contiguous partition of that sequence fixes the phase split.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use super::{BalanceProblem, Solution, GAP_EPS, OBJECTIVE_TOL};
use crate::digraph::CutsetDigraph;
use crate::error::BalanceError;

struct Ctx<'a> {
    d: &'a CutsetDigraph,
    times: Vec<f64>,
    layers: usize,
    phases: usize,
    lambda: f64,
    c: f64,
    dist_end: Vec<f64>,
    /// Total time of the operations not yet executed at each node.
    t_rem: Vec<f64>,
    /// Largest single remaining operation time at each node.
    max_t_rem: Vec<f64>,
}

impl Ctx<'_> {
    fn lower_bound(&self, node: u32, phase: usize, load: f64, max_closed: f64, weight: f64) -> f64 {
        let n = node as usize;
        let w_part = weight + self.dist_end[n];
        let open_phases = (self.phases - phase) as f64;
        let alpha_lb = max_closed
            .max(load)
            .max(self.max_t_rem[n])
            .max((load + self.t_rem[n]) / open_phases);
        (1.0 - self.lambda) * w_part + self.lambda * self.c * alpha_lb
    }

    /// Dominance tuple: components irrelevant to the objective are zeroed so
    /// they cannot block pruning.
    fn dom_key(&self, load: f64, max_closed: f64, weight: f64) -> (f64, f64, f64) {
        if self.lambda == 0.0 {
            (0.0, 0.0, weight)
        } else if self.lambda == 1.0 {
            (load, max_closed, 0.0)
        } else {
            (load, max_closed, weight)
        }
    }
}

#[derive(Clone, Copy)]
struct Rec {
    node: u32,
    phase: u32,
    load: f64,
    max_closed: f64,
    weight: f64,
    parent: u32,
    via_edge: u32,
}

const ROOT: u32 = u32::MAX;

struct QEntry {
    bound: f64,
    tick: u64,
    idx: u32,
}

impl PartialEq for QEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QEntry {}

impl PartialOrd for QEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap; ties resolve in insertion order
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.tick.cmp(&self.tick))
    }
}

/// Bottleneck-minimal split of `ts` into exactly `p` contiguous non-empty
/// segments. Returns the bottleneck and the 0-based segment index per item;
/// ties prefer the earliest split points.
fn bottleneck_partition(ts: &[f64], p: usize) -> (f64, Vec<usize>) {
    let n = ts.len();
    assert!(p >= 1 && p <= n);
    let mut prefix = vec![0.0; n + 1];
    for (i, &t) in ts.iter().enumerate() {
        prefix[i + 1] = prefix[i] + t;
    }
    // dp[k][i]: best bottleneck for the first i items in k segments
    let mut dp = vec![vec![f64::INFINITY; n + 1]; p + 1];
    let mut split = vec![vec![0usize; n + 1]; p + 1];
    for i in 1..=n {
        dp[1][i] = prefix[i];
    }
    for k in 2..=p {
        for i in k..=n {
            for j in (k - 1)..i {
                let cand = dp[k - 1][j].max(prefix[i] - prefix[j]);
                if cand < dp[k][i] {
                    dp[k][i] = cand;
                    split[k][i] = j;
                }
            }
        }
    }
    let mut assignment = vec![0usize; n];
    let mut i = n;
    for k in (2..=p).rev() {
        let j = split[k][i];
        for item in j..i {
            assignment[item] = k - 1;
        }
        i = j;
    }
    (dp[p][n], assignment)
}

struct Incumbent {
    edges: Vec<u32>,
    objective: f64,
}

/// Cheapest-path incumbent: follow minimum (edge weight + remaining
/// distance), then balance that fixed sequence optimally.
fn greedy_incumbent(ctx: &Ctx<'_>) -> Incumbent {
    let d = ctx.d;
    let mut edges = Vec::with_capacity(ctx.layers);
    let mut node = d.start();
    let mut weight = 0.0;
    while node != d.end() {
        let &e = d
            .out_edges(node)
            .iter()
            .min_by(|&&a, &&b| {
                let ea = &d.edges()[a as usize];
                let eb = &d.edges()[b as usize];
                let ka = ea.weight + ctx.dist_end[ea.target as usize];
                let kb = eb.weight + ctx.dist_end[eb.target as usize];
                ka.partial_cmp(&kb)
                    .unwrap_or(Ordering::Equal)
                    .then(ea.op.cmp(&eb.op))
            })
            .expect("feasible digraph has outgoing edges");
        let edge = &d.edges()[e as usize];
        weight += edge.weight;
        edges.push(e);
        node = edge.target;
    }
    let ts: Vec<f64> = edges
        .iter()
        .map(|&e| ctx.times[d.edges()[e as usize].op as usize])
        .collect();
    let (alpha, _) = bottleneck_partition(&ts, ctx.phases);
    let objective = (1.0 - ctx.lambda) * weight + ctx.lambda * ctx.c * alpha;
    Incumbent { edges, objective }
}

/// Depth-first reconstruction of the lexicographically smallest operation
/// sequence whose best completion stays within `target`. Children are
/// visited in ascending operation order, and both phase decisions of an
/// edge are exhausted before the next operation, so the first full path
/// found is the lex-min sequence.
fn lex_reconstruct(ctx: &Ctx<'_>, target: f64) -> Option<Vec<u32>> {
    fn dfs(
        ctx: &Ctx<'_>,
        node: u32,
        phase: usize,
        load: f64,
        max_closed: f64,
        weight: f64,
        layer: usize,
        target: f64,
        acc: &mut Vec<u32>,
    ) -> bool {
        if layer == ctx.layers {
            return node == ctx.d.end();
        }
        let l = layer + 1;
        for &e in ctx.d.out_edges(node) {
            let edge = &ctx.d.edges()[e as usize];
            let t = ctx.times[edge.op as usize];
            // continue in the open phase
            if ctx.layers - l >= ctx.phases - 1 - phase {
                let lb = ctx.lower_bound(
                    edge.target,
                    phase,
                    load + t,
                    max_closed,
                    weight + edge.weight,
                );
                if lb <= target {
                    acc.push(e);
                    if dfs(
                        ctx,
                        edge.target,
                        phase,
                        load + t,
                        max_closed,
                        weight + edge.weight,
                        l,
                        target,
                        acc,
                    ) {
                        return true;
                    }
                    acc.pop();
                }
            }
            // open the next phase at this layer
            if layer >= 1 && phase + 1 <= ctx.phases - 1 && ctx.layers - l >= ctx.phases - phase - 2
            {
                let lb = ctx.lower_bound(
                    edge.target,
                    phase + 1,
                    t,
                    max_closed.max(load),
                    weight + edge.weight,
                );
                if lb <= target {
                    acc.push(e);
                    if dfs(
                        ctx,
                        edge.target,
                        phase + 1,
                        t,
                        max_closed.max(load),
                        weight + edge.weight,
                        l,
                        target,
                        acc,
                    ) {
                        return true;
                    }
                    acc.pop();
                }
            }
        }
        false
    }

    let mut acc = Vec::with_capacity(ctx.layers);
    dfs(
        ctx,
        ctx.d.start(),
        0,
        0.0,
        0.0,
        0.0,
        0,
        target,
        &mut acc,
    )
    .then_some(acc)
}

fn package_solution(
    ctx: &Ctx<'_>,
    edges: Vec<u32>,
    bound: f64,
    proven: bool,
    nodes_explored: u64,
    started: Instant,
) -> Solution {
    let d = ctx.d;
    let operations: Vec<_> = edges
        .iter()
        .map(|&e| d.op_id(&d.edges()[e as usize]).clone())
        .collect();
    let ts: Vec<f64> = edges
        .iter()
        .map(|&e| ctx.times[d.edges()[e as usize].op as usize])
        .collect();
    let weight_sum: f64 = edges.iter().map(|&e| d.edges()[e as usize].weight).sum();
    let (alpha, layer_phase) = bottleneck_partition(&ts, ctx.phases);
    let mut phase_loads = vec![0.0; ctx.phases];
    for (i, &ph) in layer_phase.iter().enumerate() {
        phase_loads[ph] += ts[i];
    }
    let objective = (1.0 - ctx.lambda) * weight_sum + ctx.lambda * ctx.c * alpha;
    let bound = bound.min(objective);
    let gap = ((objective - bound) / objective.max(GAP_EPS)).max(0.0);
    Solution {
        operations,
        edge_indices: edges,
        layer_phase,
        phase_loads,
        alpha,
        weight_sum,
        objective,
        bound,
        gap,
        proven,
        wall_time_s: started.elapsed().as_secs_f64(),
        nodes_explored,
    }
}

/// Solve the sequence-selection and station-assignment problem to proven
/// optimality, to the requested relative gap, or until the wall-clock limit
/// expires (returning the incumbent flagged unproven).
pub fn solve_balance(p: &BalanceProblem<'_>) -> Result<Solution, BalanceError> {
    let started = Instant::now();
    p.validate()?;
    let d = p.digraph;
    let times = p.times_by_index()?;
    let dist_end = d.distances_to_end();
    if !dist_end[d.start() as usize].is_finite() {
        return Err(BalanceError::Infeasible);
    }

    let total: f64 = times.iter().sum();
    let joint_count = d.joint_ids().len();
    let mut t_rem = Vec::with_capacity(d.nodes().len());
    let mut max_t_rem = Vec::with_capacity(d.nodes().len());
    for n in d.nodes() {
        let mut used = 0.0;
        let mut maxrem: f64 = 0.0;
        for (i, &t) in times.iter().enumerate().take(joint_count) {
            if n.mask & (1u64 << i) != 0 {
                used += t;
            } else {
                maxrem = maxrem.max(t);
            }
        }
        t_rem.push(total - used);
        max_t_rem.push(maxrem);
    }

    let ctx = Ctx {
        d,
        times,
        layers: d.layer_count(),
        phases: p.phases,
        lambda: p.lambda,
        c: p.c,
        dist_end,
        t_rem,
        max_t_rem,
    };

    let greedy = greedy_incumbent(&ctx);
    let mut inc_edges = greedy.edges;
    let mut inc_obj = greedy.objective;

    let mut arena: Vec<Rec> = vec![Rec {
        node: d.start(),
        phase: 0,
        load: 0.0,
        max_closed: 0.0,
        weight: 0.0,
        parent: ROOT,
        via_edge: ROOT,
    }];
    let mut heap = BinaryHeap::new();
    let mut tick = 0u64;
    heap.push(QEntry {
        bound: ctx.lower_bound(d.start(), 0, 0.0, 0.0, 0.0),
        tick,
        idx: 0,
    });
    // Pareto frontier per (node, phase): (load, max_closed, weight, state)
    let mut frontier: HashMap<(u32, u32), Vec<(f64, f64, f64, u32)>> = HashMap::new();
    frontier.insert(
        (d.start(), 0),
        vec![(0.0, 0.0, 0.0, 0)],
    );

    let mut proof_bound = f64::NEG_INFINITY;
    let mut proven = true;
    let mut pops = 0u64;

    let gap_reached = |inc: f64, bound: f64, gap: f64| -> bool {
        let b = bound.min(inc);
        let relative_ok = (inc - b) <= gap * inc.max(GAP_EPS) + OBJECTIVE_TOL;
        let factor_ok = inc <= (1.0 + gap) * b + OBJECTIVE_TOL;
        relative_ok && factor_ok
    };

    while let Some(q) = heap.pop() {
        pops += 1;
        proof_bound = proof_bound.max(q.bound);
        if gap_reached(inc_obj, q.bound, p.gap) {
            break;
        }
        if let Some(limit) = p.time_limit_s {
            if pops % 1024 == 0 && started.elapsed().as_secs_f64() > limit {
                proven = false;
                break;
            }
        }
        let s = arena[q.idx as usize];
        // a later state may have superseded this one
        let key = ctx.dom_key(s.load, s.max_closed, s.weight);
        if let Some(entries) = frontier.get(&(s.node, s.phase)) {
            let superseded = entries.iter().any(|&(l, m, w, idx)| {
                idx != q.idx && l <= key.0 && m <= key.1 && w <= key.2
            });
            if superseded {
                continue;
            }
        }

        let layer = d.nodes()[s.node as usize].layer as usize;
        let l = layer + 1;
        for &e in d.out_edges(s.node) {
            let edge = &d.edges()[e as usize];
            let t = ctx.times[edge.op as usize];
            let mut push_child = |phase: usize, load: f64, max_closed: f64, heap: &mut BinaryHeap<QEntry>, arena: &mut Vec<Rec>, frontier: &mut HashMap<(u32, u32), Vec<(f64, f64, f64, u32)>>, inc_obj: &mut f64, inc_edges: &mut Vec<u32>| {
                let weight = s.weight + edge.weight;
                if edge.target == d.end() {
                    // terminal: the last phase closes here
                    let alpha = max_closed.max(load);
                    let objective = (1.0 - ctx.lambda) * weight + ctx.lambda * ctx.c * alpha;
                    if objective < *inc_obj - OBJECTIVE_TOL {
                        *inc_obj = objective;
                        let mut chain = vec![e];
                        let mut at = q.idx;
                        while arena[at as usize].parent != ROOT {
                            chain.push(arena[at as usize].via_edge);
                            at = arena[at as usize].parent;
                        }
                        chain.reverse();
                        *inc_edges = chain;
                    }
                    return;
                }
                let lb = ctx.lower_bound(edge.target, phase, load, max_closed, weight);
                if lb >= *inc_obj - OBJECTIVE_TOL {
                    return;
                }
                let dk = ctx.dom_key(load, max_closed, weight);
                let entries = frontier.entry((edge.target, phase as u32)).or_default();
                if entries
                    .iter()
                    .any(|&(dl, dm, dw, _)| dl <= dk.0 && dm <= dk.1 && dw <= dk.2)
                {
                    return;
                }
                entries.retain(|&(dl, dm, dw, _)| !(dk.0 <= dl && dk.1 <= dm && dk.2 <= dw));
                let idx = arena.len() as u32;
                arena.push(Rec {
                    node: edge.target,
                    phase: phase as u32,
                    load,
                    max_closed,
                    weight,
                    parent: q.idx,
                    via_edge: e,
                });
                entries.push((dk.0, dk.1, dk.2, idx));
                tick += 1;
                heap.push(QEntry {
                    bound: lb,
                    tick,
                    idx,
                });
            };

            // continue in the open phase
            if ctx.layers - l >= ctx.phases - 1 - s.phase as usize {
                push_child(
                    s.phase as usize,
                    s.load + t,
                    s.max_closed,
                    &mut heap,
                    &mut arena,
                    &mut frontier,
                    &mut inc_obj,
                    &mut inc_edges,
                );
            }
            // open the next phase at this layer
            if layer >= 1
                && (s.phase as usize) + 1 <= ctx.phases - 1
                && ctx.layers - l >= ctx.phases - (s.phase as usize) - 2
            {
                push_child(
                    s.phase as usize + 1,
                    t,
                    s.max_closed.max(s.load),
                    &mut heap,
                    &mut arena,
                    &mut frontier,
                    &mut inc_obj,
                    &mut inc_edges,
                );
            }
        }
    }

    if std::env::var("ASM_DEBUG").is_ok() {
        eprintln!("[dbg] pops={pops} heap_empty={} inc={inc_obj:.12} proof={proof_bound:.12} proven={proven}", heap.is_empty());
    }
    if heap.is_empty() && proven {
        proof_bound = inc_obj;
    }
    let proof_bound = proof_bound.min(inc_obj).max(0.0);

    let final_edges = if proven {
        lex_reconstruct(&ctx, inc_obj + OBJECTIVE_TOL)
            .expect("the incumbent itself satisfies the reconstruction target")
    } else {
        inc_edges
    };
    Ok(package_solution(
        &ctx,
        final_edges,
        proof_bound,
        proven,
        pops,
        started,
    ))
}
