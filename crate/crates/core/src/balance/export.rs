//! Instance export in LP plain text for cross-checking against third-party
//! solvers, and the structured solution document.

use serde::{Deserialize, Serialize};

use super::{BalanceProblem, Solution};
use crate::model::{PartGraph, PartId};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Render the mixed-integer formulation of `p` as LP text: path selection
/// (`x`), layer-to-phase assignment (`y`), operation-to-phase linking
/// (`z`), and the bottleneck variable `alpha`.
pub fn instance_lp(p: &BalanceProblem<'_>) -> String {
    let d = p.digraph;
    let layers = d.layer_count();
    let phases = p.phases;
    let times = p
        .times_by_index()
        .expect("validated problem has complete times");
    let mut out = String::new();
    out.push_str("\\ assembly sequence and line balancing instance\n");
    out.push_str(&format!(
        "\\ layers={} phases={} lambda={} c={}\n",
        layers, phases, p.lambda, p.c
    ));
    out.push_str("Minimize\n obj:");
    let mut terms: Vec<String> = Vec::new();
    for (i, e) in d.edges().iter().enumerate() {
        let coeff = (1.0 - p.lambda) * e.weight;
        if coeff != 0.0 {
            terms.push(format!("{coeff} x_e{i}"));
        }
    }
    let alpha_coeff = p.lambda * p.c;
    terms.push(format!("{alpha_coeff} alpha"));
    out.push_str(&format!(" {}\n", terms.join(" + ")));
    out.push_str("Subject To\n");

    // exactly one departure from the start and one arrival at the end
    let xsum = |edges: &[u32]| -> String {
        edges
            .iter()
            .map(|&e| format!("x_e{e}"))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    out.push_str(&format!(
        " start_flow: {} = 1\n",
        xsum(d.out_edges(d.start()))
    ));
    out.push_str(&format!(" end_flow: {} = 1\n", xsum(d.in_edges(d.end()))));
    // flow conservation elsewhere
    for n in 0..d.nodes().len() as u32 {
        if n == d.start() || n == d.end() {
            continue;
        }
        let ins = d
            .in_edges(n)
            .iter()
            .map(|&e| format!("x_e{e}"))
            .collect::<Vec<_>>()
            .join(" + ");
        let outs = d
            .out_edges(n)
            .iter()
            .map(|&e| format!("- x_e{e}"))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(" flow_v{n}: {ins} {outs} = 0\n"));
    }
    // each layer gets exactly one phase (0-based layers here)
    for l in 0..layers {
        let ys = (0..phases)
            .map(|q| format!("y_l{l}_p{q}"))
            .collect::<Vec<_>>()
            .join(" + ");
        out.push_str(&format!(" layer_assign_l{l}: {ys} = 1\n"));
    }
    // phases ascend contiguously
    for l in 1..layers {
        out.push_str(&format!(
            " phase_first_l{l}: y_l{l}_p0 - y_l{}_p0 <= 0\n",
            l - 1
        ));
        for q in 1..phases {
            out.push_str(&format!(
                " phase_step_l{l}_p{q}: y_l{l}_p{q} - y_l{}_p{} - y_l{}_p{q} <= 0\n",
                l - 1,
                q - 1,
                l - 1
            ));
        }
    }
    // each operation lands in exactly one phase
    for id in d.joint_ids() {
        let name = sanitize(id.as_str());
        let zs = (0..phases)
            .map(|q| format!("z_{name}_p{q}"))
            .collect::<Vec<_>>()
            .join(" + ");
        out.push_str(&format!(" op_assign_{name}: {zs} = 1\n"));
    }
    // link x, y, z: choosing edge e in a layer assigned to phase q forces
    // the edge's operation into phase q
    for (i, e) in d.edges().iter().enumerate() {
        let name = sanitize(d.op_id(e).as_str());
        let l = e.layer as usize - 1; // 0-based layer for y
        for q in 0..phases {
            out.push_str(&format!(
                " link_e{i}_p{q}: z_{name}_p{q} - x_e{i} - y_l{l}_p{q} >= -1\n"
            ));
        }
    }
    // alpha dominates every phase load
    for q in 0..phases {
        let loads = d
            .joint_ids()
            .iter()
            .enumerate()
            .map(|(oi, id)| format!("- {} z_{}_p{q}", times[oi], sanitize(id.as_str())))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(" load_p{q}: alpha {loads} >= 0\n"));
    }

    out.push_str("Bounds\n alpha >= 0\n");
    out.push_str("Binaries\n");
    let mut bins: Vec<String> = Vec::new();
    for i in 0..d.edges().len() {
        bins.push(format!("x_e{i}"));
    }
    for l in 0..layers {
        for q in 0..phases {
            bins.push(format!("y_l{l}_p{q}"));
        }
    }
    for id in d.joint_ids() {
        for q in 0..phases {
            bins.push(format!("z_{}_p{q}", sanitize(id.as_str())));
        }
    }
    out.push_str(&format!(" {}\nEnd\n", bins.join(" ")));
    out
}

/// One operation of a solved sequence with its engineering attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationRow {
    pub joint: String,
    /// 1-based layer.
    pub layer: usize,
    pub phase: usize,
    pub technology: String,
    pub tolerance: i64,
    /// Handling level of the moved part (the larger endpoint for the first
    /// joint, 0 when no part is moved).
    pub handling: i64,
    pub time: f64,
}

/// Structured export of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub operations: Vec<OperationRow>,
    pub phase_loads: Vec<f64>,
    pub alpha: f64,
    pub weight_sum: f64,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub proven: bool,
    pub wall_time_s: f64,
}

impl SolutionDoc {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution doc serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Attach the assembly's attributes to a solution, resolving the moved part
/// of every operation by replaying the sequence.
pub fn solution_document(s: &Solution, g: &PartGraph) -> SolutionDoc {
    let mut assembled: std::collections::BTreeSet<PartId> = std::collections::BTreeSet::new();
    let operations = s
        .operations
        .iter()
        .enumerate()
        .map(|(i, op)| {
            let joint = g.joint(op).expect("solution joints exist in the assembly");
            let a_new = !assembled.contains(&joint.part_a);
            let b_new = !assembled.contains(&joint.part_b);
            let handling = |p: &PartId| g.part(p).map(|p| p.handling).unwrap_or(0);
            let moved_handling = match (a_new, b_new) {
                (true, true) => handling(&joint.part_a).max(handling(&joint.part_b)),
                (true, false) => handling(&joint.part_a),
                (false, true) => handling(&joint.part_b),
                (false, false) => 0,
            };
            assembled.insert(joint.part_a.clone());
            assembled.insert(joint.part_b.clone());
            OperationRow {
                joint: op.0.clone(),
                layer: i + 1,
                phase: s.layer_phase[i],
                technology: joint.technology.clone(),
                tolerance: joint.tolerance,
                handling: moved_handling,
                time: joint.time,
            }
        })
        .collect();
    SolutionDoc {
        operations,
        phase_loads: s.phase_loads.clone(),
        alpha: s.alpha,
        weight_sum: s.weight_sum,
        objective: s.objective,
        bound: s.bound,
        gap: s.gap,
        proven: s.proven,
        wall_time_s: s.wall_time_s,
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{solve_balance, BalanceProblem};
    use super::*;

    #[test]
    fn lp_text_covers_all_constraint_families() {
        let g = triangle_graph([3.0, 5.0, 8.0]);
        let d = digraph_for(&g);
        let p = BalanceProblem::new(&d, times_of(&g), 2, 0.5, 1.0, 0.0).unwrap();
        let lp = instance_lp(&p);
        assert!(lp.contains("Minimize"));
        assert!(lp.contains("start_flow:"));
        assert!(lp.contains("end_flow:"));
        assert!(lp.contains("flow_v"));
        assert!(lp.contains("layer_assign_l0:"));
        assert!(lp.contains("phase_first_l1:"));
        assert!(lp.contains("phase_step_l1_p1:"));
        assert!(lp.contains("op_assign_j1:"));
        assert!(lp.contains("link_e0_p0:"));
        assert!(lp.contains("load_p0:"));
        assert!(lp.contains("Binaries"));
        assert!(lp.ends_with("End\n"));
        // one linking row per edge and phase
        let links = lp.matches(" link_e").count();
        assert_eq!(links, d.edges().len() * 2);
    }

    #[test]
    fn solution_document_round_trips_and_carries_attributes() {
        let g = triangle_graph([3.0, 5.0, 8.0]);
        let d = digraph_for(&g);
        let p = BalanceProblem::new(&d, times_of(&g), 2, 1.0, 1.0, 0.0).unwrap();
        let s = solve_balance(&p).unwrap();
        let doc = solution_document(&s, &g);
        assert_eq!(doc.operations.len(), 3);
        assert_eq!(doc.operations[0].layer, 1);
        let sum: f64 = doc.phase_loads.iter().sum();
        assert!((sum - 16.0).abs() < 1e-9);
        let back = SolutionDoc::from_json(&doc.to_json()).unwrap();
        assert_eq!(doc, back);
    }
}
