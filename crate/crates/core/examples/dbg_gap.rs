// debug: find the failing instance
use std::collections::BTreeMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use asmline_core::balance::{brute_force_balance, solve_balance, BalanceProblem};
use asmline_core::digraph::{generate_digraph, GenerateOptions, WeightConfig};
use asmline_core::model::{normalize_attributes, JointId, Joint, Part, PartGraph};

fn random_assembly(rng: &mut ChaCha8Rng, joints: usize) -> PartGraph {
    let max_parts = joints + 1;
    let n_parts = rng.gen_range(3.min(max_parts)..=max_parts);
    let parts: Vec<Part> = (0..n_parts).map(|i| Part { id: format!("p{i:02}").as_str().into(), name: format!("part {i}"), mass_kg: rng.gen_range(0.1..50.0), handling: rng.gen_range(1..=3) }).collect();
    let techs = ["MAG", "MAG2", "TIG"];
    let mut joint_list: Vec<Joint> = Vec::new();
    let mut add = |a: usize, b: usize, idx: usize, rng: &mut ChaCha8Rng| {
        joint_list.push(Joint { id: format!("j{idx:02}").as_str().into(), part_a: format!("p{a:02}").as_str().into(), part_b: format!("p{b:02}").as_str().into(), time: rng.gen_range(1.0..=10.0), tolerance: rng.gen_range(1..=10), technology: techs[rng.gen_range(0..techs.len())].to_owned() });
    };
    for i in 1..n_parts { let parent = rng.gen_range(0..i); add(parent, i, i - 1, rng); }
    for idx in (n_parts - 1)..joints { let a = rng.gen_range(0..n_parts); let mut b = rng.gen_range(0..n_parts); while b == a { b = rng.gen_range(0..n_parts); } add(a, b, idx, rng); }
    PartGraph::new(parts, joint_list).unwrap()
}

fn times_of(g: &PartGraph) -> BTreeMap<JointId, f64> { g.joints().iter().map(|j| (j.id.clone(), j.time)).collect() }

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..25 {
        let joints = rng.gen_range(3..=6);
        let g = random_assembly(&mut rng, joints);
        let norm = normalize_attributes(&g);
        let d = generate_digraph(&g, &norm, &WeightConfig::uniform(), None, &GenerateOptions::default()).unwrap();
        let exact = BalanceProblem::new(&d, times_of(&g), 2, 0.5, 1.0, 0.0).unwrap();
        let relaxed = BalanceProblem::new(&d, times_of(&g), 2, 0.5, 1.0, 0.03).unwrap();
        let s0 = solve_balance(&exact).unwrap();
        let s3 = solve_balance(&relaxed).unwrap();
        let oracle = brute_force_balance(&exact).unwrap();
        if s3.bound > s0.objective + 1e-9 {
            println!("case {case}: s0.obj={:.12} oracle={:.12} s3.obj={:.12} s3.bound={:.12} s3.gap={}", s0.objective, oracle.objective, s3.objective, s3.bound, s3.gap);
        }
    }
    println!("done");
}
