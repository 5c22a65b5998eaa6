//! Shared fixtures for the integration tests: seeded random assemblies.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use asmline_core::model::{Joint, Part, PartGraph};

/// Random connected assembly with exactly `joints` joints: a random
/// spanning tree plus random extra edges (parallel joints are legal).
pub fn random_assembly(rng: &mut ChaCha8Rng, joints: usize) -> PartGraph {
    let max_parts = joints + 1;
    let n_parts = rng.gen_range(3.min(max_parts)..=max_parts);
    let parts: Vec<Part> = (0..n_parts)
        .map(|i| Part {
            id: format!("p{i:02}").as_str().into(),
            name: format!("part {i}"),
            mass_kg: rng.gen_range(0.1..50.0),
            handling: rng.gen_range(1..=3),
        })
        .collect();
    let techs = ["MAG", "MAG2", "TIG"];
    let mut joint_list: Vec<Joint> = Vec::with_capacity(joints);
    let mut add = |a: usize, b: usize, idx: usize, rng: &mut ChaCha8Rng| {
        joint_list.push(Joint {
            id: format!("j{idx:02}").as_str().into(),
            part_a: format!("p{a:02}").as_str().into(),
            part_b: format!("p{b:02}").as_str().into(),
            time: rng.gen_range(1.0..=10.0),
            tolerance: rng.gen_range(1..=10),
            technology: techs[rng.gen_range(0..techs.len())].to_owned(),
        });
    };
    // spanning tree
    for i in 1..n_parts {
        let parent = rng.gen_range(0..i);
        add(parent, i, i - 1, rng);
    }
    // extra edges up to the joint budget
    for idx in (n_parts - 1)..joints {
        let a = rng.gen_range(0..n_parts);
        let mut b = rng.gen_range(0..n_parts);
        while b == a {
            b = rng.gen_range(0..n_parts);
        }
        add(a, b, idx, rng);
    }
    PartGraph::new(parts, joint_list).expect("random assembly is structurally valid")
}
