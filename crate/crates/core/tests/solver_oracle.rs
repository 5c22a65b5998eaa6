//! Randomized equivalence between the branch-and-bound solver and the
//! exhaustive oracle, plus gap soundness and the λ reductions.

mod common;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use asmline_core::balance::{
    brute_force_balance, solve_balance, BalanceProblem, OBJECTIVE_TOL,
};
use asmline_core::digraph::{generate_digraph, GenerateOptions, WeightConfig};
use asmline_core::model::{normalize_attributes, JointId};
use asmline_core::reduce::k_shortest_paths;
use common::random_assembly;

fn times_of(g: &asmline_core::model::PartGraph) -> BTreeMap<JointId, f64> {
    g.joints().iter().map(|j| (j.id.clone(), j.time)).collect()
}

#[test]
fn solver_matches_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA55E);
    for case in 0..60 {
        let joints = rng.gen_range(3..=6);
        let g = random_assembly(&mut rng, joints);
        let norm = normalize_attributes(&g);
        let d = generate_digraph(
            &g,
            &norm,
            &WeightConfig::uniform(),
            None,
            &GenerateOptions::default(),
        )
        .unwrap();
        for phases in [1usize, 2, 3] {
            if phases > d.layer_count() {
                continue;
            }
            for lambda in [0.0, 0.5, 1.0] {
                let p =
                    BalanceProblem::new(&d, times_of(&g), phases, lambda, 1.0, 0.0).unwrap();
                let solved = solve_balance(&p).unwrap();
                let oracle = brute_force_balance(&p).unwrap();
                solved.check(&p).unwrap_or_else(|e| {
                    panic!("case {case} P={phases} λ={lambda}: invalid solution: {e}")
                });
                assert!(
                    (solved.objective - oracle.objective).abs() <= OBJECTIVE_TOL,
                    "case {case} P={phases} λ={lambda}: solver {} vs oracle {}",
                    solved.objective,
                    oracle.objective
                );
                assert!(solved.proven);
                assert!(solved.bound <= oracle.objective + OBJECTIVE_TOL, "bound sound");
                // identical tie-breaking: the sequences agree, not just values
                assert_eq!(
                    solved.operations, oracle.operations,
                    "case {case} P={phases} λ={lambda}: lex tie-break differs"
                );
            }
        }
    }
}

#[test]
fn lambda_one_never_beats_the_load_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let joints = rng.gen_range(3..=6);
        let g = random_assembly(&mut rng, joints);
        let norm = normalize_attributes(&g);
        let d = generate_digraph(
            &g,
            &norm,
            &WeightConfig::uniform(),
            None,
            &GenerateOptions::default(),
        )
        .unwrap();
        let times = times_of(&g);
        let total: f64 = times.values().sum();
        let max_t = times.values().cloned().fold(0.0, f64::max);
        for phases in [2usize, 3] {
            if phases > d.layer_count() {
                continue;
            }
            let p = BalanceProblem::new(&d, times.clone(), phases, 1.0, 1.0, 0.0).unwrap();
            let s = solve_balance(&p).unwrap();
            let floor = max_t.max(total / phases as f64);
            assert!(
                s.alpha >= floor - OBJECTIVE_TOL,
                "α {} below floor {floor}",
                s.alpha
            );
        }
    }
}

#[test]
fn lambda_zero_matches_k_shortest_first_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..20 {
        let joints = rng.gen_range(3..=6);
        let g = random_assembly(&mut rng, joints);
        let norm = normalize_attributes(&g);
        let d = generate_digraph(
            &g,
            &norm,
            &WeightConfig::uniform(),
            None,
            &GenerateOptions::default(),
        )
        .unwrap();
        let p = BalanceProblem::new(&d, times_of(&g), 2, 0.0, 1.0, 0.0).unwrap();
        let s = solve_balance(&p).unwrap();
        let shortest = k_shortest_paths(&d, 1).unwrap();
        assert!((s.objective - shortest[0].total_weight).abs() <= OBJECTIVE_TOL);
    }
}

#[test]
fn relaxed_gap_stays_within_its_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..25 {
        let joints = rng.gen_range(3..=6);
        let g = random_assembly(&mut rng, joints);
        let norm = normalize_attributes(&g);
        let d = generate_digraph(
            &g,
            &norm,
            &WeightConfig::uniform(),
            None,
            &GenerateOptions::default(),
        )
        .unwrap();
        let exact = BalanceProblem::new(&d, times_of(&g), 2, 0.5, 1.0, 0.0).unwrap();
        let relaxed = BalanceProblem::new(&d, times_of(&g), 2, 0.5, 1.0, 0.03).unwrap();
        let s0 = solve_balance(&exact).unwrap();
        let s3 = solve_balance(&relaxed).unwrap();
        assert!(
            s3.objective <= 1.03 * s0.objective + OBJECTIVE_TOL,
            "gap 3%: {} vs {}",
            s3.objective,
            s0.objective
        );
        assert!(s3.gap <= 0.03 + 1e-12);
        assert!(s3.bound <= s0.objective + OBJECTIVE_TOL);
    }
}
