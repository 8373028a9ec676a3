//! Seeded random suite checked against exhaustive enumeration.

mod common;

use common::{brute_force_optimum, recount, suite_case, Restrict, SUITE_SEEDS};
use irsplan_core::heuristics::{self, RefineOptions};
use irsplan_core::milp::{self, BuildOptions, LpStatus, NoLimit};
use irsplan_core::SolveStatus;

const TOL: f64 = 1e-6;

#[test]
fn branch_and_bound_matches_enumeration() {
    for seed in 0..SUITE_SEEDS {
        let case = suite_case(seed);
        let bb = heuristics::exact(&case.instance, &NoLimit).unwrap();
        match brute_force_optimum(&case, Restrict::None) {
            Some(opt) => {
                assert!(
                    matches!(bb.solution.status, SolveStatus::Optimal | SolveStatus::Trivial),
                    "seed {seed}: status {:?}",
                    bb.solution.status
                );
                assert!((bb.solution.cost.total - opt).abs() <= TOL, "seed {seed}: bb {} vs {opt}", bb.solution.cost.total);
                assert!(recount(&case, &bb.solution.placements) >= case.instance.required_count());
            }
            None => assert_eq!(bb.solution.status, SolveStatus::Infeasible, "seed {seed}"),
        }
    }
}

#[test]
fn baselines_match_restricted_enumeration_and_dominate() {
    for seed in 0..SUITE_SEEDS {
        let case = suite_case(seed);
        let bb = heuristics::exact(&case.instance, &NoLimit).unwrap();
        let runs = [
            (Restrict::FixedState, heuristics::fixed_state_baseline(&case.instance, &NoLimit).unwrap()),
            (Restrict::MaxTile, heuristics::max_tile_baseline(&case.instance, &NoLimit).unwrap()),
        ];
        for (restrict, r) in runs {
            let opt = brute_force_optimum(&case, restrict);
            match opt {
                Some(opt) => {
                    assert!((r.solution.cost.total - opt).abs() <= TOL, "seed {seed}");
                    assert!(r.solution.cost.total >= bb.solution.cost.total - TOL, "seed {seed}");
                }
                None => assert_eq!(r.solution.status, SolveStatus::Infeasible, "seed {seed}"),
            }
        }
    }
}

#[test]
fn lp_relaxation_bounds_the_optimum() {
    for seed in 0..SUITE_SEEDS {
        let case = suite_case(seed);
        let model = milp::build_p1(&case.instance, &BuildOptions::default()).unwrap();
        let lp = milp::lp_solve(&model);
        if let Some(opt) = brute_force_optimum(&case, Restrict::None) {
            assert_eq!(lp.status, LpStatus::Optimal, "seed {seed}");
            assert!(lp.objective <= opt + 1e-7, "seed {seed}: lp {} > {opt}", lp.objective);
        }
    }
}

#[test]
fn refinement_is_sound() {
    for seed in 0..SUITE_SEEDS {
        let case = suite_case(seed);
        let inst = &case.instance;
        let r = heuristics::successive_refinement(inst, &RefineOptions::default(), &NoLimit).unwrap();
        let opt = brute_force_optimum(&case, Restrict::None);
        match opt {
            Some(opt) => {
                assert!(
                    matches!(r.solution.status, SolveStatus::Feasible | SolveStatus::Trivial),
                    "seed {seed}: {:?}",
                    r.solution.status
                );
                assert!(r.solution.cost.total >= opt - TOL, "seed {seed}");
                assert!(recount(&case, &r.solution.placements) >= inst.required_count(), "seed {seed}");
            }
            None => assert_eq!(r.solution.status, SolveStatus::Infeasible, "seed {seed}"),
        }
    }
}

#[test]
fn refinement_steps_never_raise_cost() {
    let search = heuristics::TileSearch::Binary;
    for seed in 0..SUITE_SEEDS {
        let case = suite_case(seed);
        let inst = &case.instance;
        let step1 = heuristics::step1_lp_subset(inst, heuristics::DEFAULT_LP_THRESHOLD).unwrap();
        let seq = heuristics::sequential_deploy(inst, &step1.pool, &[], search);
        if seq.solution.covered < inst.required_count() {
            continue;
        }
        let pool: Vec<u32> = seq.solution.placements.iter().map(|p| p.site_id).collect();
        let (sol2, pool2, swaps) = heuristics::step2_swap_refine(inst, seq.solution.clone(), pool, search);
        assert!(sol2.cost.total <= seq.solution.cost.total, "seed {seed}");
        let mut last = seq.solution.cost.total;
        for s in &swaps {
            assert!(s.cost < last, "seed {seed}");
            last = s.cost;
        }
        let (sol3, _, _) = heuristics::step3_final_ilp(inst, &sol2, &pool2, &NoLimit).unwrap();
        assert!(sol3.cost.total <= sol2.cost.total, "seed {seed}");
        assert!(recount(&case, &sol3.placements) >= inst.required_count(), "seed {seed}");
    }
}

#[test]
fn sequential_coverage_never_drops() {
    for seed in 0..SUITE_SEEDS {
        let case = suite_case(seed);
        let inst = &case.instance;
        let pool: Vec<u32> = inst.sites().iter().map(|s| s.id).collect();
        let r = heuristics::sequential_deploy(inst, &pool, &[], heuristics::TileSearch::Binary);
        assert!(r.trace.len() <= pool.len());
        let mut placed = Vec::new();
        let mut last = inst.count_covered(inst.beta());
        for step in &r.trace {
            placed.push(step.choice.placement());
            let now = recount(&case, &placed);
            assert!(now >= last, "seed {seed}");
            last = now;
        }
        assert_eq!(last, r.solution.covered);
    }
}

#[test]
fn warm_start_does_not_change_the_optimum() {
    for seed in 0..SUITE_SEEDS {
        let case = suite_case(seed);
        let inst = &case.instance;
        let model = milp::build_p1(inst, &BuildOptions::default()).unwrap();
        let cold = milp::branch_and_bound(&model, inst, None, &NoLimit);
        let r = heuristics::successive_refinement(inst, &RefineOptions::default(), &NoLimit).unwrap();
        let warm = milp::branch_and_bound(&model, inst, Some(&r.solution), &NoLimit);
        assert!((cold.solution.cost.total - warm.solution.cost.total).abs() <= TOL, "seed {seed}");
        assert!(warm.nodes <= cold.nodes, "seed {seed}");
    }
}
