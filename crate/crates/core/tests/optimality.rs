mod common;

use common::{brute_force_optimum, instance};
use lacam_core::mc::Sequential;
use lacam_core::metrics::{cost_edge, sum_of_loss};
use lacam_core::search::{ExtractStrategy, UntilDeadline};
use lacam_core::suo::compute_scatter;
use lacam_core::{validate_solution, Instance, SearchParams, SearchState, SearchStatus, Unlimited};

fn tiny_instances() -> Vec<Instance> {
    vec![
        instance(&["...", "...", "..."], &[((0, 0), (2, 2)), ((2, 2), (0, 0))]),
        instance(&["...", "...", "..."], &[((0, 0), (2, 0)), ((2, 0), (0, 0)), ((1, 1), (1, 2))]),
        instance(&["...", ".@.", "..."], &[((0, 0), (2, 2)), ((2, 2), (0, 0)), ((2, 0), (0, 2))]),
        instance(&["....", ".@.@"], &[((0, 0), (3, 0)), ((3, 0), (0, 0))]),
        instance(&["...", "..."], &[((2, 0), (0, 0)), ((0, 0), (1, 1))]),
    ]
}

fn exhaust(inst: &Instance, params: SearchParams, margin: Option<u32>) -> (SearchStatus, Option<u64>) {
    let scatter = margin.map(|m| compute_scatter(inst, m, &Unlimited));
    let mut s = SearchState::new(inst, params, scatter.as_ref());
    let status = s.run(&Sequential, &mut UntilDeadline(&Unlimited));
    if let Some(sol) = s.best_solution() {
        validate_solution(inst, &sol).unwrap();
        let backtracked: u64 = sol.windows(2).map(|w| cost_edge(&w[0], &w[1], inst.goals())).sum();
        assert_eq!(Some(backtracked), s.goal_cost());
        assert_eq!(sum_of_loss(&sol, inst.goals()), backtracked);
    }
    (status, s.goal_cost())
}

#[test]
fn exhausted_search_matches_joint_space_dijkstra() {
    for inst in tiny_instances() {
        let opt = brute_force_optimum(&inst).unwrap();
        for seed in 0..3 {
            let (status, cost) = exhaust(&inst, SearchParams { seed, ..SearchParams::default() }, None);
            assert_eq!(status, SearchStatus::OptimallySolved);
            assert_eq!(cost, Some(opt), "seed {seed}");
        }
    }
}

#[test]
fn enhancements_keep_optimality() {
    for inst in tiny_instances() {
        let opt = brute_force_optimum(&inst).unwrap();
        let variants = [
            SearchParams { mc_samples: 5, ..SearchParams::default() },
            SearchParams { extract_prob: 0.3, ..SearchParams::default() },
            SearchParams {
                extract_prob: 0.3,
                extract_strategy: ExtractStrategy::Restart,
                ..SearchParams::default()
            },
            SearchParams { swap: false, reinsert_init_prob: 0.2, ..SearchParams::default() },
        ];
        for params in variants {
            assert_eq!(exhaust(&inst, params.clone(), None).1, Some(opt), "{params:?}");
        }
        assert_eq!(exhaust(&inst, SearchParams::default(), Some(2)).1, Some(opt));
    }
}

#[test]
fn unsolvable_instance_is_reported() {
    let inst = instance(&["...."], &[((0, 0), (3, 0)), ((3, 0), (0, 0))]);
    assert_eq!(brute_force_optimum(&inst), None);
    assert_eq!(exhaust(&inst, SearchParams::default(), None), (SearchStatus::NoSolution, None));
}

#[test]
fn seeded_runs_are_identical() {
    let inst = instance(
        &[".....", ".@...", "...@.", "....."],
        &[((0, 0), (4, 3)), ((4, 0), (0, 3)), ((2, 1), (2, 3)), ((0, 3), (4, 0))],
    );
    let run = |seed| {
        let mut s = SearchState::new(&inst, SearchParams { seed, ..SearchParams::default() }, None);
        let mut steps = 0;
        while steps < 50 && s.goal_node().is_none() && s.step(&Sequential) {
            steps += 1;
        }
        s.best_solution()
    };
    assert_eq!(run(9), run(9));
}

