//! Optimal planning against uniform-cost search and exhaustive enumeration.

mod oracle;

use std::collections::BTreeSet;

use counterplan::planner::{enumerate_optimal_plans, solve_optimal, Budget, Planner, SearchStatus};
use counterplan::strips::execute_strict;
use oracle::{optimal_plans, random_task, ucs, RandomShape, StateGraph};

const WEIGHTED: RandomShape = RandomShape { facts: 9, actions: 14, max_cost: 3 };

#[test]
fn optimal_cost_matches_uniform_cost_search() {
    for seed in 0..100 {
        let task = random_task(seed, WEIGHTED);
        let r = solve_optimal(&task, &Budget::default());
        assert_eq!(r.status, SearchStatus::Solved, "seed {seed}");
        assert_eq!(r.cost, ucs(&task.actions, &task.init, &task.goal), "seed {seed}");
        let plan = r.plan.unwrap();
        let end = execute_strict(&task.init, &plan).expect("plan applicable");
        assert!(task.goal_reached(&end), "seed {seed}");
        assert_eq!(Some(plan.cost()), r.cost);
    }
}

#[test]
fn enumeration_equals_oracle_set() {
    for seed in 0..60 {
        let task = random_task(seed, RandomShape::SMALL);
        let Some(expected) = optimal_plans(&task.actions, &task.init, &task.goal, 50_000) else {
            continue;
        };
        let expected: BTreeSet<Vec<String>> =
            expected.iter().map(|p| p.iter().map(|&a| task.actions[a].name.clone()).collect()).collect();
        let got = enumerate_optimal_plans(&task, 50_000, &Budget::default()).unwrap();
        assert!(got.complete, "seed {seed}");
        let got: BTreeSet<Vec<String>> = got.plans.iter().map(|p| p.names()).collect();
        assert_eq!(got, expected, "seed {seed}");
    }
}

#[test]
fn hmax_never_exceeds_true_distance() {
    for seed in 0..30 {
        let task = random_task(seed, WEIGHTED);
        let graph = StateGraph::build(&task.actions, &task.init);
        let dist = graph.goal_distance(&task.actions, &task.goal);
        let planner = Planner::for_task(&task, Budget::default());
        for (s, d) in graph.states.iter().zip(&dist) {
            match (planner.h_max(s, &task.goal), d) {
                (Some(h), Some(d)) => assert!(h <= *d, "seed {seed}: h {h} > h* {d}"),
                (None, Some(_)) => panic!("seed {seed}: h_max dead end on a solvable state"),
                _ => {}
            }
        }
    }
}

#[test]
fn node_budget_reports_resource_limit() {
    let task = random_task(3, WEIGHTED);
    let r = solve_optimal(&task, &Budget::nodes(0));
    assert_eq!(r.status, SearchStatus::ResourceLimit);
    assert!(r.plan.is_none());
}
