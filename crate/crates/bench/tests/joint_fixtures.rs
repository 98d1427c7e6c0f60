//! Joint-execution properties on the river map, a painted-blocks instance
//! and the contention line.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use counterplan::simulator::{interferes, joint_apply, joint_execute};
use counterplan::strips::{apply, execute};
use counterplan::{Action, Plan, State};
use counterplan_bench::fixture::{river_task, Contention};
use counterplan_bench::generators::{generate, DomainKind, GeneratorConfig};

struct Fixture {
    init: State,
    seek: Vec<Action>,
    prev: Vec<Action>,
}

fn fixtures() -> Vec<Fixture> {
    let river = river_task().task;
    let blocks = generate(&GeneratorConfig {
        blocks: 4,
        word_max: 4,
        ..GeneratorConfig::desk(DomainKind::PaintedBlocksWords, 2)
    })
    .unwrap()
    .loaded
    .task;
    let line = Contention::new();
    vec![
        Fixture { init: river.seek.init.clone(), seek: river.seek.actions.to_vec(), prev: river.prev.actions.to_vec() },
        Fixture {
            init: blocks.seek.init.clone(),
            seek: blocks.seek.actions.to_vec(),
            prev: blocks.prev.actions.to_vec(),
        },
        Fixture { init: line.init.clone(), seek: line.a_actions.clone(), prev: line.b_actions.clone() },
    ]
}

/// Reachable state from a joint random walk, then one action per agent.
/// Walk steps favour applicable actions so the state actually moves.
fn sample(f: &Fixture, walk: &[(usize, usize)], i: usize, j: usize) -> (State, Action, Action) {
    let mut s = f.init.clone();
    for &(x, y) in walk {
        let a: Vec<&Action> = f.seek.iter().filter(|a| a.applicable(&s)).collect();
        let b: Vec<&Action> = f.prev.iter().filter(|a| a.applicable(&s)).collect();
        let noop = Action::noop();
        let a = a.get(x % a.len().max(1)).copied().unwrap_or(&noop);
        let b = b.get(y % b.len().max(1)).copied().unwrap_or(&noop);
        s = joint_apply(&s, a, b);
    }
    (s, f.seek[i % f.seek.len()].clone(), f.prev[j % f.prev.len()].clone())
}

fn check(f: &Fixture, walk: &[(usize, usize)], i: usize, j: usize, extra: usize) -> Result<(), TestCaseError> {
    let (s, a, b) = sample(f, walk, i, j);
    let noop = Action::noop();
    prop_assert_eq!(joint_apply(&s, &a, &noop), apply(&s, &a));
    prop_assert_eq!(joint_apply(&s, &noop, &b), apply(&s, &b));
    prop_assert_eq!(interferes(&a, &b), interferes(&b, &a));
    if !interferes(&a, &b) {
        prop_assert_eq!(joint_apply(&s, &a, &b), joint_apply(&s, &b, &a));
    } else {
        prop_assert_eq!(&joint_apply(&s, &a, &b), &s);
    }
    let p1 = Plan::new(vec![a; 1 + extra]);
    let mut padded = vec![b.clone()];
    padded.extend(std::iter::repeat_n(noop, extra));
    prop_assert_eq!(joint_execute(&s, &p1, &Plan::new(vec![b])), joint_execute(&s, &p1, &Plan::new(padded)));
    prop_assert_eq!(joint_execute(&s, &p1, &Plan::empty()), execute(&s, &p1));
    Ok(())
}

#[test]
fn joint_execution_laws_hold_on_every_fixture() {
    let config = ProptestConfig { cases: 1000, ..ProptestConfig::default() };
    for (k, f) in fixtures().iter().enumerate() {
        let mut runner = proptest::test_runner::TestRunner::new(config.clone());
        let strategy =
            (prop::collection::vec((any::<usize>(), any::<usize>()), 0..15), any::<usize>(), any::<usize>(), 0usize..4);
        runner
            .run(&strategy, |(walk, i, j, extra)| check(f, &walk, i, j, extra))
            .unwrap_or_else(|e| panic!("fixture {k}: {e}"));
    }
}
