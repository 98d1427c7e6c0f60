//! Algebraic properties of joint execution on random seeker/preventer pairs.

mod oracle;

use proptest::prelude::*;

use counterplan::simulator::{interferes, joint_apply, joint_execute};
use counterplan::strips::apply;
use counterplan::{Action, Plan, State};
use oracle::{random_counterplanning, RandomShape};

/// A state reached by a random walk, plus one seeker and one preventer action.
fn sample(seed: u64, walk: Vec<usize>, i: usize, j: usize) -> (State, Action, Action) {
    let c = random_counterplanning(seed % 8, RandomShape::SMALL);
    let all: Vec<&Action> = c.seek.actions.iter().chain(c.prev.actions.iter()).collect();
    let s = walk.iter().fold(c.seek.init.clone(), |s, &k| apply(&s, all[k % all.len()]));
    let a = c.seek.actions[i % c.seek.actions.len()].clone();
    let b = c.prev.actions[j % c.prev.actions.len()].clone();
    (s, a, b)
}

fn inputs() -> impl Strategy<Value = (u64, Vec<usize>, usize, usize)> {
    (any::<u64>(), prop::collection::vec(any::<usize>(), 0..12), any::<usize>(), any::<usize>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn noop_is_identity((seed, walk, i, j) in inputs()) {
        let (s, a, b) = sample(seed, walk, i, j);
        let noop = Action::noop();
        prop_assert_eq!(joint_apply(&s, &a, &noop), apply(&s, &a));
        prop_assert_eq!(joint_apply(&s, &noop, &b), apply(&s, &b));
        prop_assert_eq!(joint_apply(&s, &noop, &noop), s);
    }

    #[test]
    fn interference_is_symmetric((seed, walk, i, j) in inputs()) {
        let (_, a, b) = sample(seed, walk, i, j);
        prop_assert_eq!(interferes(&a, &b), interferes(&b, &a));
    }

    #[test]
    fn non_interfering_actions_commute((seed, walk, i, j) in inputs()) {
        let (s, a, b) = sample(seed, walk, i, j);
        if interferes(&a, &b) {
            prop_assert_eq!(joint_apply(&s, &a, &b), s);
        } else {
            prop_assert_eq!(joint_apply(&s, &a, &b), joint_apply(&s, &b, &a));
            // Applicable and non-interfering: same as applying one after the other.
            if a.applicable(&s) && b.applicable(&s) {
                prop_assert_eq!(joint_apply(&s, &a, &b), apply(&apply(&s, &a), &b));
            }
        }
    }

    #[test]
    fn shorter_plan_is_padded_with_noops((seed, walk, i, j) in inputs(), extra in 0usize..4) {
        let (s, a, b) = sample(seed, walk, i, j);
        let p1 = Plan::new(vec![a.clone(); 1 + extra]);
        let p2 = Plan::new(vec![b.clone()]);
        let mut padded = vec![b];
        padded.extend(std::iter::repeat_n(Action::noop(), extra));
        prop_assert_eq!(joint_execute(&s, &p1, &p2), joint_execute(&s, &p1, &Plan::new(padded)));
        prop_assert_eq!(joint_execute(&s, &p1, &Plan::empty()), counterplan::strips::execute(&s, &p1));
        prop_assert_eq!(joint_execute(&s, &Plan::empty(), &Plan::empty()), s);
    }
}
