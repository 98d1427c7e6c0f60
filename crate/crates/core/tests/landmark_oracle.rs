//! Every extracted landmark passes the brute-force soundness oracle.

mod oracle;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use counterplan::ground::ground;
use counterplan::landmarks::extract_landmarks;
use counterplan::pddl::load_task;
use counterplan::PlanningTask;
use oracle::{is_sound_landmark, random_task, RandomShape};

fn check(task: &PlanningTask, label: &str) -> usize {
    let lms = extract_landmarks(task);
    assert!(!lms.unsolvable, "{label}");
    for l in &task.goal {
        assert!(lms.contains(l.fact), "{label}: goal fact missing");
    }
    for &f in &lms.landmarks {
        let ok = is_sound_landmark(task, f).expect("oracle within cap");
        assert!(ok, "{label}: {} is not a landmark", task.facts.name(f));
    }
    lms.landmarks.len()
}

#[test]
fn random_tasks_have_no_false_landmarks() {
    let mut beyond_goal = 0;
    for seed in 0..50 {
        let task = random_task(seed, RandomShape::SMALL);
        if check(&task, &format!("seed {seed}")) > task.goal.len() {
            beyond_goal += 1;
        }
    }
    assert!(beyond_goal >= 10, "only {beyond_goal} tasks had non-goal landmarks");
}

const BLOCKS: &str = "(define (domain blocks)
  (:requirements :strips)
  (:predicates (on ?x ?y) (ontable ?x) (clear ?x) (handempty) (holding ?x))
  (:action pick-up :parameters (?x)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
  (:action put-down :parameters (?x)
    :precondition (holding ?x)
    :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
  (:action stack :parameters (?x ?y)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
  (:action unstack :parameters (?x ?y)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))";

/// Random towers over three blocks, rendered as init atoms.
fn towers(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut blocks = ["a", "b", "c"];
    blocks.shuffle(rng);
    let cut = [0usize, 1, 2, 3][..].choose(rng).copied().unwrap();
    let mut atoms = Vec::new();
    for tower in [&blocks[..cut], &blocks[cut..]] {
        if let Some((bottom, _)) = tower.split_first() {
            atoms.push(format!("(ontable {bottom})"));
            for w in tower.windows(2) {
                atoms.push(format!("(on {} {})", w[1], w[0]));
            }
            atoms.push(format!("(clear {})", tower.last().unwrap()));
        }
    }
    atoms
}

#[test]
fn three_block_blocksworld() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 10 {
        let init = towers(&mut rng);
        let goal: Vec<String> = towers(&mut rng).into_iter().filter(|a| a.starts_with("(on")).collect();
        if goal.is_empty() || goal.iter().all(|g| init.contains(g)) {
            continue;
        }
        let problem = format!(
            "(define (problem p) (:domain blocks) (:objects a b c) (:init (handempty) {}) (:goal (and {})))",
            init.join(" "),
            goal.join(" ")
        );
        let task = ground(&load_task(BLOCKS, &problem).unwrap()).unwrap();
        check(&task, &problem);
        checked += 1;
    }
}

#[test]
fn unique_achiever_precondition_is_a_landmark() {
    use counterplan::{Action, FactTable, Literal, State};
    use std::sync::Arc;
    let facts = Arc::new(FactTable::from_names(["(s)", "(m)", "(g)"]));
    let f = |n| facts.get(n).unwrap();
    let actions = vec![
        Action::new("(to-m)", vec![f("(s)")], vec![f("(m)")], vec![], 1),
        Action::new("(to-g)", vec![f("(m)")], vec![f("(g)")], vec![], 1),
    ];
    let task = PlanningTask::new(
        facts.clone(),
        Arc::new(actions),
        State::from_facts(3, [f("(s)")]),
        vec![Literal::pos(f("(g)"))],
    );
    let lms = extract_landmarks(&task);
    for name in ["(s)", "(m)", "(g)"] {
        assert!(lms.contains(f(name)), "{name}");
    }
}
