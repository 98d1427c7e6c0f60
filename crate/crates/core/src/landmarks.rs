//! Fact landmarks via delete-relaxation tests and first-achiever backchaining.
//!
//! A fact not in the initial state is a landmark when removing all of its
//! achievers makes the goal unreachable in the delete relaxation. From every
//! such landmark we backchain: the preconditions shared by all its possible
//! first achievers must hold before it is first reached, so they are
//! landmarks too. This second step is what finds landmarks that are already
//! true initially but must still be kept true until used.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::strips::{Action, FactId, Literal, PlanningTask, State};

#[derive(Clone, Debug, Default)]
pub struct FactLandmarkSet {
    pub landmarks: BTreeSet<FactId>,
    /// Diagnostic: possible first achievers (action indices) per landmark.
    pub first_achievers: BTreeMap<FactId, Vec<usize>>,
    /// The task's goal is unreachable even under the delete relaxation; only
    /// goal facts are reported.
    pub unsolvable: bool,
}

impl FactLandmarkSet {
    pub fn contains(&self, f: FactId) -> bool {
        self.landmarks.contains(&f)
    }

    /// One landmark per line with its first-achiever count.
    pub fn dump(&self, task: &PlanningTask) -> String {
        let mut out = String::new();
        for f in &self.landmarks {
            let n = self.first_achievers.get(f).map_or(0, Vec::len);
            let _ = writeln!(out, "{} achievers={}", task.facts.name(*f), n);
        }
        out
    }
}

/// Facts reachable from `init` under the delete relaxation, ignoring actions
/// for which `skip` is true.
pub fn relaxed_reachable(n_facts: usize, actions: &[Action], init: &State, skip: impl Fn(usize) -> bool) -> State {
    let mut reached = init.resized(n_facts);
    let mut remaining: Vec<usize> = actions.iter().map(|a| a.pre.len()).collect();
    let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); n_facts];
    for (i, a) in actions.iter().enumerate() {
        for f in &a.pre {
            consumers[f.index()].push(i);
        }
    }
    let mut queue: VecDeque<FactId> = reached.iter().collect();
    let mut fired = vec![false; actions.len()];
    let fire = |i: usize, reached: &mut State, queue: &mut VecDeque<FactId>, fired: &mut Vec<bool>| {
        fired[i] = true;
        for &q in &actions[i].add {
            if !reached.contains(q) {
                reached.insert(q);
                queue.push_back(q);
            }
        }
    };
    for (i, &r) in remaining.iter().enumerate() {
        if r == 0 && !skip(i) {
            fire(i, &mut reached, &mut queue, &mut fired);
        }
    }
    while let Some(f) = queue.pop_front() {
        for &i in &consumers[f.index()] {
            remaining[i] -= 1;
            if remaining[i] == 0 && !fired[i] && !skip(i) {
                fire(i, &mut reached, &mut queue, &mut fired);
            }
        }
    }
    reached
}

/// Positive facts that must hold at the end: positive goal facts plus the
/// twins of negated goal facts.
fn goal_facts(task: &PlanningTask) -> Vec<FactId> {
    let mut twins = BTreeMap::new();
    for id in task.facts.ids() {
        if let Some(base) = task.facts.twin_base(id) {
            twins.insert(base, id);
        }
    }
    let mut out: Vec<FactId> = task
        .goal
        .iter()
        .filter_map(|l: &Literal| if l.positive { Some(l.fact) } else { twins.get(&l.fact).copied() })
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn extract_landmarks(task: &PlanningTask) -> FactLandmarkSet {
    let n = task.n_facts();
    let actions = &task.actions;
    let goals = goal_facts(task);
    let mut result = FactLandmarkSet::default();
    result.landmarks.extend(goals.iter().copied());

    let full = relaxed_reachable(n, actions, &task.init, |_| false);
    let neg_goal_blocked = task
        .goal
        .iter()
        .any(|l| !l.positive && task.init.contains(l.fact) && !actions.iter().any(|a| a.deletes(l.fact)));
    if !goals.iter().all(|g| full.contains(*g)) || neg_goal_blocked {
        result.unsolvable = true;
        return result;
    }

    let mut achievers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, a) in actions.iter().enumerate() {
        for f in &a.add {
            achievers[f.index()].push(i);
        }
    }
    let is_landmark_by_removal = |f: FactId| {
        let ach = &achievers[f.index()];
        let r = relaxed_reachable(n, actions, &task.init, |i| ach.binary_search(&i).is_ok());
        !goals.iter().all(|g| r.contains(*g))
    };
    for f in task.facts.ids() {
        if !task.init.contains(f) && full.contains(f) && !result.landmarks.contains(&f) && is_landmark_by_removal(f) {
            result.landmarks.insert(f);
        }
    }

    let mut queue: VecDeque<FactId> = result.landmarks.iter().copied().collect();
    while let Some(l) = queue.pop_front() {
        if task.init.contains(l) {
            continue;
        }
        let ach = &achievers[l.index()];
        let before = relaxed_reachable(n, actions, &task.init, |i| ach.binary_search(&i).is_ok());
        let first: Vec<usize> =
            ach.iter().copied().filter(|&i| actions[i].pre.iter().all(|p| before.contains(*p))).collect();
        let mut shared: Option<BTreeSet<FactId>> = None;
        for &i in &first {
            let pre: BTreeSet<FactId> = actions[i].pre.iter().copied().collect();
            shared = Some(match shared {
                None => pre,
                Some(s) => s.intersection(&pre).copied().collect(),
            });
        }
        result.first_achievers.insert(l, first);
        for c in shared.unwrap_or_default() {
            if result.landmarks.insert(c) {
                queue.push_back(c);
            }
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::FactTable;
    use std::sync::Arc;

    fn task(names: &[&str], actions: Vec<Action>, init: &[u32], goal: &[u32]) -> PlanningTask {
        let facts = FactTable::from_names(names.iter().copied());
        let n = facts.len();
        PlanningTask::new(
            Arc::new(facts),
            Arc::new(actions),
            State::from_facts(n, init.iter().map(|&i| FactId(i))),
            goal.iter().map(|&i| Literal::pos(FactId(i))).collect(),
        )
    }

    #[test]
    fn unique_achiever_backchaining() {
        // g needs m; m needs nothing but is not initially true.
        let acts = vec![
            Action::new("(make-m)", vec![], vec![FactId(1)], vec![], 1),
            Action::new("(make-g)", vec![FactId(1)], vec![FactId(0)], vec![], 1),
        ];
        let t = task(&["(g)", "(m)"], acts, &[], &[0]);
        let lm = extract_landmarks(&t);
        assert!(lm.contains(FactId(0)) && lm.contains(FactId(1)));
        assert!(!lm.unsolvable);
    }

    #[test]
    fn disjunctive_options_are_not_landmarks() {
        let acts = vec![
            Action::new("(via-a)", vec![FactId(1)], vec![FactId(0)], vec![], 1),
            Action::new("(via-b)", vec![FactId(2)], vec![FactId(0)], vec![], 1),
        ];
        let t = task(&["(g)", "(a)", "(b)"], acts, &[1, 2], &[0]);
        let lm = extract_landmarks(&t);
        assert_eq!(lm.landmarks.iter().copied().collect::<Vec<_>>(), vec![FactId(0)]);
    }

    #[test]
    fn required_initial_fact_is_kept() {
        let acts = vec![Action::new("(use)", vec![FactId(1)], vec![FactId(0)], vec![FactId(1)], 1)];
        let t = task(&["(g)", "(key)"], acts, &[1], &[0]);
        let lm = extract_landmarks(&t);
        assert!(lm.contains(FactId(1)));
        assert_eq!(lm.first_achievers[&FactId(0)], vec![0]);
    }

    #[test]
    fn unsolvable_reports_goals_only() {
        let t = task(&["(g)", "(x)"], vec![], &[1], &[0]);
        let lm = extract_landmarks(&t);
        assert!(lm.unsolvable);
        assert_eq!(lm.landmarks.len(), 1);
    }
}
