//! Weighted average goal cost and centroid-directed action selection.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use log::warn;

use crate::error::{Error, Result};
use crate::par::{par_map, Execution};
use crate::planner::Planner;
use crate::strips::{apply, Action, Literal, State};

/// Goals with positive weights; duplicate goals are merged by summing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedGoalSet {
    pub entries: Vec<(Vec<Literal>, f64)>,
}

impl WeightedGoalSet {
    pub fn new(items: impl IntoIterator<Item = (Vec<Literal>, f64)>) -> Result<Self> {
        let mut entries: Vec<(Vec<Literal>, f64)> = Vec::new();
        let mut at: HashMap<Vec<Literal>, usize> = HashMap::new();
        for (mut goal, w) in items {
            if w.is_nan() || w <= 0.0 {
                return Err(Error::Invalid(format!("goal weight must be positive, got {w}")));
            }
            goal.sort();
            goal.dedup();
            match at.get(&goal) {
                Some(&i) => entries[i].1 += w,
                None => {
                    at.insert(goal.clone(), entries.len());
                    entries.push((goal, w));
                }
            }
        }
        Ok(WeightedGoalSet { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMode {
    /// h_max estimates.
    #[default]
    Estimated,
    /// Optimal costs from the planner.
    Exact,
}

/// Weighted average cost of a state plus the weight of the goals it cannot
/// reach at all.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentroidScore {
    pub unreachable_weight: f64,
    pub avg: f64,
}

const TOL: f64 = 1e-12;

impl CentroidScore {
    /// Fewer unreachable goals first, then lower average cost.
    pub fn better_than(&self, other: &CentroidScore) -> bool {
        if (self.unreachable_weight - other.unreachable_weight).abs() > TOL {
            return self.unreachable_weight < other.unreachable_weight;
        }
        self.avg < other.avg - TOL
    }
}

fn goal_cost(planner: &Planner, s: &State, goal: &[Literal], mode: CostMode) -> Result<Option<u64>> {
    match mode {
        CostMode::Estimated => Ok(planner.h_max(s, goal)),
        CostMode::Exact => planner.optimal_cost(s, goal),
    }
}

pub fn score(planner: &Planner, s: &State, goals: &WeightedGoalSet, mode: CostMode) -> Result<CentroidScore> {
    if goals.is_empty() {
        return Err(Error::Empty("weighted goal set"));
    }
    let mut sum = 0.0;
    let mut unreachable = 0.0;
    for (g, w) in &goals.entries {
        match goal_cost(planner, s, g, mode)? {
            Some(c) => sum += w * c as f64,
            None => unreachable += w,
        }
    }
    Ok(CentroidScore { unreachable_weight: unreachable, avg: sum / goals.len() as f64 })
}

/// (1/|G|) Σ w_G · c(s, G) over reachable goals; unreachable goals are
/// dropped with a warning, the divisor stays |G|.
pub fn weighted_avg_cost(planner: &Planner, s: &State, goals: &WeightedGoalSet, mode: CostMode) -> Result<f64> {
    let sc = score(planner, s, goals, mode)?;
    let total: f64 = goals.entries.iter().map(|e| e.1).sum();
    if (sc.unreachable_weight - total).abs() <= TOL {
        return Err(Error::AllGoalsUnreachable);
    }
    if sc.unreachable_weight > 0.0 {
        warn!("dropping unreachable goals with total weight {}", sc.unreachable_weight);
    }
    Ok(sc.avg)
}

/// Score of every applicable action's successor, no-op first then in action
/// order.
pub fn action_scores(
    planner: &Planner,
    s: &State,
    goals: &WeightedGoalSet,
    mode: CostMode,
    exec: Execution,
) -> Result<Vec<(Action, CentroidScore)>> {
    let mut cands = vec![Action::noop()];
    cands.extend(planner.actions.iter().filter(|a| a.applicable(s)).cloned());
    let scores =
        par_map(exec, &cands, |a| score(planner, &apply(s, a), goals, mode)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(cands.into_iter().zip(scores).collect())
}

/// Diagnostic table: one line per candidate action with its score.
pub fn score_table(scores: &[(Action, CentroidScore)]) -> String {
    let mut out = String::new();
    for (a, sc) in scores {
        let _ = writeln!(out, "{}\t{:.6}\t{:.6}", a.name, sc.avg, sc.unreachable_weight);
    }
    out
}

fn pick(scores: Vec<(Action, CentroidScore)>) -> (Action, CentroidScore) {
    let mut it = scores.into_iter();
    let mut best = it.next().expect("no-op is always a candidate");
    for cand in it {
        if cand.1.better_than(&best.1) {
            best = cand;
        }
    }
    best
}

/// The action whose successor state best approaches the centroid of `goals`;
/// the no-op wins unless some action strictly improves.
pub fn get_first_action(
    planner: &Planner,
    s: &State,
    goals: &WeightedGoalSet,
    mode: CostMode,
    exec: Execution,
) -> Result<Action> {
    Ok(pick(action_scores(planner, s, goals, mode, exec)?).0)
}

/// Greedy descent from `s` until no action improves; with `exhaustive`, the
/// best of all reachable states (up to `state_cap`) instead.
pub fn extract_centroid(
    planner: &Planner,
    s: &State,
    goals: &WeightedGoalSet,
    mode: CostMode,
    exhaustive: bool,
    state_cap: usize,
) -> Result<State> {
    if exhaustive {
        let mut seen: HashMap<State, ()> = HashMap::from([(s.clone(), ())]);
        let mut queue = VecDeque::from([s.clone()]);
        let mut best = (s.clone(), score(planner, s, goals, mode)?);
        while let Some(cur) = queue.pop_front() {
            for a in planner.actions.iter().filter(|a| a.applicable(&cur)) {
                let next = apply(&cur, a);
                if seen.contains_key(&next) {
                    continue;
                }
                if seen.len() >= state_cap {
                    return Err(Error::ResourceLimit { expanded: seen.len() });
                }
                seen.insert(next.clone(), ());
                let sc = score(planner, &next, goals, mode)?;
                if sc.better_than(&best.1) {
                    best = (next.clone(), sc);
                }
                queue.push_back(next);
            }
        }
        return Ok(best.0);
    }
    let mut cur = s.clone();
    for _ in 0..state_cap {
        let (a, _) = pick(action_scores(planner, &cur, goals, mode, Execution::Sequential)?);
        if a.is_noop() {
            return Ok(cur);
        }
        cur = apply(&cur, &a);
    }
    Err(Error::ResourceLimit { expanded: state_cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::Budget;
    use crate::strips::{FactId, FactTable, PlanningTask};
    use std::sync::Arc;

    fn corridor(n: u32, at: u32) -> PlanningTask {
        let names: Vec<String> = (0..n).map(|i| format!("(at c{i})")).collect();
        let facts = FactTable::from_names(names);
        let mut acts = Vec::new();
        for i in 0..n {
            for j in [i.wrapping_sub(1), i + 1] {
                if j < n {
                    acts.push(Action::new(
                        format!("(move c{i} c{j})"),
                        vec![FactId(i)],
                        vec![FactId(j)],
                        vec![FactId(i)],
                        1,
                    ));
                }
            }
        }
        acts.sort_by(|a, b| a.name.cmp(&b.name));
        PlanningTask::new(Arc::new(facts), Arc::new(acts), State::from_facts(n as usize, [FactId(at)]), vec![])
    }

    fn at(i: u32) -> Vec<Literal> {
        vec![Literal::pos(FactId(i))]
    }

    #[test]
    fn arithmetic() {
        let t = corridor(5, 2);
        let p = Planner::for_task(&t, Budget::default());
        let one = WeightedGoalSet::new([(at(2), 1.0)]).unwrap();
        assert_eq!(weighted_avg_cost(&p, &t.init, &one, CostMode::Exact).unwrap(), 0.0);
        let t0 = corridor(5, 0);
        let two = WeightedGoalSet::new([(at(2), 1.0), (at(4), 1.0)]).unwrap();
        assert_eq!(weighted_avg_cost(&p, &t0.init, &two, CostMode::Exact).unwrap(), 3.0);
    }

    #[test]
    fn duplicates_merge() {
        let w = WeightedGoalSet::new([(at(1), 0.5), (at(1), 0.25)]).unwrap();
        assert_eq!(w.entries, vec![(at(1), 0.75)]);
        assert!(WeightedGoalSet::new([(at(1), 0.0)]).is_err());
    }

    #[test]
    fn exhaustive_centroid_is_middle() {
        let t = corridor(5, 0);
        let p = Planner::for_task(&t, Budget::default());
        let g = WeightedGoalSet::new([(at(0), 1.0), (at(4), 1.0)]).unwrap();
        // With two end goals every cell ties at average 2; a third goal in the
        // middle makes the centre the unique minimum.
        let g3 = WeightedGoalSet::new([(at(0), 1.0), (at(2), 1.0), (at(4), 1.0)]).unwrap();
        let c = extract_centroid(&p, &t.init, &g3, CostMode::Exact, true, 1000).unwrap();
        assert!(c.contains(FactId(2)));
        let c2 = extract_centroid(&p, &t.init, &g, CostMode::Exact, true, 1000).unwrap();
        assert_eq!(score(&p, &c2, &g, CostMode::Exact).unwrap().avg, 2.0);
    }

    #[test]
    fn single_goal_follows_optimal_plan() {
        let t = corridor(5, 0);
        let p = Planner::for_task(&t, Budget::default());
        let g = WeightedGoalSet::new([(at(3), 1.0)]).unwrap();
        let a = get_first_action(&p, &t.init, &g, CostMode::Exact, Execution::Sequential).unwrap();
        assert_eq!(a.name, "(move c0 c1)");
        let c = extract_centroid(&p, &t.init, &g, CostMode::Exact, false, 100).unwrap();
        assert!(c.contains(FactId(3)));
    }

    #[test]
    fn local_minimum_returns_noop() {
        let t = corridor(5, 2);
        let p = Planner::for_task(&t, Budget::default());
        let g = WeightedGoalSet::new([(at(2), 1.0)]).unwrap();
        let a = get_first_action(&p, &t.init, &g, CostMode::Exact, Execution::Sequential).unwrap();
        assert!(a.is_noop());
    }
}
