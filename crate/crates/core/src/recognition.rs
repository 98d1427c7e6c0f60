//! Probabilistic plan-based goal recognition.
//!
//! For each candidate goal G the recognizer compares the cheapest plan that
//! embeds the observations as a subsequence, c(G|O), with the cheapest plan
//! that does not, c(G|¬O). The likelihood of O given G is a logistic function
//! of Δ = c(G|O) − c(G|¬O); posteriors are proportional to prior × likelihood.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::par::{par_map, Execution};
use crate::planner::{Budget, Planner};
use crate::strips::{Action, FactId, FactTable, Literal, PlanningTask, State};

pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct RecognitionProblem {
    /// Seeker frame; the task's own goal is ignored.
    pub task: PlanningTask,
    pub candidates: Vec<Vec<Literal>>,
    pub observations: Vec<Action>,
    /// Prior over candidates; uniform when `None`.
    pub prior: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct RecognitionOptions {
    pub beta: f64,
    pub epsilon: f64,
    pub budget: Budget,
    pub execution: Execution,
}

impl Default for RecognitionOptions {
    fn default() -> Self {
        RecognitionOptions {
            beta: DEFAULT_BETA,
            epsilon: DEFAULT_EPSILON,
            budget: Budget::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionResult {
    pub posterior: Vec<f64>,
    /// Indices into the candidate list.
    pub most_probable: Vec<usize>,
    /// Per candidate: (c(G|O), c(G|¬O)).
    pub costs: Vec<(Option<u64>, Option<u64>)>,
}

impl RecognitionResult {
    /// Diagnostic CSV: goal id, c(G|O), c(G|¬O), Δ, posterior.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("goal,cost_obs,cost_not_obs,delta,posterior\n");
        let show = |c: Option<u64>| c.map_or("inf".to_string(), |v| v.to_string());
        for (i, (co, cn)) in self.costs.iter().enumerate() {
            let delta = match (co, cn) {
                (Some(a), Some(b)) => (*a as i64 - *b as i64).to_string(),
                (Some(_), None) => "-inf".into(),
                _ => "inf".into(),
            };
            let _ = writeln!(out, "{i},{},{},{delta},{}", show(*co), show(*cn), self.posterior[i]);
        }
        out
    }
}

/// The observation-compiled frame: original facts plus progress facts.
#[derive(Clone, Debug)]
pub struct CompiledObservations {
    pub task: PlanningTask,
    /// `progress[k]` holds when exactly the first k observations were matched.
    pub progress: Vec<FactId>,
}

/// Builds the task whose plans are the original plans annotated with greedy
/// left-to-right matching of `obs`. With `comply`, the goal additionally
/// requires all observations matched; otherwise it requires they were not.
pub fn compile_observations(task: &PlanningTask, obs: &[Action], comply: bool) -> PlanningTask {
    let c = compile_frame(task, obs);
    let last = *c.progress.last().unwrap();
    let mut goal = task.goal.clone();
    goal.push(if comply { Literal::pos(last) } else { Literal::neg(last) });
    c.task.with_goal(goal)
}

pub fn compile_frame(task: &PlanningTask, obs: &[Action]) -> CompiledObservations {
    let m = obs.len();
    let mut names: Vec<String> = task.facts.names().to_vec();
    let base = names.len() as u32;
    for k in 0..=m {
        names.push(format!("(obs-progress-{k})"));
    }
    // not-progress twins for every position an observation can be matched at
    for k in 0..m {
        names.push(format!("(not-obs-progress-{k})"));
    }
    let mut facts = FactTable::from_names(names);
    for id in task.facts.ids() {
        if let Some(b) = task.facts.twin_base(id) {
            facts.set_twin(id, b);
        }
    }
    let progress: Vec<FactId> = (0..=m as u32).map(|k| FactId(base + k)).collect();
    let not_progress: Vec<FactId> = (0..m as u32).map(|k| FactId(base + m as u32 + 1 + k)).collect();
    for k in 0..m {
        facts.set_twin(not_progress[k], progress[k]);
    }
    let n = facts.len();

    let mut actions = Vec::new();
    for a in task.actions.iter() {
        let matches: Vec<usize> = (0..m).filter(|&k| obs[k].name == a.name).collect();
        let mut pre = a.pre.clone();
        pre.extend(matches.iter().map(|&k| not_progress[k]));
        actions.push(Action::new(a.name.clone(), pre, a.add.clone(), a.del.clone(), a.cost));
        for &k in &matches {
            let mut pre = a.pre.clone();
            pre.push(progress[k]);
            let mut add = a.add.clone();
            add.push(progress[k + 1]);
            add.push(not_progress[k]);
            let mut del = a.del.clone();
            del.push(progress[k]);
            if k + 1 < m {
                del.push(not_progress[k + 1]);
            }
            actions.push(Action::new(format!("{} [obs {}]", a.name, k + 1), pre, add, del, a.cost));
        }
    }
    let mut init = task.init.resized(n);
    init.insert(progress[0]);
    for &np in not_progress.iter().skip(1) {
        init.insert(np);
    }
    let compiled = PlanningTask::new(Arc::new(facts), Arc::new(actions), init, task.goal.clone());
    CompiledObservations { task: compiled, progress }
}

fn likelihood(beta: f64, costs: (Option<u64>, Option<u64>)) -> f64 {
    match costs {
        (None, _) => 0.0,
        (Some(_), None) => 1.0,
        (Some(co), Some(cn)) => {
            let delta = co as f64 - cn as f64;
            1.0 / (1.0 + (beta * delta).exp())
        }
    }
}

pub fn recognize(problem: &RecognitionProblem, opts: &RecognitionOptions) -> Result<RecognitionResult> {
    let k = problem.candidates.len();
    if k == 0 {
        return Err(Error::Empty("candidate goal set"));
    }
    let frame = compile_frame(&problem.task, &problem.observations);
    let last = *frame.progress.last().unwrap();
    let planner = Planner::for_task(&frame.task, opts.budget);
    let init: &State = &frame.task.init;
    let costs = par_map(opts.execution, &problem.candidates, |g| -> Result<(Option<u64>, Option<u64>)> {
        let mut comply = g.clone();
        comply.push(Literal::pos(last));
        let co = planner.optimal_cost(init, &comply)?;
        if co.is_none() {
            return Ok((None, None));
        }
        let mut not = g.clone();
        not.push(Literal::neg(last));
        Ok((co, planner.optimal_cost(init, &not)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let prior = match &problem.prior {
        Some(p) => {
            if p.len() != k {
                return Err(Error::Invalid(format!("prior has {} entries for {k} candidates", p.len())));
            }
            p.clone()
        }
        None => vec![1.0 / k as f64; k],
    };
    let raw: Vec<f64> = costs.iter().zip(&prior).map(|(c, p)| p * likelihood(opts.beta, *c)).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoConsistentGoal);
    }
    let posterior: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let best = posterior.iter().copied().fold(0.0, f64::max);
    let most_probable = (0..k).filter(|&i| posterior[i] > 0.0 && posterior[i] >= best - opts.epsilon).collect();
    Ok(RecognitionResult { posterior, most_probable, costs })
}
