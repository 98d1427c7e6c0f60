//! Two-agent concurrent execution, counterplan validation and episode metrics.
//!
//! At each time step both agents submit one action. If the two interfere
//! (one deletes something the other requires or adds) neither takes effect:
//! the state stays as it was, for both agents alike. A no-op never
//! interferes. Non-interfering actions fire together; when only one of them
//! is applicable, that one fires alone.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::counterplanning::{adicp, AlgorithmConfig, AlgorithmOutput, CounterplanningTask, IterationRecord};
use crate::planner::{Budget, Planner, SearchStatus};
use crate::strips::{apply, apply_effects, Action, Literal, Plan, State};

fn touches(del: &[crate::FactId], other: &Action) -> bool {
    del.iter().any(|f| other.requires(*f) || other.adds(*f))
}

/// True iff one action deletes a precondition or an add effect of the other.
pub fn interferes(a1: &Action, a2: &Action) -> bool {
    if a1.is_noop() || a2.is_noop() {
        return false;
    }
    touches(&a1.del, a2) || touches(&a2.del, a1)
}

/// Outcome of one joint step: the new state and which actions fired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointOutcome {
    pub state: State,
    pub first_fired: bool,
    pub second_fired: bool,
}

pub fn joint_step(s: &State, a1: &Action, a2: &Action) -> JointOutcome {
    if a2.is_noop() {
        let fired = a1.applicable(s) && !a1.is_noop();
        return JointOutcome { state: apply(s, a1), first_fired: fired, second_fired: false };
    }
    if a1.is_noop() {
        let fired = a2.applicable(s);
        return JointOutcome { state: apply(s, a2), first_fired: false, second_fired: fired };
    }
    if interferes(a1, a2) {
        return JointOutcome { state: s.clone(), first_fired: false, second_fired: false };
    }
    let (ok1, ok2) = (a1.applicable(s), a2.applicable(s));
    let mut next = s.clone();
    if ok1 {
        apply_effects(&mut next, a1);
    }
    if ok2 {
        apply_effects(&mut next, a2);
    }
    JointOutcome { state: next, first_fired: ok1, second_fired: ok2 }
}

/// γ_J for two simultaneous actions.
pub fn joint_apply(s: &State, a1: &Action, a2: &Action) -> State {
    joint_step(s, a1, a2).state
}

/// One executed joint step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointStep {
    pub seek: Option<String>,
    pub prev: Option<String>,
    pub seek_fired: bool,
    pub prev_fired: bool,
    /// Fact ids true after the step.
    pub state: Vec<u32>,
}

/// Step-by-step joint execution; the longer plan finishes alone.
pub fn joint_trace(s: &State, p1: &Plan, p2: &Plan) -> (State, Vec<JointStep>) {
    let mut cur = s.clone();
    let mut steps = Vec::new();
    let noop = Action::noop();
    for i in 0..p1.len().max(p2.len()) {
        let a1 = p1.steps.get(i);
        let a2 = p2.steps.get(i);
        let out = joint_step(&cur, a1.unwrap_or(&noop), a2.unwrap_or(&noop));
        cur = out.state;
        steps.push(JointStep {
            seek: a1.map(|a| a.name.clone()),
            prev: a2.map(|a| a.name.clone()),
            seek_fired: out.first_fired,
            prev_fired: out.second_fired,
            state: cur.iter().map(|f| f.0).collect(),
        });
    }
    (cur, steps)
}

/// Γ_J: joint execution of two plans.
pub fn joint_execute(s: &State, p1: &Plan, p2: &Plan) -> State {
    let noop = Action::noop();
    let mut cur = s.clone();
    for i in 0..p1.len().max(p2.len()) {
        cur = joint_apply(&cur, p1.steps.get(i).unwrap_or(&noop), p2.steps.get(i).unwrap_or(&noop));
    }
    cur
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Valid,
    Invalid,
    /// A search budget ran out before a decision.
    Indeterminate,
}

/// Whether the seeker, after both plans run jointly from the task's initial
/// state, can still reach any live candidate.
pub fn validate_counterplan(
    c: &CounterplanningTask,
    prev_plan: &Plan,
    seek_plan: &Plan,
    live: &[usize],
    budget: Budget,
) -> Verdict {
    let end = joint_execute(&c.initial_state(), seek_plan, prev_plan);
    let planner = Planner::for_task(&c.seek, budget);
    let mut verdict = Verdict::Valid;
    for &i in live {
        match planner.solve(&end, &c.candidates[i].goal).status {
            SearchStatus::Solved => return Verdict::Invalid,
            SearchStatus::ResourceLimit => verdict = Verdict::Indeterminate,
            SearchStatus::Unsolvable => {}
        }
    }
    verdict
}

fn goal_holds(goal: &[Literal], s: &State) -> bool {
    goal.iter().all(|l| l.holds(s))
}

/// Whether `plan` reaches `goal` from `s` against every opponent sequence of
/// up to `horizon` actions (drawn from `opponent` plus the no-op).
/// `Indeterminate` when more than `max_sequences` would need checking.
pub fn check_strong_small(
    plan: &Plan,
    opponent: &[Action],
    s: &State,
    goal: &[Literal],
    horizon: usize,
    max_sequences: usize,
) -> Verdict {
    let mut alphabet = vec![Action::noop()];
    alphabet.extend(opponent.iter().cloned());
    let total = (alphabet.len() as f64).powi(horizon as i32);
    if total > max_sequences as f64 {
        return Verdict::Indeterminate;
    }
    // Shorter sequences are covered by trailing no-ops.
    let mut idx = vec![0usize; horizon];
    loop {
        let opp = Plan::new(idx.iter().map(|&i| alphabet[i].clone()).collect());
        if !goal_holds(goal, &joint_execute(s, plan, &opp)) {
            return Verdict::Invalid;
        }
        let mut k = 0;
        loop {
            if k == horizon {
                return Verdict::Valid;
            }
            idx[k] += 1;
            if idx[k] < alphabet.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Per-episode scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub task_id: String,
    pub algorithm: String,
    /// 1 when the seeker was stopped.
    pub e: f64,
    /// Fraction of the seeker plan executed before it was first blocked.
    pub ratio_seek: f64,
    /// Non-no-op preventer actions in the returned plan.
    pub len_prev: usize,
    /// Fraction of those taken while anticipating; `None` for the reactive
    /// algorithm or an empty plan.
    pub ratio_anticipatory: Option<f64>,
    pub time_avg_s: f64,
    pub status: String,
}

impl Metrics {
    pub const CSV_HEADER: &'static str = "task-id,algorithm,E,ratio_seek,len_prev,ratio_anticipatory,time_avg_s,status";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{},{},{:.6},{}",
            self.task_id,
            self.algorithm,
            self.e,
            self.ratio_seek,
            self.len_prev,
            self.ratio_anticipatory.map_or(String::new(), |r| format!("{r:.6}")),
            self.time_avg_s,
            self.status
        )
    }

    pub fn stopped(&self) -> bool {
        self.e >= 1.0
    }
}

/// Full record of one episode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub task_id: String,
    pub algorithm: String,
    pub iterations: Vec<IterationRecord>,
    pub joint_steps: Vec<JointStep>,
    pub anticipatory_prefix: Vec<String>,
    pub counterplan: Option<Vec<String>>,
    pub stopped: bool,
    pub verdict: Verdict,
}

impl EpisodeTrace {
    /// One JSON object per line: iterations, then joint steps, then a summary.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for it in &self.iterations {
            let v = serde_json::json!({"kind": "iteration", "task": self.task_id, "algorithm": self.algorithm, "record": it});
            let _ = writeln!(out, "{v}");
        }
        for (i, st) in self.joint_steps.iter().enumerate() {
            let v = serde_json::json!({"kind": "step", "task": self.task_id, "algorithm": self.algorithm, "t": i + 1, "step": st});
            let _ = writeln!(out, "{v}");
        }
        let v = serde_json::json!({
            "kind": "summary",
            "task": self.task_id,
            "algorithm": self.algorithm,
            "anticipatory_prefix": self.anticipatory_prefix,
            "counterplan": self.counterplan,
            "stopped": self.stopped,
            "verdict": self.verdict,
        });
        let _ = writeln!(out, "{v}");
        out
    }
}

/// Scores an algorithm's output by re-running both plans jointly from the
/// task's initial state.
pub fn score_episode(
    c: &CounterplanningTask,
    seeker_plan: &Plan,
    out: &AlgorithmOutput,
    cfg: &AlgorithmConfig,
    task_id: &str,
) -> (EpisodeTrace, Metrics) {
    let (_, steps) = joint_trace(&c.initial_state(), seeker_plan, &out.prev_plan);
    // The harness knows the hidden goal: a counterplan only stops the seeker
    // if that goal is blocked too.
    let mut judged = out.live.clone();
    if let Some(t) = c.true_goal_index() {
        if !judged.contains(&t) {
            judged.push(t);
        }
    }
    // The returned plan is judged even without a counterplan: anticipatory
    // moves alone may already have cut the seeker off.
    let verdict = validate_counterplan(c, &out.prev_plan, seeker_plan, &judged, cfg.budget);
    let stopped = verdict == Verdict::Valid;
    let executed = steps.iter().take(seeker_plan.len()).take_while(|s| s.seek_fired).count();
    let ratio_seek = if seeker_plan.is_empty() { 1.0 } else { executed as f64 / seeker_plan.len() as f64 };
    let len_prev = out.prev_plan.active_len();
    let ratio_anticipatory =
        (cfg.algorithm.anticipates() && len_prev > 0).then(|| out.prefix.active_len() as f64 / len_prev as f64);
    let time_avg_s = if out.iterations.is_empty() {
        0.0
    } else {
        out.iterations.iter().map(|r| r.elapsed_s).sum::<f64>() / out.iterations.len() as f64
    };
    let status = match (verdict, out.counterplan.is_some()) {
        (Verdict::Valid, true) => "stopped",
        (Verdict::Valid, false) => "stopped-without-counterplan",
        (Verdict::Invalid, true) => "not-stopped",
        (Verdict::Invalid, false) => "no-counterplan",
        (Verdict::Indeterminate, _) => "indeterminate",
    };
    let trace = EpisodeTrace {
        task_id: task_id.to_string(),
        algorithm: cfg.algorithm.name().to_string(),
        iterations: out.iterations.clone(),
        joint_steps: steps,
        anticipatory_prefix: out.prefix.names(),
        counterplan: out.counterplan.as_ref().map(Plan::names),
        stopped,
        verdict,
    };
    let metrics = Metrics {
        task_id: task_id.to_string(),
        algorithm: cfg.algorithm.name().to_string(),
        e: if stopped { 1.0 } else { 0.0 },
        ratio_seek,
        len_prev,
        ratio_anticipatory,
        time_avg_s,
        status: status.to_string(),
    };
    (trace, metrics)
}

/// Runs one algorithm on a task and scores the result.
pub fn run_episode(
    c: &CounterplanningTask,
    seeker_plan: &Plan,
    cfg: &AlgorithmConfig,
    task_id: &str,
) -> (AlgorithmOutput, EpisodeTrace, Metrics) {
    let out = adicp(c, seeker_plan, cfg);
    let (trace, metrics) = score_episode(c, seeker_plan, &out, cfg, task_id);
    (out, trace, metrics)
}
