//! Counterplanning landmarks, the landmark ranking, goal selection and the
//! reactive / anticipatory counterplanning loop.
//!
//! A counterplanning landmark is a fact every live candidate seeker task
//! needs (a fact landmark of each), that some preventer action can falsify,
//! and that the preventer can falsify no later than the earliest step at
//! which any optimal seeker plan stops needing it.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::centroids::{get_first_action, CostMode, WeightedGoalSet};
use crate::error::{Error, Result};
use crate::landmarks::extract_landmarks;
use crate::par::{par_map, Execution};
use crate::planner::{Budget, Planner, SearchStatus};
use crate::recognition::{recognize, RecognitionOptions, RecognitionProblem};
use crate::simulator::joint_step;
use crate::strips::{execute, Action, FactId, Literal, Plan, PlanningTask, State};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub name: String,
    pub goal: Vec<Literal>,
}

/// Seeker and preventer over one shared fact table, the candidate seeker
/// goals, and the seeker actions observed so far. `seek.goal` is the hidden
/// true goal; the algorithms never read it.
#[derive(Clone, Debug)]
pub struct CounterplanningTask {
    pub seek: PlanningTask,
    pub prev: PlanningTask,
    pub candidates: Vec<Candidate>,
    pub observations: Vec<Action>,
}

impl CounterplanningTask {
    /// I_c: the joint initial state advanced by the observations.
    pub fn initial_state(&self) -> State {
        execute(&self.seek.init, &Plan::new(self.observations.clone()))
    }

    pub fn candidate_index(&self, name: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.name == name)
    }

    /// Index of the candidate equal to the hidden goal, if any.
    pub fn true_goal_index(&self) -> Option<usize> {
        let mut g = self.seek.goal.clone();
        g.sort();
        self.candidates.iter().position(|c| {
            let mut cg = c.goal.clone();
            cg.sort();
            cg == g
        })
    }
}

/// One seeker task per live candidate, all from the composite state `state`.
pub fn potential_tasks(c: &CounterplanningTask, state: &State, live: &[usize]) -> Vec<PlanningTask> {
    live.iter().map(|&i| c.seek.with_init(state.clone()).with_goal(c.candidates[i].goal.clone())).collect()
}

/// Last 1-based step whose action requires `fact`; `|plan| + 1` if the goal
/// needs it positively; 0 when nothing needs it.
pub fn laststep(fact: FactId, plan: &Plan, goal: &[Literal]) -> u64 {
    if goal.iter().any(|l| l.positive && l.fact == fact) {
        return plan.len() as u64 + 1;
    }
    plan.steps.iter().rposition(|a| a.requires(fact)).map_or(0, |i| i as u64 + 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CplEntry {
    pub fact: FactId,
    /// What the preventer must make true: the negation of the needed fact.
    pub landmark: Literal,
    pub prev_cost: u64,
    pub min_laststep: u64,
}

/// Individual counterplanning landmarks per live candidate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CpList {
    pub per_goal: Vec<(usize, Vec<CplEntry>)>,
}

impl CpList {
    /// Landmarks in candidate order, with repetitions.
    pub fn flattened(&self) -> Vec<&CplEntry> {
        self.per_goal.iter().flat_map(|(_, es)| es.iter()).collect()
    }

    pub fn len(&self) -> usize {
        self.per_goal.iter().map(|(_, es)| es.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multiplicity(&self, fact: FactId) -> usize {
        self.flattened().iter().filter(|e| e.fact == fact).count()
    }
}

/// Shared and individual counterplanning landmarks for one state.
#[derive(Clone, Debug, Default)]
pub struct CplAnalysis {
    pub common: Vec<CplEntry>,
    pub list: CpList,
    /// Live candidates the seeker can no longer reach from the state.
    pub unreachable: Vec<usize>,
}

struct GoalAnalysis {
    idx: usize,
    /// landmark → smallest laststep over this goal's optimal plans
    laststeps: BTreeMap<FactId, u64>,
}

fn analyze_goal(c: &CounterplanningTask, state: &State, idx: usize, budget: Budget) -> Result<Option<GoalAnalysis>> {
    let task = c.seek.with_init(state.clone()).with_goal(c.candidates[idx].goal.clone());
    let lms = extract_landmarks(&task);
    if lms.unsolvable {
        return Ok(None);
    }
    let planner = Planner::for_task(&task, budget);
    let Some(dag) = planner.optimal_dag(&task.init, &task.goal)? else {
        return Ok(None);
    };
    let laststeps = lms
        .landmarks
        .iter()
        .filter(|f| c.prev.actions.iter().any(|a| a.deletes(**f)))
        .map(|&f| (f, dag.min_laststep(&task.actions, f, &task.goal)))
        // Some optimal plan never needs the fact: falsifying it cannot block.
        .filter(|&(_, ls)| ls > 0)
        .collect();
    Ok(Some(GoalAnalysis { idx, laststeps }))
}

/// Computes both the common landmarks and the per-goal list for the live
/// candidates from `state`.
pub fn analyze(
    c: &CounterplanningTask,
    state: &State,
    live: &[usize],
    budget: Budget,
    exec: Execution,
) -> Result<CplAnalysis> {
    let per_goal =
        par_map(exec, live, |&i| analyze_goal(c, state, i, budget)).into_iter().collect::<Result<Vec<_>>>()?;
    let mut out = CplAnalysis::default();
    let mut solved = Vec::new();
    for (g, &i) in per_goal.into_iter().zip(live) {
        match g {
            Some(g) => solved.push(g),
            None => out.unreachable.push(i),
        }
    }
    let mut facts: Vec<FactId> = solved.iter().flat_map(|g| g.laststeps.keys().copied()).collect();
    facts.sort();
    facts.dedup();
    let prev_planner = Planner::for_task(&c.prev, budget);
    let costs = par_map(exec, &facts, |&f| prev_planner.optimal_cost(state, &[Literal::neg(f)]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let prev_cost: HashMap<FactId, u64> = facts.iter().zip(costs).filter_map(|(f, c)| c.map(|c| (*f, c))).collect();

    let entry = |f: FactId, ls: u64| -> Option<CplEntry> {
        let pc = *prev_cost.get(&f)?;
        (pc <= ls).then_some(CplEntry { fact: f, landmark: Literal::neg(f), prev_cost: pc, min_laststep: ls })
    };
    for g in &solved {
        let es = g.laststeps.iter().filter_map(|(&f, &ls)| entry(f, ls)).collect();
        out.list.per_goal.push((g.idx, es));
    }
    if let Some((first, rest)) = solved.split_first() {
        for (&f, &ls) in &first.laststeps {
            let mut min_ls = ls;
            let mut everywhere = true;
            for g in rest {
                match g.laststeps.get(&f) {
                    Some(&l) => min_ls = min_ls.min(l),
                    None => everywhere = false,
                }
            }
            if everywhere {
                if let Some(e) = entry(f, min_ls) {
                    out.common.push(e);
                }
            }
        }
    }
    Ok(out)
}

pub fn extract_cpl(c: &CounterplanningTask, state: &State, live: &[usize], budget: Budget) -> Result<Vec<CplEntry>> {
    Ok(analyze(c, state, live, budget, Execution::default())?.common)
}

pub fn extract_list_of_cpl(c: &CounterplanningTask, state: &State, live: &[usize], budget: Budget) -> Result<CpList> {
    Ok(analyze(c, state, live, budget, Execution::default())?.list)
}

/// Weight of each distinct landmark: its count in the flattened list over
/// the list's length.
pub fn rank(list: &CpList) -> Result<WeightedGoalSet> {
    let flat = list.flattened();
    if flat.is_empty() {
        return Err(Error::Empty("counterplanning landmark list"));
    }
    let total = flat.len() as f64;
    let mut order: Vec<Literal> = Vec::new();
    let mut count: HashMap<Literal, usize> = HashMap::new();
    for e in flat {
        let n = count.entry(e.landmark).or_insert(0);
        if *n == 0 {
            order.push(e.landmark);
        }
        *n += 1;
    }
    WeightedGoalSet::new(order.into_iter().map(|l| (vec![l], count[&l] as f64 / total)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Landmark the seeker needs soonest.
    #[default]
    ClosestToSeek,
    /// Landmark the preventer can falsify cheapest.
    ClosestToPrev,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::ClosestToSeek => "closest-to-seek",
            Strategy::ClosestToPrev => "closest-to-prev",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closest-to-seek" => Ok(Strategy::ClosestToSeek),
            "closest-to-prev" => Ok(Strategy::ClosestToPrev),
            _ => Err(Error::Invalid(format!("unknown strategy {s}"))),
        }
    }
}

/// Picks a landmark; ties go to the other criterion, then to fact order.
pub fn select_goal(cpl: &[CplEntry], strategy: Strategy) -> Result<&CplEntry> {
    let key = |e: &CplEntry| match strategy {
        Strategy::ClosestToSeek => (e.min_laststep, e.prev_cost, e.fact),
        Strategy::ClosestToPrev => (e.prev_cost, e.min_laststep, e.fact),
    };
    cpl.iter().min_by_key(|e| key(e)).ok_or(Error::Empty("counterplanning landmark set"))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Reactive: the preventer waits until a counterplan exists.
    Dicp,
    /// Anticipatory: moves toward the centroid of the landmark list.
    #[default]
    Adicp,
    /// Anticipates with uniformly random actions.
    RandomAdicp,
    /// Anticipates toward one landmark sampled once per episode.
    RandomGoalAdicp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Dicp, Algorithm::Adicp, Algorithm::RandomAdicp, Algorithm::RandomGoalAdicp];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dicp => "dicp",
            Algorithm::Adicp => "adicp",
            Algorithm::RandomAdicp => "random-adicp",
            Algorithm::RandomGoalAdicp => "random-goal-adicp",
        }
    }

    pub fn anticipates(self) -> bool {
        self != Algorithm::Dicp
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown algorithm {s}")))
    }
}

#[derive(Clone, Debug)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub seed: u64,
    pub budget: Budget,
    pub cost_mode: CostMode,
    pub recognition: RecognitionOptions,
    pub execution: Execution,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig {
            algorithm: Algorithm::Adicp,
            strategy: Strategy::ClosestToSeek,
            seed: 0,
            budget: Budget::default(),
            cost_mode: CostMode::Estimated,
            recognition: RecognitionOptions::default(),
            execution: Execution::default(),
        }
    }
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        AlgorithmConfig { algorithm, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnticipateMode {
    Centroid,
    Random,
    RandomGoal,
}

/// Chooses preventer actions while no counterplan exists.
pub struct Anticipator {
    mode: AnticipateMode,
    rng: ChaCha8Rng,
    sampled: Option<Vec<Literal>>,
}

impl Anticipator {
    pub fn new(mode: AnticipateMode, seed: u64) -> Self {
        Anticipator { mode, rng: ChaCha8Rng::seed_from_u64(seed), sampled: None }
    }

    /// Next preventer action from `state`; the no-op when nothing applies or
    /// there is nothing to approach.
    pub fn anticipate(
        &mut self,
        prev: &Planner,
        list: &CpList,
        state: &State,
        cost_mode: CostMode,
        exec: Execution,
    ) -> Result<Action> {
        match self.mode {
            AnticipateMode::Random => {
                let options: Vec<&Action> = prev.actions.iter().filter(|a| a.applicable(state)).collect();
                Ok(options.choose(&mut self.rng).map_or_else(Action::noop, |a| (*a).clone()))
            }
            AnticipateMode::Centroid => {
                if list.is_empty() {
                    return Ok(Action::noop());
                }
                get_first_action(prev, state, &rank(list)?, cost_mode, exec)
            }
            AnticipateMode::RandomGoal => {
                if self.sampled.is_none() {
                    if list.is_empty() {
                        return Ok(Action::noop());
                    }
                    let ranked = rank(list)?;
                    let i = self.rng.gen_range(0..ranked.len());
                    self.sampled = Some(ranked.entries[i].0.clone());
                }
                let goal = WeightedGoalSet::new([(self.sampled.clone().unwrap(), 1.0)])?;
                get_first_action(prev, state, &goal, cost_mode, exec)
            }
        }
    }
}

/// Per-iteration record of the counterplanning loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub observations: usize,
    pub live: Vec<String>,
    pub cpl_size: usize,
    pub cplist_size: usize,
    pub selected: Option<String>,
    pub prev_action: Option<String>,
    pub seek_action: Option<String>,
    /// Whether the seeker's action took effect; only those are observed.
    pub seek_fired: bool,
    pub counterplan_found: bool,
    pub failure: Option<String>,
    pub elapsed_s: f64,
}

/// What a counterplanning algorithm returns for one episode.
#[derive(Clone, Debug)]
pub struct AlgorithmOutput {
    /// Anticipatory prefix followed by the counterplan.
    pub prev_plan: Plan,
    pub prefix: Plan,
    pub counterplan: Option<Plan>,
    /// The landmark literal the counterplan achieves.
    pub target: Option<Literal>,
    /// Live candidates when the counterplan was found (or at the end).
    pub live: Vec<usize>,
    pub iterations: Vec<IterationRecord>,
}

/// Runs the counterplanning loop against the seeker executing `seeker_plan`.
pub fn adicp(c: &CounterplanningTask, seeker_plan: &Plan, cfg: &AlgorithmConfig) -> AlgorithmOutput {
    let facts = &c.seek.facts;
    let prev_planner = Planner::for_task(&c.prev, cfg.budget);
    let mut anticipator = match cfg.algorithm {
        Algorithm::Dicp => None,
        Algorithm::Adicp => Some(Anticipator::new(AnticipateMode::Centroid, cfg.seed)),
        Algorithm::RandomAdicp => Some(Anticipator::new(AnticipateMode::Random, cfg.seed)),
        Algorithm::RandomGoalAdicp => Some(Anticipator::new(AnticipateMode::RandomGoal, cfg.seed)),
    };
    let mut state = c.initial_state();
    let mut observations = c.observations.clone();
    let mut remaining: VecDeque<Action> = seeker_plan.steps.iter().cloned().collect();
    let mut live: Vec<usize> = (0..c.candidates.len()).collect();
    let mut prefix = Plan::empty();
    let mut iterations = Vec::new();
    let mut counterplan = None;
    let mut target = None;

    while !remaining.is_empty() && counterplan.is_none() {
        let start = Instant::now();
        let mut rec = IterationRecord {
            iteration: iterations.len() + 1,
            observations: observations.len(),
            live: Vec::new(),
            cpl_size: 0,
            cplist_size: 0,
            selected: None,
            prev_action: None,
            seek_action: None,
            seek_fired: false,
            counterplan_found: false,
            failure: None,
            elapsed_s: 0.0,
        };
        let mut list = CpList::default();
        {
            let problem = RecognitionProblem {
                task: c.seek.clone(),
                candidates: c.candidates.iter().map(|k| k.goal.clone()).collect(),
                observations: observations.clone(),
                prior: None,
            };
            let mut opts = cfg.recognition.clone();
            opts.budget = cfg.budget;
            match recognize(&problem, &opts) {
                Ok(r) => {
                    let kept: Vec<usize> = live.iter().copied().filter(|i| r.most_probable.contains(i)).collect();
                    live = if kept.is_empty() { r.most_probable } else { kept };
                }
                Err(e) => rec.failure = Some(format!("recognition: {e}")),
            }
            rec.live = live.iter().map(|&i| c.candidates[i].name.clone()).collect();
            match analyze(c, &state, &live, cfg.budget, cfg.execution) {
                Ok(a) => {
                    let mut cpl = a.common;
                    list = a.list;
                    rec.cpl_size = cpl.len();
                    rec.cplist_size = list.len();
                    while !cpl.is_empty() {
                        let chosen = select_goal(&cpl, cfg.strategy).expect("nonempty").clone();
                        let r = prev_planner.solve(&state, &[chosen.landmark]);
                        match (r.status, r.plan) {
                            (SearchStatus::Solved, Some(p)) if !p.is_empty() => {
                                rec.selected = Some(chosen.landmark.display(facts));
                                target = Some(chosen.landmark);
                                counterplan = Some(p);
                                break;
                            }
                            (SearchStatus::ResourceLimit, _) => {
                                rec.failure =
                                    Some(format!("planner budget exhausted on {}", chosen.landmark.display(facts)));
                            }
                            _ => {}
                        }
                        cpl.retain(|e| e.fact != chosen.fact);
                    }
                }
                Err(e) => rec.failure = Some(format!("landmarks: {e}")),
            }
        }
        if counterplan.is_some() {
            rec.counterplan_found = true;
            rec.elapsed_s = start.elapsed().as_secs_f64();
            iterations.push(rec);
            break;
        }
        let a_prev = match anticipator.as_mut() {
            None => Action::noop(),
            Some(ant) => {
                ant.anticipate(&prev_planner, &list, &state, cfg.cost_mode, cfg.execution).unwrap_or_else(|e| {
                    rec.failure = Some(format!("anticipate: {e}"));
                    Action::noop()
                })
            }
        };
        let a_seek = remaining.pop_front().expect("loop guard");
        let step = joint_step(&state, &a_seek, &a_prev);
        state = step.state;
        rec.prev_action = Some(a_prev.name.clone());
        rec.seek_action = Some(a_seek.name.clone());
        rec.seek_fired = step.first_fired;
        if step.first_fired {
            observations.push(a_seek);
        }
        prefix.steps.push(a_prev);
        rec.elapsed_s = start.elapsed().as_secs_f64();
        iterations.push(rec);
    }

    let mut prev_plan = prefix.clone();
    if let Some(cp) = &counterplan {
        prev_plan.steps.extend(cp.steps.iter().cloned());
    }
    AlgorithmOutput { prev_plan, prefix, counterplan, target, live, iterations }
}
