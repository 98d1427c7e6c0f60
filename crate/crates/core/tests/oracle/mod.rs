//! Brute-force oracles over explicit state spaces, and seeded random small
//! tasks to run them on. Shared by the integration tests and the acceptance
//! harness.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use counterplan::counterplanning::{Candidate, CounterplanningTask};
use counterplan::landmarks::extract_landmarks;
use counterplan::strips::apply;
use counterplan::{Action, FactId, FactTable, Literal, PlanningTask, State};

fn holds(goal: &[Literal], s: &State) -> bool {
    goal.iter().all(|l| l.holds(s))
}

/// Explicit reachable state graph from `init`.
pub struct StateGraph {
    pub states: Vec<State>,
    /// Per state: (action index, successor state index).
    pub succ: Vec<Vec<(usize, usize)>>,
}

impl StateGraph {
    pub fn build(actions: &[Action], init: &State) -> StateGraph {
        let mut index: HashMap<State, usize> = HashMap::from([(init.clone(), 0)]);
        let mut states = vec![init.clone()];
        let mut succ = vec![Vec::new()];
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for (ai, a) in actions.iter().enumerate() {
                if !a.applicable(&states[v]) {
                    continue;
                }
                let t = apply(&states[v], a);
                let ti = *index.entry(t.clone()).or_insert_with(|| {
                    states.push(t);
                    succ.push(Vec::new());
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                succ[v].push((ai, ti));
            }
        }
        StateGraph { states, succ }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Exact cost-to-goal of every state (backward Dijkstra).
    pub fn goal_distance(&self, actions: &[Action], goal: &[Literal]) -> Vec<Option<u64>> {
        let n = self.len();
        let mut pred: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for (v, es) in self.succ.iter().enumerate() {
            for &(a, t) in es {
                pred[t].push((v, actions[a].cost as u64));
            }
        }
        let mut dist = vec![None; n];
        let mut heap = BinaryHeap::new();
        for (i, s) in self.states.iter().enumerate() {
            if holds(goal, s) {
                heap.push(Reverse((0u64, i)));
            }
        }
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v].is_some() {
                continue;
            }
            dist[v] = Some(d);
            for &(u, c) in &pred[v] {
                if dist[u].is_none() {
                    heap.push(Reverse((d + c, u)));
                }
            }
        }
        dist
    }
}

/// Uniform-cost search; optimal cost from `init` to `goal`.
pub fn ucs(actions: &[Action], init: &State, goal: &[Literal]) -> Option<u64> {
    let mut best: HashMap<State, u64> = HashMap::from([(init.clone(), 0)]);
    let mut heap = BinaryHeap::from([Reverse((0u64, init.clone()))]);
    while let Some(Reverse((g, s))) = heap.pop() {
        if best.get(&s).is_some_and(|&b| b < g) {
            continue;
        }
        if holds(goal, &s) {
            return Some(g);
        }
        for a in actions.iter().filter(|a| a.applicable(&s)) {
            let t = apply(&s, a);
            let gt = g + a.cost as u64;
            if best.get(&t).is_none_or(|&b| gt < b) {
                best.insert(t.clone(), gt);
                heap.push(Reverse((gt, t)));
            }
        }
    }
    None
}

/// Every plan from `init` reaching `goal` at cost at most `c* + slack`,
/// visiting no state twice. `None` if more than `cap` plans exist.
pub fn plans_within(
    actions: &[Action],
    init: &State,
    goal: &[Literal],
    slack: u64,
    cap: usize,
) -> Option<Vec<Vec<usize>>> {
    let g = StateGraph::build(actions, init);
    let h = g.goal_distance(actions, goal);
    let Some(cstar) = h[0] else {
        return Some(Vec::new());
    };
    let bound = cstar + slack;
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; g.len()];
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        v: usize,
        cost: u64,
        bound: u64,
        g: &StateGraph,
        h: &[Option<u64>],
        actions: &[Action],
        goal: &[Literal],
        path: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        if holds(goal, &g.states[v]) {
            if out.len() == cap {
                return false;
            }
            out.push(path.clone());
        }
        on_path[v] = true;
        for &(a, t) in &g.succ[v] {
            let c = cost + actions[a].cost as u64;
            if on_path[t] || h[t].is_none_or(|ht| c + ht > bound) {
                continue;
            }
            path.push(a);
            let ok = dfs(t, c, bound, g, h, actions, goal, path, on_path, out, cap);
            path.pop();
            if !ok {
                return false;
            }
        }
        on_path[v] = false;
        true
    }
    dfs(0, 0, bound, &g, &h, actions, goal, &mut path, &mut on_path, &mut out, cap).then_some(out)
}

/// Plans exactly at optimal cost. With positive costs these never revisit a
/// state, so this is the full set.
pub fn optimal_plans(actions: &[Action], init: &State, goal: &[Literal], cap: usize) -> Option<Vec<Vec<usize>>> {
    plans_within(actions, init, goal, 0, cap)
}

/// Last 1-based step requiring `fact`; |plan| + 1 if the goal needs it; 0 otherwise.
pub fn laststep(fact: FactId, plan: &[usize], actions: &[Action], goal: &[Literal]) -> u64 {
    if goal.iter().any(|l| l.positive && l.fact == fact) {
        return plan.len() as u64 + 1;
    }
    let mut last = 0;
    for (i, &a) in plan.iter().enumerate() {
        if actions[a].pre.contains(&fact) {
            last = i as u64 + 1;
        }
    }
    last
}

/// Landmark soundness per fact: for facts outside the initial state, deleting
/// every achiever makes the goal unreachable; for initial facts, the fact is
/// a positive goal or some precondition uses it in every plan up to c* + 1.
pub fn is_sound_landmark(task: &PlanningTask, f: FactId) -> Result<bool, &'static str> {
    if task.goal.iter().any(|l| l.positive && l.fact == f) {
        return Ok(true);
    }
    if !task.init.contains(f) {
        let rest: Vec<Action> = task.actions.iter().filter(|a| !a.add.contains(&f)).cloned().collect();
        return Ok(ucs(&rest, &task.init, &task.goal).is_none());
    }
    let plans = plans_within(&task.actions, &task.init, &task.goal, 1, 200_000).ok_or("plan cap")?;
    Ok(plans.iter().all(|p| p.iter().any(|&a| task.actions[a].pre.contains(&f))))
}

/// Shape of a random STRIPS task.
#[derive(Clone, Copy, Debug)]
pub struct RandomShape {
    pub facts: usize,
    pub actions: usize,
    pub max_cost: u32,
}

impl RandomShape {
    pub const SMALL: RandomShape = RandomShape { facts: 9, actions: 12, max_cost: 1 };
}

/// `k` distinct facts out of `n`, with `k` drawn from `count`.
fn pick(rng: &mut ChaCha8Rng, n: usize, count: std::ops::RangeInclusive<usize>) -> Vec<FactId> {
    let k = rng.gen_range(count);
    let all: Vec<u32> = (0..n as u32).collect();
    all.choose_multiple(rng, k).map(|&i| FactId(i)).collect()
}

pub fn fact_table(n: usize) -> Arc<FactTable> {
    Arc::new(FactTable::from_names((0..n).map(|i| format!("(p{i})"))))
}

/// Actions that consume one of their preconditions and produce one or two
/// facts, like moves and transformations.
pub fn random_actions(rng: &mut ChaCha8Rng, prefix: &str, n_facts: usize, n: usize, max_cost: u32) -> Vec<Action> {
    (0..n)
        .map(|i| {
            let pre = pick(rng, n_facts, 1..=2);
            let add = pick(rng, n_facts, 1..=2);
            let mut del = vec![];
            if rng.gen_bool(0.7) {
                del.push(pre[0]);
            }
            if rng.gen_bool(0.2) {
                del.extend(pick(rng, n_facts, 1..=1));
            }
            Action::new(format!("({prefix}{i})"), pre, add, del, rng.gen_range(1..=max_cost))
        })
        .collect()
}

/// A solvable random task with 1 or 2 positive goal facts.
pub fn random_task(seed: u64, shape: RandomShape) -> PlanningTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let facts = fact_table(shape.facts);
        let actions = random_actions(&mut rng, "a", shape.facts, shape.actions, shape.max_cost);
        let init = State::from_facts(shape.facts, pick(&mut rng, shape.facts, 2..=3));
        let goal: Vec<Literal> = pick(&mut rng, shape.facts, 1..=2).into_iter().map(Literal::pos).collect();
        if holds(&goal, &init) || ucs(&actions, &init, &goal).is_none() {
            continue;
        }
        return PlanningTask::new(facts, Arc::new(actions), init, goal);
    }
}

/// A random counterplanning task over one shared fact table: seeker actions,
/// preventer actions that only delete (and occasionally add), and 1 to 3
/// candidate goals, each solvable by the seeker from the initial state.
pub fn random_counterplanning(seed: u64, shape: RandomShape) -> CounterplanningTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = shape.facts;
        let facts = fact_table(n);
        let seek = random_actions(&mut rng, "s", n, shape.actions, 1);
        let prev: Vec<Action> = (0..rng.gen_range(3..=6))
            .map(|i| {
                let pre = pick(&mut rng, n, 1..=1);
                let del = pick(&mut rng, n, 1..=2);
                let add = if rng.gen_bool(0.3) { pick(&mut rng, n, 1..=1) } else { vec![] };
                Action::new(format!("(x{i})"), pre, add, del, 1)
            })
            .collect();
        let init = State::from_facts(n, pick(&mut rng, n, 2..=4));
        let k = rng.gen_range(1..=3);
        let candidates: Vec<Candidate> = (0..k)
            .map(|i| Candidate {
                name: format!("g{i}"),
                goal: pick(&mut rng, n, 1..=2).into_iter().map(Literal::pos).collect(),
            })
            .collect();
        if candidates.iter().any(|c| holds(&c.goal, &init) || ucs(&seek, &init, &c.goal).is_none()) {
            continue;
        }
        let seek_task = PlanningTask::new(facts.clone(), Arc::new(seek), init.clone(), candidates[0].goal.clone());
        let prev_task = PlanningTask::new(facts, Arc::new(prev), init, Vec::new());
        return CounterplanningTask { seek: seek_task, prev: prev_task, candidates, observations: Vec::new() };
    }
}

/// (fact, preventer cost, smallest laststep) as computed by the oracle.
pub type OracleEntry = (FactId, u64, u64);

/// Oracle for the common counterplanning landmarks of the live candidates
/// from `state`. Landmark membership is taken from the extractor; the
/// optimal plans and the preventer costs come from exhaustive search.
/// `None` when some candidate has more optimal plans than `cap`.
pub fn cpl_oracle(
    c: &CounterplanningTask,
    state: &State,
    live: &[usize],
    cap: usize,
) -> Option<(Vec<OracleEntry>, Vec<Vec<OracleEntry>>)> {
    let seek = &c.seek.actions;
    let mut per_goal: Vec<(Vec<FactId>, HashMap<FactId, u64>)> = Vec::new();
    for &i in live {
        let goal = &c.candidates[i].goal;
        let plans = optimal_plans(seek, state, goal, cap)?;
        if plans.is_empty() {
            continue;
        }
        let task = c.seek.with_init(state.clone()).with_goal(goal.clone());
        let lms: Vec<FactId> = extract_landmarks(&task)
            .landmarks
            .into_iter()
            .filter(|f| c.prev.actions.iter().any(|a| a.del.contains(f)))
            .collect();
        let min_ls = lms
            .iter()
            .map(|&f| (f, plans.iter().map(|p| laststep(f, p, seek, goal)).min().expect("nonempty")))
            .collect();
        per_goal.push((lms, min_ls));
    }
    let prev_cost = |f: FactId| ucs(&c.prev.actions, state, &[Literal::neg(f)]);
    let admit = |f: FactId, ls: u64| -> Option<OracleEntry> {
        let pc = prev_cost(f)?;
        (ls >= 1 && pc <= ls).then_some((f, pc, ls))
    };
    let individual: Vec<Vec<OracleEntry>> =
        per_goal.iter().map(|(lms, ls)| lms.iter().filter_map(|&f| admit(f, ls[&f])).collect()).collect();
    let mut common = Vec::new();
    if let Some(((first, _), _)) = per_goal.split_first() {
        for &f in first {
            if per_goal.iter().all(|(l, _)| l.contains(&f)) {
                let ls = per_goal.iter().map(|(_, m)| m[&f]).min().expect("nonempty");
                common.extend(admit(f, ls));
            }
        }
    }
    common.sort();
    Some((common, individual))
}
