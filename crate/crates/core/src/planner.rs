//! Optimal sequential planning: A* with h_max, optimal-cost queries, and the
//! graph of all cost-optimal plans.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::HMax;
use crate::strips::{apply_effects, Action, Literal, Plan, PlanningTask, State};

pub const DEFAULT_MAX_NODES: usize = 1_000_000;
pub const DEFAULT_MAX_TIME: Duration = Duration::from_secs(600);

/// Per-call search limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: usize,
    pub max_time: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_nodes: DEFAULT_MAX_NODES, max_time: Some(DEFAULT_MAX_TIME) }
    }
}

impl Budget {
    pub fn nodes(max_nodes: usize) -> Self {
        Budget { max_nodes, max_time: None }
    }

    fn deadline(&self) -> Option<Instant> {
        self.max_time.map(|d| Instant::now() + d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Solved,
    Unsolvable,
    ResourceLimit,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub plan: Option<Plan>,
    pub cost: Option<u64>,
    pub expanded: usize,
    pub status: SearchStatus,
}

impl SearchResult {
    fn unsolved(status: SearchStatus, expanded: usize) -> Self {
        SearchResult { plan: None, cost: None, expanded, status }
    }
}

pub fn goal_holds(goal: &[Literal], s: &State) -> bool {
    goal.iter().all(|l| l.holds(s))
}

struct Node {
    state: State,
    g: u64,
    parent: u32,
    action: u32,
}

const ROOT: u32 = u32::MAX;

/// A* search over an explicit state space. Ties on f are broken by smaller
/// h, then by insertion order; successors are generated in action order.
pub fn solve(actions: &[Action], hmax: &HMax, init: &State, goal: &[Literal], budget: &Budget) -> SearchResult {
    let deadline = budget.deadline();
    let Some(h0) = hmax.estimate(init, goal, actions) else {
        return SearchResult::unsolved(SearchStatus::Unsolvable, 0);
    };
    let mut nodes = vec![Node { state: init.clone(), g: 0, parent: ROOT, action: 0 }];
    let mut index: HashMap<State, u32> = HashMap::new();
    index.insert(init.clone(), 0);
    let mut closed = vec![false];
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    open.push(Reverse((h0, h0, seq, 0u32)));
    let mut expanded = 0usize;
    while let Some(Reverse((_, _, _, id))) = open.pop() {
        let id = id as usize;
        if closed[id] {
            continue;
        }
        closed[id] = true;
        let (state, g) = (nodes[id].state.clone(), nodes[id].g);
        if goal_holds(goal, &state) {
            let mut steps = Vec::new();
            let mut cur = id as u32;
            while nodes[cur as usize].parent != ROOT {
                steps.push(actions[nodes[cur as usize].action as usize].clone());
                cur = nodes[cur as usize].parent;
            }
            steps.reverse();
            return SearchResult {
                plan: Some(Plan::new(steps)),
                cost: Some(g),
                expanded,
                status: SearchStatus::Solved,
            };
        }
        expanded += 1;
        if expanded > budget.max_nodes || (expanded.is_multiple_of(256) && deadline.is_some_and(|d| Instant::now() > d))
        {
            return SearchResult::unsolved(SearchStatus::ResourceLimit, expanded);
        }
        for (ai, a) in actions.iter().enumerate() {
            if !a.applicable(&state) {
                continue;
            }
            let mut next = state.clone();
            apply_effects(&mut next, a);
            let ng = g + a.cost as u64;
            let nid = match index.get(&next) {
                Some(&n) => {
                    if ng >= nodes[n as usize].g {
                        continue;
                    }
                    nodes[n as usize].g = ng;
                    nodes[n as usize].parent = id as u32;
                    nodes[n as usize].action = ai as u32;
                    closed[n as usize] = false;
                    n
                }
                None => {
                    let n = nodes.len() as u32;
                    index.insert(next.clone(), n);
                    nodes.push(Node { state: next.clone(), g: ng, parent: id as u32, action: ai as u32 });
                    closed.push(false);
                    n
                }
            };
            let Some(h) = hmax.estimate(&next, goal, actions) else {
                closed[nid as usize] = true;
                continue;
            };
            seq += 1;
            open.push(Reverse((ng + h, h, seq, nid)));
        }
    }
    SearchResult::unsolved(SearchStatus::Unsolvable, expanded)
}

/// Optimal planner bound to one action set; the heuristic index is built once.
#[derive(Clone, Debug)]
pub struct Planner {
    pub actions: std::sync::Arc<Vec<Action>>,
    hmax: HMax,
    pub budget: Budget,
}

impl Planner {
    pub fn new(n_facts: usize, actions: std::sync::Arc<Vec<Action>>, budget: Budget) -> Self {
        let hmax = HMax::new(n_facts, &actions);
        Planner { actions, hmax, budget }
    }

    pub fn for_task(task: &PlanningTask, budget: Budget) -> Self {
        Planner::new(task.n_facts(), task.actions.clone(), budget)
    }

    pub fn solve(&self, init: &State, goal: &[Literal]) -> SearchResult {
        solve(&self.actions, &self.hmax, init, goal, &self.budget)
    }

    /// h*(init, goal); `Ok(None)` when unsolvable.
    pub fn optimal_cost(&self, init: &State, goal: &[Literal]) -> Result<Option<u64>> {
        let r = self.solve(init, goal);
        match r.status {
            SearchStatus::Solved => Ok(r.cost),
            SearchStatus::Unsolvable => Ok(None),
            SearchStatus::ResourceLimit => Err(Error::ResourceLimit { expanded: r.expanded }),
        }
    }

    pub fn h_max(&self, s: &State, goal: &[Literal]) -> Option<u64> {
        self.hmax.estimate(s, goal, &self.actions)
    }

    pub fn hmax(&self) -> &HMax {
        &self.hmax
    }

    pub fn optimal_dag(&self, init: &State, goal: &[Literal]) -> Result<Option<OptimalDag>> {
        OptimalDag::build(self, init, goal)
    }
}

pub fn solve_optimal(task: &PlanningTask, budget: &Budget) -> SearchResult {
    Planner::for_task(task, *budget).solve(&task.init, &task.goal)
}

pub fn optimal_cost(init: &State, goal: &[Literal], task: &PlanningTask, budget: &Budget) -> Result<Option<u64>> {
    Planner::for_task(task, *budget).optimal_cost(init, goal)
}

/// All optimal plans of a task, as an explicit graph: every path from the
/// root along `edges` to a state in `goals` is a cost-optimal plan, and every
/// optimal plan is such a path.
#[derive(Clone, Debug)]
pub struct OptimalDag {
    pub cost: u64,
    pub states: Vec<State>,
    /// Optimal outgoing edges per state: (action index, target state index).
    pub edges: Vec<Vec<(u32, u32)>>,
    pub is_goal: Vec<bool>,
    /// Minimum number of steps from the root along the graph.
    pub depth: Vec<u32>,
}

impl OptimalDag {
    fn build(planner: &Planner, init: &State, goal: &[Literal]) -> Result<Option<OptimalDag>> {
        let actions = &planner.actions;
        if let Some(a) = actions.iter().find(|a| a.cost == 0) {
            return Err(Error::ZeroCostAction(a.name.clone()));
        }
        let Some(cstar) = planner.optimal_cost(init, goal)? else {
            return Ok(None);
        };
        // Uniform-cost sweep over states with g + h_max <= C*, recording
        // every transition inside that region.
        let deadline = planner.budget.deadline();
        let mut states = vec![init.clone()];
        let mut g = vec![0u64];
        let mut index: HashMap<State, u32> = HashMap::from([(init.clone(), 0)]);
        let mut succ: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
        let mut done = vec![false];
        let mut open = BinaryHeap::from([Reverse((0u64, 0u32))]);
        let mut expanded = 0usize;
        while let Some(Reverse((gc, id))) = open.pop() {
            let idu = id as usize;
            if done[idu] || gc > g[idu] {
                continue;
            }
            done[idu] = true;
            if goal_holds(goal, &states[idu]) {
                continue;
            }
            expanded += 1;
            if expanded > planner.budget.max_nodes
                || (expanded.is_multiple_of(256) && deadline.is_some_and(|d| Instant::now() > d))
            {
                return Err(Error::ResourceLimit { expanded });
            }
            let s = states[idu].clone();
            for (ai, a) in actions.iter().enumerate() {
                if !a.applicable(&s) {
                    continue;
                }
                let mut t = s.clone();
                apply_effects(&mut t, a);
                let ng = gc + a.cost as u64;
                if ng > cstar {
                    continue;
                }
                let tid = match index.get(&t) {
                    Some(&x) => x,
                    None => {
                        let Some(h) = planner.h_max(&t, goal) else { continue };
                        if ng + h > cstar {
                            continue;
                        }
                        let x = states.len() as u32;
                        index.insert(t.clone(), x);
                        states.push(t);
                        g.push(u64::MAX);
                        succ.push(Vec::new());
                        done.push(false);
                        x
                    }
                };
                succ[idu].push((ai as u32, tid));
                if ng < g[tid as usize] {
                    g[tid as usize] = ng;
                    open.push(Reverse((ng, tid)));
                }
            }
        }
        let n = states.len();
        let is_goal: Vec<bool> = (0..n).map(|i| g[i] == cstar && goal_holds(goal, &states[i])).collect();
        // Keep edges that are g-optimal, then those that can still reach a goal.
        let mut edges: Vec<Vec<(u32, u32)>> = (0..n)
            .map(|i| {
                succ[i]
                    .iter()
                    .copied()
                    .filter(|&(ai, t)| g[i] != u64::MAX && g[i] + actions[ai as usize].cost as u64 == g[t as usize])
                    .collect()
            })
            .collect();
        let mut order: Vec<usize> = (0..n).filter(|&i| g[i] != u64::MAX).collect();
        order.sort_by_key(|&i| Reverse(g[i]));
        let mut useful = is_goal.clone();
        for &i in &order {
            edges[i].retain(|&(_, t)| useful[t as usize]);
            if !edges[i].is_empty() {
                useful[i] = true;
            }
        }
        let mut depth = vec![u32::MAX; n];
        depth[0] = 0;
        order.reverse();
        for &i in &order {
            if depth[i] == u32::MAX || !useful[i] {
                continue;
            }
            for &(_, t) in &edges[i] {
                depth[t as usize] = depth[t as usize].min(depth[i] + 1);
            }
        }
        Ok(Some(OptimalDag { cost: cstar, states, edges, is_goal, depth }))
    }

    /// States in topological order (non-decreasing depth is not enough with
    /// mixed costs, so this walks by reverse postorder).
    pub fn topo_order(&self) -> Vec<usize> {
        let n = self.states.len();
        let mut seen = vec![false; n];
        let mut post = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        seen[0] = true;
        while let Some((v, k)) = stack.pop() {
            if k < self.edges[v].len() {
                stack.push((v, k + 1));
                let t = self.edges[v][k].1 as usize;
                if !seen[t] {
                    seen[t] = true;
                    stack.push((t, 0));
                }
            } else {
                post.push(v);
            }
        }
        post.reverse();
        post
    }

    /// Smallest possible `laststep` of `fact` over all optimal plans: the last
    /// 1-based step whose action requires it, `|plan| + 1` when the goal needs
    /// it, 0 when some optimal plan never needs it.
    pub fn min_laststep(&self, actions: &[Action], fact: crate::strips::FactId, goal: &[Literal]) -> u64 {
        if goal.iter().any(|l| l.positive && l.fact == fact) {
            let best = (0..self.states.len()).filter(|&i| self.is_goal[i]).map(|i| self.depth[i]).min();
            return best.map_or(0, |d| d as u64 + 1);
        }
        // free_to_goal[v]: some path v → goal uses no action requiring `fact`.
        let order = self.topo_order();
        let mut free_to_goal = self.is_goal.clone();
        for &v in order.iter().rev() {
            if self.edges[v].iter().any(|&(a, t)| !actions[a as usize].requires(fact) && free_to_goal[t as usize]) {
                free_to_goal[v] = true;
            }
        }
        if free_to_goal[0] {
            return 0;
        }
        let mut best = u64::MAX;
        for &v in &order {
            for &(a, t) in &self.edges[v] {
                if actions[a as usize].requires(fact) && free_to_goal[t as usize] {
                    best = best.min(self.depth[v] as u64 + 1);
                }
            }
        }
        best
    }

    /// Depth-first enumeration of the graph's root-to-goal paths, at most `cap`.
    pub fn plans(&self, actions: &[Action], cap: usize) -> (Vec<Plan>, bool) {
        let mut out = Vec::new();
        let to_plan = |path: &[u32]| Plan::new(path.iter().map(|&a| actions[a as usize].clone()).collect());
        if self.is_goal[0] {
            if cap == 0 {
                return (out, false);
            }
            out.push(Plan::empty());
        }
        let mut path: Vec<u32> = Vec::new();
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        while let Some((v, k)) = stack.last_mut() {
            if *k < self.edges[*v].len() {
                let (a, t) = self.edges[*v][*k];
                *k += 1;
                path.push(a);
                if self.is_goal[t as usize] {
                    if out.len() == cap {
                        return (out, false);
                    }
                    out.push(to_plan(&path));
                }
                stack.push((t as usize, 0));
            } else {
                stack.pop();
                path.pop();
            }
        }
        (out, true)
    }
}

/// Set of cost-optimal plans.
#[derive(Clone, Debug)]
pub struct PlanSet {
    pub plans: Vec<Plan>,
    pub cost: Option<u64>,
    pub complete: bool,
}

pub fn enumerate_optimal_plans(task: &PlanningTask, cap: usize, budget: &Budget) -> Result<PlanSet> {
    let planner = Planner::for_task(task, *budget);
    match planner.optimal_dag(&task.init, &task.goal)? {
        None => Ok(PlanSet { plans: Vec::new(), cost: None, complete: true }),
        Some(dag) => {
            let (plans, complete) = dag.plans(&task.actions, cap);
            Ok(PlanSet { plans, cost: Some(dag.cost), complete })
        }
    }
}
