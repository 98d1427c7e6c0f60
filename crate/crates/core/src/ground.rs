//! Grounding of lifted tasks into STRIPS over a shared fact table.
//!
//! Several agents (lifted tasks over the same objects) are grounded jointly so
//! their actions speak about one fact universe. Static predicates (never
//! changed by any schema of any agent) are checked at grounding time and
//! dropped from preconditions. Negative preconditions on fluents are compiled
//! to `(not-p ...)` twin facts kept consistent by every action's effects.
//! Actions unreachable under the delete relaxation of all agents' actions
//! together are pruned.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pddl::{self, Atom, LiftedTask, Lit, TypeTable};
use crate::strips::{Action, FactId, FactTable, Literal, PlanningTask, State};

/// Default cap on enumerated parameter bindings across all schemas.
pub const DEFAULT_GROUNDING_CAP: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct GroundOptions {
    pub cap: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions { cap: DEFAULT_GROUNDING_CAP }
    }
}

/// Result of grounding one or more agents together.
#[derive(Clone, Debug)]
pub struct JointGrounding {
    pub facts: Arc<FactTable>,
    /// Union of all agents' initial states.
    pub init: State,
    pub agents: Vec<GroundAgent>,
}

#[derive(Clone, Debug)]
pub struct GroundAgent {
    pub actions: Arc<Vec<Action>>,
    pub goal: Vec<Literal>,
}

impl JointGrounding {
    /// Planning task for agent `i` starting from the joint initial state.
    pub fn task(&self, i: usize) -> PlanningTask {
        PlanningTask::new(
            self.facts.clone(),
            self.agents[i].actions.clone(),
            self.init.clone(),
            self.agents[i].goal.clone(),
        )
    }

    /// Grounds a condition over the shared fact table.
    pub fn ground_condition(&self, lits: &[Lit]) -> Result<Vec<Literal>> {
        ground_lits(&self.facts, lits)
    }
}

fn ground_lits(facts: &FactTable, lits: &[Lit]) -> Result<Vec<Literal>> {
    let mut out = Vec::new();
    for l in lits {
        let name = l.atom.render();
        let id = facts.get(&name).ok_or(Error::UnknownFact(name))?;
        out.push(Literal { fact: id, positive: l.positive });
    }
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn twin_name(atom: &Atom) -> String {
    let negated = Atom { pred: format!("not-{}", atom.pred), args: atom.args.clone() };
    negated.render()
}

/// Grounds a single task.
pub fn ground(task: &LiftedTask) -> Result<PlanningTask> {
    Ok(ground_joint(&[task], &[], &GroundOptions::default())?.task(0))
}

struct Candidate {
    agent: usize,
    name: String,
    pos_pre: Vec<Atom>,
    neg_pre: Vec<Atom>,
    add: Vec<Atom>,
    del: Vec<Atom>,
}

fn substitute(atom: &Atom, binding: &HashMap<&str, &str>) -> Atom {
    Atom {
        pred: atom.pred.clone(),
        args: atom
            .args
            .iter()
            .map(|a| binding.get(a.as_str()).map(|s| s.to_string()).unwrap_or_else(|| a.clone()))
            .collect(),
    }
}

/// Grounds several agents' tasks jointly. `extra` holds further conditions
/// (such as candidate goals) whose atoms must exist in the fact table.
pub fn ground_joint(tasks: &[&LiftedTask], extra: &[Vec<Lit>], opts: &GroundOptions) -> Result<JointGrounding> {
    let mut fluent_preds: HashSet<&str> = HashSet::new();
    for t in tasks {
        for a in &t.domain.actions {
            for e in &a.eff {
                fluent_preds.insert(e.atom.pred.as_str());
            }
        }
    }
    let mut init_atoms: BTreeSet<Atom> = BTreeSet::new();
    for t in tasks {
        init_atoms.extend(t.problem.init.iter().cloned());
    }
    let init_rendered: HashSet<String> = init_atoms.iter().map(Atom::render).collect();

    let mut budget = opts.cap;
    let mut candidates = Vec::new();
    for (agent, t) in tasks.iter().enumerate() {
        let types = TypeTable::new(&t.domain.types);
        let objs = pddl::object_types(&t.domain, &t.problem);
        for schema in &t.domain.actions {
            let domains: Vec<Vec<&str>> = schema
                .params
                .iter()
                .map(|p| objs.iter().filter(|(_, ty)| types.is_subtype(ty, &p.ty)).map(|(o, _)| *o).collect())
                .collect();
            let pos: HashMap<&str, usize> =
                schema.params.iter().enumerate().map(|(i, p)| (p.name.as_str(), i)).collect();
            // Static preconditions are checked as soon as their last variable is bound.
            let mut checks: Vec<Vec<&Lit>> = vec![Vec::new(); schema.params.len() + 1];
            for l in &schema.pre {
                if fluent_preds.contains(l.atom.pred.as_str()) {
                    continue;
                }
                let depth = l.atom.args.iter().filter_map(|a| pos.get(a.as_str())).map(|i| i + 1).max().unwrap_or(0);
                checks[depth].push(l);
            }
            let mut binding: HashMap<&str, &str> = HashMap::new();
            let static_ok = |binding: &HashMap<&str, &str>, lits: &[&Lit]| {
                lits.iter().all(|l| init_rendered.contains(&substitute(&l.atom, binding).render()) == l.positive)
            };
            if !static_ok(&binding, &checks[0]) {
                continue;
            }
            let n = schema.params.len();
            // Iterative backtracking over parameter values.
            let mut idx = vec![0usize; n];
            let mut depth = 0usize;
            loop {
                if n == 0 {
                    candidates.push(instantiate(agent, schema, &binding, &fluent_preds));
                    break;
                }
                if idx[depth] >= domains[depth].len() {
                    if depth == 0 {
                        break;
                    }
                    binding.remove(schema.params[depth].name.as_str());
                    idx[depth] = 0;
                    depth -= 1;
                    idx[depth] += 1;
                    continue;
                }
                if budget == 0 {
                    return Err(Error::GroundingCap { cap: opts.cap });
                }
                budget -= 1;
                binding.insert(schema.params[depth].name.as_str(), domains[depth][idx[depth]]);
                if !static_ok(&binding, &checks[depth + 1]) {
                    idx[depth] += 1;
                    continue;
                }
                if depth + 1 == n {
                    candidates.push(instantiate(agent, schema, &binding, &fluent_preds));
                    idx[depth] += 1;
                } else {
                    depth += 1;
                }
            }
        }
    }

    // Relaxed reachability over all agents' candidates together.
    let mut reached: HashSet<Atom> =
        init_atoms.iter().filter(|a| fluent_preds.contains(a.pred.as_str())).cloned().collect();
    let mut alive = vec![false; candidates.len()];
    loop {
        let mut changed = false;
        for (i, c) in candidates.iter().enumerate() {
            if alive[i] || !c.pos_pre.iter().all(|p| reached.contains(p)) {
                continue;
            }
            alive[i] = true;
            changed = true;
            for a in &c.add {
                reached.insert(a.clone());
            }
        }
        if !changed {
            break;
        }
    }
    let live: Vec<&Candidate> = candidates.iter().zip(alive).filter(|(_, ok)| *ok).map(|(c, _)| c).collect();

    let mut names: BTreeSet<String> = BTreeSet::new();
    let mut twins: BTreeMap<String, String> = BTreeMap::new();
    for a in &init_atoms {
        names.insert(a.render());
    }
    for a in &reached {
        names.insert(a.render());
    }
    for t in tasks {
        for g in &t.problem.goal {
            names.insert(g.atom.render());
        }
    }
    for cond in extra {
        for l in cond {
            names.insert(l.atom.render());
        }
    }
    for c in &live {
        for p in &c.neg_pre {
            let base = p.render();
            twins.insert(twin_name(p), base.clone());
            names.insert(base);
        }
    }
    for t in twins.keys() {
        names.insert(t.clone());
    }
    let mut facts = FactTable::from_names(names.iter().cloned());
    for (twin, base) in &twins {
        let (t, b) = (facts.get(twin).unwrap(), facts.get(base).unwrap());
        facts.set_twin(t, b);
    }
    let twin_of_base: HashMap<FactId, FactId> =
        twins.iter().map(|(t, b)| (facts.get(b).unwrap(), facts.get(t).unwrap())).collect();

    let mut init = State::empty(facts.len());
    for a in &init_atoms {
        init.insert(facts.get(&a.render()).unwrap());
    }
    for (base, twin) in &twin_of_base {
        if !init.contains(*base) {
            init.insert(*twin);
        }
    }

    let mut per_agent: Vec<Vec<Action>> = vec![Vec::new(); tasks.len()];
    for c in live {
        let id = |a: &Atom| facts.get(&a.render());
        let mut pre: Vec<FactId> = c.pos_pre.iter().map(|a| id(a).unwrap()).collect();
        for p in &c.neg_pre {
            pre.push(facts.get(&twin_name(p)).unwrap());
        }
        let mut add: Vec<FactId> = c.add.iter().map(|a| id(a).unwrap()).collect();
        let mut del: Vec<FactId> = c.del.iter().filter_map(id).collect();
        for f in add.clone() {
            if let Some(t) = twin_of_base.get(&f) {
                del.push(*t);
            }
        }
        for f in del.clone() {
            if let Some(t) = twin_of_base.get(&f) {
                if !add.contains(&f) {
                    add.push(*t);
                }
            }
        }
        per_agent[c.agent].push(Action::new(c.name.clone(), pre, add, del, 1));
    }
    let mut agents = Vec::new();
    for (i, mut acts) in per_agent.into_iter().enumerate() {
        acts.sort_by(|a, b| a.name.cmp(&b.name));
        acts.dedup_by(|a, b| a.name == b.name);
        let goal = ground_lits(&facts, &tasks[i].problem.goal)?;
        agents.push(GroundAgent { actions: Arc::new(acts), goal });
    }
    Ok(JointGrounding { facts: Arc::new(facts), init, agents })
}

fn instantiate(
    agent: usize,
    schema: &pddl::ActionSchema,
    binding: &HashMap<&str, &str>,
    fluent: &HashSet<&str>,
) -> Candidate {
    let args: Vec<String> = schema.params.iter().map(|p| binding[p.name.as_str()].to_string()).collect();
    let name = Atom { pred: schema.name.clone(), args }.render();
    let mut c = Candidate { agent, name, pos_pre: Vec::new(), neg_pre: Vec::new(), add: Vec::new(), del: Vec::new() };
    for l in &schema.pre {
        if !fluent.contains(l.atom.pred.as_str()) {
            continue;
        }
        let a = substitute(&l.atom, binding);
        if l.positive {
            c.pos_pre.push(a);
        } else {
            c.neg_pre.push(a);
        }
    }
    for l in &schema.eff {
        let a = substitute(&l.atom, binding);
        if l.positive {
            c.add.push(a);
        } else {
            c.del.push(a);
        }
    }
    c
}
