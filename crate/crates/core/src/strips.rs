//! Grounded STRIPS representation and single-agent execution semantics.
//!
//! Facts are dense indices into a [`FactTable`]; states are bitsets over that
//! table. Several tasks may share one table (the seeker and preventer of a
//! counterplanning task do), which is what makes composite states possible.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Name of the distinguished do-nothing action every agent can execute.
pub const NOOP_NAME: &str = "(no-op)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FactId(pub u32);

impl FactId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Bijection between fact names and dense ids.
///
/// `twin_of[t] = Some(p)` marks `t` as the compiled "not-p" companion of `p`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactTable {
    names: Vec<String>,
    index: HashMap<String, FactId>,
    twin_of: Vec<Option<FactId>>,
}

impl FactTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from names in the given order. Duplicate names are an
    /// invariant violation and panic.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = Self::new();
        for n in names {
            let n = n.into();
            assert!(!table.index.contains_key(&n), "duplicate fact name {n}");
            table.push(n);
        }
        table
    }

    /// Returns the id of `name`, inserting it when absent.
    pub fn intern(&mut self, name: &str) -> FactId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        self.push(name.to_string())
    }

    fn push(&mut self, name: String) -> FactId {
        let id = FactId(self.names.len() as u32);
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.twin_of.push(None);
        id
    }

    pub fn set_twin(&mut self, twin: FactId, base: FactId) {
        self.twin_of[twin.index()] = Some(base);
    }

    pub fn twin_base(&self, id: FactId) -> Option<FactId> {
        self.twin_of[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<FactId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: FactId) -> &str {
        &self.names[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = FactId> {
        (0..self.names.len() as u32).map(FactId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// A fact together with the truth value it is required to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub fact: FactId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(fact: FactId) -> Self {
        Literal { fact, positive: true }
    }

    pub fn neg(fact: FactId) -> Self {
        Literal { fact, positive: false }
    }

    pub fn negate(self) -> Self {
        Literal { fact: self.fact, positive: !self.positive }
    }

    #[inline]
    pub fn holds(&self, s: &State) -> bool {
        s.contains(self.fact) == self.positive
    }

    /// Renders the literal the way PDDL would write it. A negated twin fact
    /// is shown as its positive base.
    pub fn display(&self, facts: &FactTable) -> String {
        if self.positive {
            return facts.name(self.fact).to_string();
        }
        match facts.twin_base(self.fact) {
            Some(base) => facts.name(base).to_string(),
            None => format!("(not {})", facts.name(self.fact)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub name: String,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
    pub cost: u32,
}

impl Action {
    /// Creates an action; the fact lists are sorted and de-duplicated, and a
    /// fact both added and deleted stays added.
    pub fn new(
        name: impl Into<String>,
        mut pre: Vec<FactId>,
        mut add: Vec<FactId>,
        mut del: Vec<FactId>,
        cost: u32,
    ) -> Self {
        pre.sort_unstable();
        pre.dedup();
        add.sort_unstable();
        add.dedup();
        del.sort_unstable();
        del.dedup();
        del.retain(|f| add.binary_search(f).is_err());
        Action { name: name.into(), pre, add, del, cost }
    }

    pub fn noop() -> Self {
        Action { name: NOOP_NAME.to_string(), pre: Vec::new(), add: Vec::new(), del: Vec::new(), cost: 0 }
    }

    pub fn is_noop(&self) -> bool {
        self.name == NOOP_NAME && self.pre.is_empty() && self.add.is_empty() && self.del.is_empty()
    }

    #[inline]
    pub fn applicable(&self, s: &State) -> bool {
        self.pre.iter().all(|&f| s.contains(f))
    }

    pub fn requires(&self, f: FactId) -> bool {
        self.pre.binary_search(&f).is_ok()
    }

    pub fn adds(&self, f: FactId) -> bool {
        self.add.binary_search(&f).is_ok()
    }

    pub fn deletes(&self, f: FactId) -> bool {
        self.del.binary_search(&f).is_ok()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Set of true facts, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct State {
    words: Box<[u64]>,
}

impl State {
    pub fn empty(n_facts: usize) -> Self {
        State { words: vec![0u64; n_facts.div_ceil(64)].into_boxed_slice() }
    }

    pub fn from_facts(n_facts: usize, facts: impl IntoIterator<Item = FactId>) -> Self {
        let mut s = Self::empty(n_facts);
        for f in facts {
            s.insert(f);
        }
        s
    }

    #[inline]
    pub fn contains(&self, f: FactId) -> bool {
        let i = f.index();
        self.words.get(i / 64).is_some_and(|w| w & (1u64 << (i % 64)) != 0)
    }

    #[inline]
    pub fn insert(&mut self, f: FactId) {
        let i = f.index();
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, f: FactId) {
        let i = f.index();
        self.words[i / 64] &= !(1u64 << (i % 64));
    }

    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(FactId(wi as u32 * 64 + b))
            })
        })
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Same state re-encoded over a universe with `n_facts` facts; ids are kept.
    pub fn resized(&self, n_facts: usize) -> State {
        let mut s = State::empty(n_facts);
        for f in self.iter().filter(|f| f.index() < n_facts) {
            s.insert(f);
        }
        s
    }

    pub fn union(&self, other: &State) -> State {
        let words = self.words.iter().zip(other.words.iter()).map(|(a, b)| a | b).collect();
        State { words }
    }

    pub fn is_subset(&self, other: &State) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn names(&self, facts: &FactTable) -> Vec<String> {
        self.iter().map(|f| facts.name(f).to_string()).collect()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|x| x.0)).finish()
    }
}

/// γ: applies `a` when its preconditions hold, otherwise leaves `s` unchanged.
pub fn apply(s: &State, a: &Action) -> State {
    if !a.applicable(s) {
        return s.clone();
    }
    let mut next = s.clone();
    apply_effects(&mut next, a);
    next
}

#[inline]
pub(crate) fn apply_effects(s: &mut State, a: &Action) {
    for &f in &a.del {
        s.remove(f);
    }
    for &f in &a.add {
        s.insert(f);
    }
}

/// Γ: left fold of [`apply`] over the plan.
pub fn execute(s: &State, plan: &Plan) -> State {
    plan.steps.iter().fold(s.clone(), |acc, a| apply(&acc, a))
}

/// Like [`execute`] but fails on the first inapplicable step, returning its index.
pub fn execute_strict(s: &State, plan: &Plan) -> Result<State, usize> {
    let mut cur = s.clone();
    for (i, a) in plan.steps.iter().enumerate() {
        if !a.applicable(&cur) {
            return Err(i);
        }
        apply_effects(&mut cur, a);
    }
    Ok(cur)
}

pub fn plan_cost(plan: &Plan) -> u64 {
    plan.steps.iter().map(|a| a.cost as u64).sum()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Plan {
    pub steps: Vec<Action>,
}

impl Plan {
    pub fn new(steps: Vec<Action>) -> Self {
        Plan { steps }
    }

    pub fn empty() -> Self {
        Plan::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn cost(&self) -> u64 {
        plan_cost(self)
    }

    pub fn names(&self) -> Vec<String> {
        self.steps.iter().map(|a| a.name.clone()).collect()
    }

    /// Number of steps that are not the no-op.
    pub fn active_len(&self) -> usize {
        self.steps.iter().filter(|a| !a.is_noop()).count()
    }

    /// Plan text format: one action per line, then `; cost = N`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in &self.steps {
            out.push_str(&a.name);
            out.push('\n');
        }
        out.push_str(&format!("; cost = {}\n", self.cost()));
        out
    }

    /// Parses the plan text format against `actions`. Blank lines and `;`
    /// comments are skipped; `(no-op)` is always accepted.
    pub fn from_text(text: &str, actions: &[Action]) -> Result<Plan, String> {
        let by_name: HashMap<&str, &Action> = actions.iter().map(|a| (a.name.as_str(), a)).collect();
        let mut steps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with(';') {
                continue;
            }
            let norm = normalize_action_name(line);
            if norm == NOOP_NAME {
                steps.push(Action::noop());
                continue;
            }
            match by_name.get(norm.as_str()) {
                Some(a) => steps.push((*a).clone()),
                None => return Err(format!("line {}: unknown action {line}", lineno + 1)),
            }
        }
        Ok(Plan { steps })
    }
}

/// Lower-cases and collapses whitespace so `( MOVE  a b )` matches `(move a b)`.
pub fn normalize_action_name(s: &str) -> String {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<String> = inner.split_whitespace().map(|p| p.to_ascii_lowercase()).collect();
    format!("({})", parts.join(" "))
}

/// A grounded task ⟨F, A, I, G⟩. Facts and actions are shared behind `Arc`
/// so tasks that differ only in init or goal are cheap to derive.
#[derive(Clone, Debug)]
pub struct PlanningTask {
    pub facts: Arc<FactTable>,
    pub actions: Arc<Vec<Action>>,
    pub init: State,
    pub goal: Vec<Literal>,
}

impl PlanningTask {
    pub fn new(facts: Arc<FactTable>, actions: Arc<Vec<Action>>, init: State, goal: Vec<Literal>) -> Self {
        PlanningTask { facts, actions, init, goal }
    }

    pub fn with_goal(&self, goal: Vec<Literal>) -> Self {
        PlanningTask { goal, ..self.clone() }
    }

    pub fn with_init(&self, init: State) -> Self {
        PlanningTask { init, ..self.clone() }
    }

    pub fn n_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn goal_reached(&self, s: &State) -> bool {
        self.goal.iter().all(|l| l.holds(s))
    }

    pub fn action(&self, name: &str) -> Option<&Action> {
        let norm = normalize_action_name(name);
        self.actions.iter().find(|a| a.name == norm)
    }

    pub fn fact(&self, name: &str) -> Option<FactId> {
        self.facts.get(name)
    }

    /// Line-oriented dump: one fact per line, then one action per line with
    /// pre/add/del id lists.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for id in self.facts.ids() {
            out.push_str(&format!("fact {} {}\n", id.0, self.facts.name(id)));
        }
        let ids = |v: &[FactId]| v.iter().map(|f| f.0.to_string()).collect::<Vec<_>>().join(",");
        for a in self.actions.iter() {
            out.push_str(&format!(
                "action {} pre=[{}] add=[{}] del=[{}] cost={}\n",
                a.name,
                ids(&a.pre),
                ids(&a.add),
                ids(&a.del),
                a.cost
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(i: u32) -> FactId {
        FactId(i)
    }

    #[test]
    fn apply_fires_when_applicable() {
        let s = State::from_facts(2, [f(0)]);
        let a = Action::new("a", vec![f(0)], vec![f(1)], vec![f(0)], 1);
        assert_eq!(apply(&s, &a), State::from_facts(2, [f(1)]));
    }

    #[test]
    fn apply_absorbs_unmet_precondition() {
        let s = State::empty(2);
        let a = Action::new("a", vec![f(0)], vec![f(1)], vec![f(0)], 1);
        assert_eq!(apply(&s, &a), s);
    }

    #[test]
    fn noop_leaves_state() {
        let s = State::from_facts(2, [f(0)]);
        assert_eq!(apply(&s, &Action::noop()), s);
        assert!(Action::noop().is_noop());
        assert_eq!(Action::noop().cost, 0);
    }

    #[test]
    fn empty_plan_is_identity() {
        let s = State::from_facts(3, [f(2)]);
        assert_eq!(execute(&s, &Plan::empty()), s);
    }

    #[test]
    fn plan_cost_sums() {
        assert_eq!(plan_cost(&Plan::empty()), 0);
        let mk = |c| Action::new("x", vec![], vec![], vec![], c);
        assert_eq!(plan_cost(&Plan::new(vec![mk(1), mk(1), mk(1)])), 3);
        assert_eq!(plan_cost(&Plan::new(vec![mk(1), mk(2), mk(0)])), 3);
    }

    #[test]
    fn add_wins_over_delete() {
        let a = Action::new("a", vec![], vec![f(1)], vec![f(1), f(0)], 1);
        assert_eq!(a.del, vec![f(0)]);
    }

    #[test]
    fn strict_execution_reports_failing_step() {
        let a = Action::new("a", vec![f(0)], vec![f(1)], vec![f(0)], 1);
        let s = State::from_facts(2, [f(0)]);
        let p = Plan::new(vec![a.clone(), a]);
        assert_eq!(execute_strict(&s, &p), Err(1));
    }

    #[test]
    fn plan_text_round_trips() {
        let a = Action::new("(move a b)", vec![], vec![], vec![], 1);
        let p = Plan::new(vec![a.clone(), Action::noop()]);
        let text = p.to_text();
        assert!(text.ends_with("; cost = 1\n"));
        assert_eq!(Plan::from_text(&text, &[a]).unwrap(), p);
        assert!(Plan::from_text("(jump)", &[]).is_err());
    }

    #[test]
    fn twin_literal_display() {
        let mut t = FactTable::from_names(["(tapped b1)", "(not-tapped b1)"]);
        t.set_twin(FactId(1), FactId(0));
        assert_eq!(Literal::neg(FactId(1)).display(&t), "(tapped b1)");
        assert_eq!(Literal::neg(FactId(0)).display(&t), "(not (tapped b1))");
    }

    fn arb_action(n: u32) -> impl Strategy<Value = Action> {
        (
            proptest::collection::vec(0..n, 0..3),
            proptest::collection::vec(0..n, 0..3),
            proptest::collection::vec(0..n, 0..3),
        )
            .prop_map(|(p, a, d)| {
                Action::new(
                    "r",
                    p.into_iter().map(FactId).collect(),
                    a.into_iter().map(FactId).collect(),
                    d.into_iter().map(FactId).collect(),
                    1,
                )
            })
    }

    proptest! {
        #[test]
        fn execute_concatenation(
            init in proptest::collection::vec(0u32..8, 0..8),
            p1 in proptest::collection::vec(arb_action(8), 0..5),
            p2 in proptest::collection::vec(arb_action(8), 0..5),
        ) {
            let s = State::from_facts(8, init.into_iter().map(FactId));
            let (p1, p2) = (Plan::new(p1), Plan::new(p2));
            let mut joined = p1.clone();
            joined.steps.extend(p2.steps.iter().cloned());
            prop_assert_eq!(execute(&s, &joined), execute(&execute(&s, &p1), &p2));
        }

        #[test]
        fn failed_precondition_is_identity(
            init in proptest::collection::vec(0u32..8, 0..8),
            a in arb_action(8),
        ) {
            let s = State::from_facts(8, init.into_iter().map(FactId));
            if !a.applicable(&s) {
                prop_assert_eq!(apply(&s, &a), s);
            }
        }
    }
}
