//! The h_max delete-relaxation heuristic.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::strips::{Action, FactId, Literal, State};

pub const INF: u64 = u64::MAX;

/// Precomputed precondition index for one action set.
#[derive(Clone, Debug)]
pub struct HMax {
    n_facts: usize,
    pre_count: Vec<u32>,
    /// fact → actions having it as a precondition
    consumers: Vec<Vec<u32>>,
    /// fact → actions deleting it
    deleters: Vec<Vec<u32>>,
    free_actions: Vec<u32>,
}

impl HMax {
    pub fn new(n_facts: usize, actions: &[Action]) -> Self {
        let mut consumers = vec![Vec::new(); n_facts];
        let mut deleters = vec![Vec::new(); n_facts];
        let mut free_actions = Vec::new();
        let mut pre_count = Vec::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            pre_count.push(a.pre.len() as u32);
            if a.pre.is_empty() {
                free_actions.push(i as u32);
            }
            for f in &a.pre {
                consumers[f.index()].push(i as u32);
            }
            for f in &a.del {
                deleters[f.index()].push(i as u32);
            }
        }
        HMax { n_facts, pre_count, consumers, deleters, free_actions }
    }

    /// Relaxed cost of every fact and every action from `s`. With `stop`,
    /// the search ends once all listed facts are settled.
    fn costs(&self, s: &State, actions: &[Action], stop: Option<&[FactId]>) -> (Vec<u64>, Vec<u64>) {
        let mut fact_cost = vec![INF; self.n_facts];
        let mut act_cost = vec![INF; actions.len()];
        let mut remaining = self.pre_count.clone();
        let mut heap = BinaryHeap::new();
        for f in s.iter() {
            if f.index() < self.n_facts {
                fact_cost[f.index()] = 0;
                heap.push(Reverse((0u64, f.0)));
            }
        }
        let fire = |ai: usize, base: u64, heap: &mut BinaryHeap<Reverse<(u64, u32)>>, fact_cost: &mut Vec<u64>| {
            let a = &actions[ai];
            let c = base.saturating_add(a.cost as u64);
            for q in &a.add {
                if c < fact_cost[q.index()] {
                    fact_cost[q.index()] = c;
                    heap.push(Reverse((c, q.0)));
                }
            }
        };
        for &ai in &self.free_actions {
            act_cost[ai as usize] = 0;
            fire(ai as usize, 0, &mut heap, &mut fact_cost);
        }
        let mut pending = stop.map(|t| t.iter().filter(|f| fact_cost[f.index()] != 0).count());
        let mut settled = vec![false; self.n_facts];
        while let Some(Reverse((c, f))) = heap.pop() {
            let fi = f as usize;
            if settled[fi] || c > fact_cost[fi] {
                continue;
            }
            settled[fi] = true;
            if let (Some(p), Some(targets)) = (pending.as_mut(), stop) {
                if c > 0 && targets.contains(&FactId(f)) {
                    *p -= 1;
                }
                if *p == 0 {
                    break;
                }
            }
            for &ai in &self.consumers[fi] {
                let ai = ai as usize;
                remaining[ai] -= 1;
                if remaining[ai] == 0 {
                    act_cost[ai] = c;
                    fire(ai, c, &mut heap, &mut fact_cost);
                }
            }
        }
        (fact_cost, act_cost)
    }

    /// h_max(s, goal); `None` means unreachable even under the relaxation.
    pub fn estimate(&self, s: &State, goal: &[Literal], actions: &[Action]) -> Option<u64> {
        let pos: Vec<FactId> = goal.iter().filter(|l| l.positive).map(|l| l.fact).collect();
        let negs: Vec<FactId> = goal.iter().filter(|l| !l.positive && s.contains(l.fact)).map(|l| l.fact).collect();
        if pos.iter().all(|f| s.contains(*f)) && negs.is_empty() {
            return Some(0);
        }
        let stop = if negs.is_empty() { Some(pos.as_slice()) } else { None };
        let (fact_cost, act_cost) = self.costs(s, actions, stop);
        let mut h = 0u64;
        for f in &pos {
            h = h.max(fact_cost[f.index()]);
        }
        for f in &negs {
            let best = self.deleters[f.index()]
                .iter()
                .map(|&ai| act_cost[ai as usize].saturating_add(actions[ai as usize].cost as u64))
                .min()
                .unwrap_or(INF);
            h = h.max(best);
        }
        (h != INF).then_some(h)
    }

    /// Relaxed cost of each fact from `s` (`INF` when unreachable).
    pub fn fact_costs(&self, s: &State, actions: &[Action]) -> Vec<u64> {
        self.costs(s, actions, None).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(i: u32) -> FactId {
        FactId(i)
    }

    #[test]
    fn satisfied_goal_is_zero() {
        let h = HMax::new(2, &[]);
        let s = State::from_facts(2, [f(0)]);
        assert_eq!(h.estimate(&s, &[Literal::pos(f(0)), Literal::neg(f(1))], &[]), Some(0));
    }

    #[test]
    fn single_achiever() {
        let acts = vec![Action::new("a", vec![f(0)], vec![f(1)], vec![], 1)];
        let h = HMax::new(2, &acts);
        let s = State::from_facts(2, [f(0)]);
        assert_eq!(h.estimate(&s, &[Literal::pos(f(1))], &acts), Some(1));
    }

    #[test]
    fn max_not_sum() {
        let acts = vec![
            Action::new("a", vec![], vec![f(0)], vec![], 1),
            Action::new("b", vec![f(0)], vec![f(1)], vec![], 1),
            Action::new("c", vec![], vec![f(2)], vec![], 1),
        ];
        let h = HMax::new(3, &acts);
        let g = [Literal::pos(f(1)), Literal::pos(f(2))];
        assert_eq!(h.estimate(&State::empty(3), &g, &acts), Some(2));
    }

    #[test]
    fn negative_goal_uses_deleters() {
        let acts =
            vec![Action::new("a", vec![], vec![f(1)], vec![], 1), Action::new("d", vec![f(1)], vec![], vec![f(0)], 1)];
        let h = HMax::new(2, &acts);
        let s = State::from_facts(2, [f(0)]);
        assert_eq!(h.estimate(&s, &[Literal::neg(f(0))], &acts), Some(2));
        let only_add = HMax::new(2, &acts[..1]);
        assert_eq!(only_add.estimate(&s, &[Literal::neg(f(0))], &acts[..1]), None);
    }

    #[test]
    fn unreachable_is_none() {
        let h = HMax::new(2, &[]);
        assert_eq!(h.estimate(&State::empty(2), &[Literal::pos(f(1))], &[]), None);
    }
}
