//! Hand-built fixtures.

use std::collections::BTreeSet;
use std::sync::Arc;

use counterplan::bundle::{Bundle, LoadedBundle};
use counterplan::ground::GroundOptions;
use counterplan::{Action, FactId, FactTable, Literal, Plan, State};

use crate::domains::PoliceMap;

/// The 5×5 river map. The river runs along row 3 with a single crossing at
/// c3-3; the seeker starts at c1-1 having already called, the police at
/// c5-2. Stations: bus c1-5 (the true goal), train c5-5, plane c5-1. Cell
/// c4-1 is off-road, so the only police approach to the plane station is a
/// control placed from c5-2.
pub fn river_map() -> PoliceMap {
    PoliceMap {
        n: 5,
        obstacles: BTreeSet::from([(1, 3), (2, 3), (4, 3), (5, 3)]),
        off_road: BTreeSet::from([(4, 1)]),
        booths: Vec::new(),
        seeker: (1, 1),
        police: (5, 2),
        police_station: (5, 4),
        stations: vec![("bus".into(), (1, 5)), ("train".into(), (5, 5)), ("plane".into(), (5, 1))],
        called: true,
    }
}

/// The seeker's bus plan through the crossing.
pub const RIVER_SEEKER_PLAN: &str = "\
(move c1-1 c1-2)
(move c1-2 c2-2)
(move c2-2 c3-2)
(move c3-2 c3-3)
(move c3-3 c3-4)
(move c3-4 c2-4)
(move c2-4 c1-4)
(move c1-4 c1-5)
(escape c1-5 bus)
";

pub fn river_bundle() -> Bundle {
    let mut b = river_map().bundle("river", "bus");
    b.seeker_plan = Some(RIVER_SEEKER_PLAN.to_string());
    b
}

pub fn river_task() -> LoadedBundle {
    river_bundle().load(&GroundOptions::default()).expect("river fixture loads")
}

/// Two agents on a three-cell line a – m – b, agent A at a and agent B at b.
/// A can also ring a bell at a, which B cannot disturb.
pub struct Contention {
    pub facts: Arc<FactTable>,
    pub a_actions: Vec<Action>,
    pub b_actions: Vec<Action>,
    pub init: State,
}

impl Contention {
    pub fn new() -> Self {
        let names = [
            "(a-at a)", "(a-at b)", "(a-at m)", "(b-at a)", "(b-at b)", "(b-at m)", "(free a)", "(free b)", "(free m)",
            "(rang)",
        ];
        let facts = FactTable::from_names(names);
        let id = |n: &str| facts.get(n).expect("fixture fact");
        let moves = |who: &str| {
            let mut out = Vec::new();
            for (x, y) in [("a", "m"), ("m", "a"), ("m", "b"), ("b", "m")] {
                let from = id(&format!("({who}-at {x})"));
                let to = id(&format!("({who}-at {y})"));
                let fx = id(&format!("(free {x})"));
                let fy = id(&format!("(free {y})"));
                out.push(Action::new(format!("({who}-move {x} {y})"), vec![from, fy], vec![to, fx], vec![from, fy], 1));
            }
            out
        };
        let mut a_actions = moves("a");
        let b_actions = moves("b");
        a_actions.push(Action::new("(ring a)", vec![id("(a-at a)")], vec![id("(rang)")], vec![], 1));
        let init = State::from_facts(facts.len(), [id("(a-at a)"), id("(b-at b)"), id("(free m)")]);
        Contention { facts: Arc::new(facts), a_actions, b_actions, init }
    }

    pub fn fact(&self, name: &str) -> FactId {
        self.facts.get(name).expect("fixture fact")
    }

    fn plan(&self, names: &[&str]) -> Plan {
        Plan::from_text(&names.join("\n"), &self.a_actions).expect("fixture plan")
    }

    /// Ringing the bell: nothing B does touches it.
    pub fn strong(&self) -> (Plan, Vec<Literal>) {
        (self.plan(&["(ring a)"]), vec![Literal::pos(self.fact("(rang)"))])
    }

    /// Stepping into the middle: B can take the cell first or collide.
    pub fn weak(&self) -> (Plan, Vec<Literal>) {
        (self.plan(&["(a-move a m)"]), vec![Literal::pos(self.fact("(a-at m)"))])
    }
}

impl Default for Contention {
    fn default() -> Self {
        Self::new()
    }
}
