//! Seeded random task generators.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use counterplan::bundle::{Bundle, LoadedBundle};
use counterplan::ground::GroundOptions;
use counterplan::planner::{Budget, Planner, SearchStatus};
use counterplan::Plan;

use crate::domains::{BlocksWorld, Cell, PoliceMap};

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("no feasible placement after {tries} attempts")]
    Infeasible { tries: usize },
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Core(#[from] counterplan::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    PoliceControl,
    PaintedBlocksWords,
}

impl DomainKind {
    pub const ALL: [DomainKind; 2] = [DomainKind::PoliceControl, DomainKind::PaintedBlocksWords];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::PoliceControl => "police-control",
            DomainKind::PaintedBlocksWords => "painted-blocks-words",
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        DomainKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| GenError::Params(format!("unknown domain {s}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub domain: DomainKind,
    pub seed: u64,
    /// Police: grid side, 3..=16.
    pub grid: usize,
    /// Police: fraction of obstacle cells, 0.0..=0.5.
    pub obstacles: f64,
    pub booths: usize,
    /// Candidate goals (stations or words).
    pub candidates: usize,
    /// Blocks: number of blocks, 3..=10.
    pub blocks: usize,
    pub rooms: usize,
    pub word_min: usize,
    pub word_max: usize,
    /// Rejection-sampling attempts before giving up.
    pub tries: usize,
    /// Node budget for the solvability check at generation.
    pub check_nodes: usize,
}

impl GeneratorConfig {
    /// Desk-scale defaults: 8×8 police maps, 8-block words.
    pub fn desk(domain: DomainKind, seed: u64) -> Self {
        GeneratorConfig {
            domain,
            seed,
            grid: 8,
            obstacles: 0.25,
            booths: 6,
            candidates: match domain {
                DomainKind::PoliceControl => 3,
                DomainKind::PaintedBlocksWords => 5,
            },
            blocks: 8,
            rooms: 5,
            word_min: 3,
            word_max: 6,
            tries: 200,
            check_nodes: 1_000_000,
        }
    }

    /// The full-size police protocol: 10×10, 25% obstacles, 10 booths.
    pub fn full(domain: DomainKind, seed: u64) -> Self {
        GeneratorConfig { grid: 10, booths: 10, ..Self::desk(domain, seed) }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Params(m.to_string()));
        match self.domain {
            DomainKind::PoliceControl => {
                if !(3..=16).contains(&self.grid) {
                    return bad("grid side must be in 3..=16");
                }
                if !(0.0..=0.5).contains(&self.obstacles) {
                    return bad("obstacle fraction must be in 0..=0.5");
                }
                if self.candidates == 0 {
                    return bad("need at least one station");
                }
                let free = self.grid * self.grid - obstacle_count(self);
                if free < 3 + self.candidates + self.booths.max(1) {
                    return bad("grid too small for all entities");
                }
            }
            DomainKind::PaintedBlocksWords => {
                if !(3..=10).contains(&self.blocks) {
                    return bad("blocks must be in 3..=10");
                }
                if self.rooms == 0 || self.candidates == 0 {
                    return bad("need at least one room and one word");
                }
                if self.word_min < 2 || self.word_min > self.word_max || self.word_max > self.blocks {
                    return bad("word lengths must satisfy 2 <= min <= max <= blocks");
                }
            }
        }
        Ok(())
    }
}

fn obstacle_count(cfg: &GeneratorConfig) -> usize {
    (cfg.obstacles * (cfg.grid * cfg.grid) as f64).round() as usize
}

/// A generated task with the seeker's optimal plan for the hidden goal.
#[derive(Clone, Debug)]
pub struct GeneratedTask {
    pub id: String,
    pub bundle: Bundle,
    pub loaded: LoadedBundle,
    pub true_goal: usize,
    pub seeker_plan: Plan,
    /// Human-readable picture of the instance, when the domain has one.
    pub picture: Option<String>,
}

pub fn generate(cfg: &GeneratorConfig) -> Result<GeneratedTask, GenError> {
    cfg.validate()?;
    match cfg.domain {
        DomainKind::PoliceControl => gen_police_control(cfg),
        DomainKind::PaintedBlocksWords => gen_painted_blocks(cfg),
    }
}

/// Grounds the bundle, checks every candidate is solvable for the seeker on
/// its own, and attaches the optimal plan for the hidden goal.
fn finish(
    id: String,
    mut bundle: Bundle,
    cfg: &GeneratorConfig,
    picture: Option<String>,
) -> Result<Option<GeneratedTask>, GenError> {
    let mut loaded = bundle.load(&GroundOptions::default())?;
    let true_goal = loaded.true_goal.expect("generated bundles carry a truth");
    let t = &loaded.task;
    let planner = Planner::for_task(&t.seek, Budget::nodes(cfg.check_nodes));
    let init = t.initial_state();
    let mut plan = None;
    for (i, cand) in t.candidates.iter().enumerate() {
        let r = planner.solve(&init, &cand.goal);
        if r.status != SearchStatus::Solved {
            return Ok(None);
        }
        if i == true_goal {
            plan = r.plan;
        }
    }
    let plan = plan.expect("true goal solved");
    if plan.is_empty() {
        return Ok(None);
    }
    bundle.seeker_plan = Some(plan.to_text());
    loaded.seeker_plan = Some(plan.clone());
    Ok(Some(GeneratedTask { id, bundle, loaded, true_goal, seeker_plan: plan, picture }))
}

fn reachable(map: &PoliceMap, from: Cell, blocked: Cell) -> BTreeSet<Cell> {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        for d in map.neighbours(c) {
            if d != blocked && seen.insert(d) {
                queue.push_back(d);
            }
        }
    }
    seen
}

/// Police control on an n×n grid. Obstacles are resampled until every
/// station and at least one booth is reachable from the seeker's start.
pub fn gen_police_control(cfg: &GeneratorConfig) -> Result<GeneratedTask, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.grid;
    let all: Vec<Cell> = (1..=n).flat_map(|x| (1..=n).map(move |y| (x, y))).collect();
    let n_obst = obstacle_count(cfg);
    for _ in 0..cfg.tries {
        let mut cells = all.clone();
        cells.shuffle(&mut rng);
        let obstacles: BTreeSet<Cell> = cells.drain(..n_obst).collect();
        let mut take = || cells.pop().expect("validated capacity");
        let seeker = take();
        let police = take();
        let police_station = take();
        let stations: Vec<(String, Cell)> = (1..=cfg.candidates).map(|i| (format!("st{i}"), take())).collect();
        let booths: Vec<Cell> = (0..cfg.booths).map(|_| take()).collect();
        let map = PoliceMap {
            n,
            obstacles,
            off_road: BTreeSet::new(),
            booths,
            seeker,
            police,
            police_station,
            stations,
            called: false,
        };
        let reach = reachable(&map, seeker, police);
        if !map.stations.iter().all(|(_, c)| reach.contains(c)) || !map.booths.iter().any(|b| reach.contains(b)) {
            continue;
        }
        let truth = map.stations[rng.gen_range(0..map.stations.len())].0.clone();
        let id = format!("police-{n}x{n}-{}", cfg.seed);
        let picture = Some(map.render());
        if let Some(t) = finish(id.clone(), map.bundle(&id, &truth), cfg, picture)? {
            return Ok(t);
        }
    }
    Err(GenError::Infeasible { tries: cfg.tries })
}

/// Painted blocks-words: random initial towers, candidate words of random
/// length over distinct blocks, rooms on a line.
pub fn gen_painted_blocks(cfg: &GeneratorConfig) -> Result<GeneratedTask, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let blocks: Vec<String> = (0..cfg.blocks).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    for _ in 0..cfg.tries {
        let mut order = blocks.clone();
        order.shuffle(&mut rng);
        let mut towers: Vec<Vec<String>> = Vec::new();
        for b in order {
            match towers.last_mut() {
                Some(t) if rng.gen_bool(0.5) => t.push(b),
                _ => towers.push(vec![b]),
            }
        }
        let mut words: Vec<(String, Vec<String>)> = Vec::new();
        let mut guard = 0;
        while words.len() < cfg.candidates && guard < 1000 {
            guard += 1;
            let len = rng.gen_range(cfg.word_min..=cfg.word_max);
            let w: Vec<String> = blocks.choose_multiple(&mut rng, len).cloned().collect();
            let name = w.concat();
            if !words.iter().any(|(n, _)| *n == name) {
                words.push((name, w));
            }
        }
        if words.len() < cfg.candidates {
            continue;
        }
        let world = BlocksWorld {
            blocks: blocks.clone(),
            towers,
            rooms: cfg.rooms,
            blocks_room: rng.gen_range(1..=cfg.rooms),
            paint_room: rng.gen_range(1..=cfg.rooms),
            prev_room: rng.gen_range(1..=cfg.rooms),
            prev_has_paint: false,
            words,
        };
        let truth = world.words[rng.gen_range(0..world.words.len())].0.clone();
        let id = format!("blocks-{}-{}", cfg.blocks, cfg.seed);
        if let Some(t) = finish(id.clone(), world.bundle(&id, &truth), cfg, None)? {
            return Ok(t);
        }
    }
    Err(GenError::Infeasible { tries: cfg.tries })
}
