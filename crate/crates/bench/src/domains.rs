//! PDDL text for the two benchmark domains and builders for their problems.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use counterplan::bundle::Bundle;

const POLICE_PREDICATES: &str = "\
  (:predicates (seeker-at ?c - cell) (police-at ?c - cell) (adj ?a ?b - cell)
               (free ?c - cell) (road ?c - cell) (booth ?c - cell) (tapped ?c - cell)
               (called) (station-at ?s - station ?c - cell) (escaped ?s - station)
               (control ?c - cell) (police-station ?c - cell))";

/// Seeker and police domains. The seeker walks the grid, phones from an
/// untapped booth, then escapes from a station. The police walk on road
/// cells, put controls on free road cells next to them and tap booths from
/// the police station.
pub fn police_domain() -> String {
    format!(
        "(define (domain police-seeker)
  (:requirements :strips :typing :negative-preconditions)
  (:types cell station)
{POLICE_PREDICATES}
  (:action move
    :parameters (?from ?to - cell)
    :precondition (and (seeker-at ?from) (adj ?from ?to) (free ?to))
    :effect (and (seeker-at ?to) (free ?from) (not (seeker-at ?from)) (not (free ?to))))
  (:action call
    :parameters (?c - cell)
    :precondition (and (seeker-at ?c) (booth ?c) (not (tapped ?c)))
    :effect (called))
  (:action escape
    :parameters (?c - cell ?s - station)
    :precondition (and (seeker-at ?c) (station-at ?s ?c) (called))
    :effect (escaped ?s)))

(define (domain police-preventer)
  (:requirements :strips :typing :negative-preconditions)
  (:types cell station)
{POLICE_PREDICATES}
  (:action move
    :parameters (?from ?to - cell)
    :precondition (and (police-at ?from) (adj ?from ?to) (road ?to) (free ?to))
    :effect (and (police-at ?to) (free ?from) (not (police-at ?from)) (not (free ?to))))
  (:action set-control
    :parameters (?at ?c - cell)
    :precondition (and (police-at ?at) (adj ?at ?c) (road ?c) (free ?c))
    :effect (and (control ?c) (not (free ?c))))
  (:action tap-booth
    :parameters (?ps ?b - cell)
    :precondition (and (police-at ?ps) (police-station ?ps) (booth ?b) (not (tapped ?b)))
    :effect (tapped ?b)))
"
    )
}

pub type Cell = (usize, usize);

pub fn cell_name((x, y): Cell) -> String {
    format!("c{x}-{y}")
}

/// A police-control map on an `n`×`n` grid with 1-based coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoliceMap {
    pub n: usize,
    pub obstacles: BTreeSet<Cell>,
    /// Passable cells the police may not enter or control.
    pub off_road: BTreeSet<Cell>,
    pub booths: Vec<Cell>,
    pub seeker: Cell,
    pub police: Cell,
    pub police_station: Cell,
    /// (station name, cell)
    pub stations: Vec<(String, Cell)>,
    pub called: bool,
}

impl PoliceMap {
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (1..=self.n).flat_map(move |x| (1..=self.n).map(move |y| (x, y)))
    }

    pub fn passable(&self, c: Cell) -> bool {
        !self.obstacles.contains(&c)
    }

    pub fn neighbours(&self, (x, y): Cell) -> Vec<Cell> {
        let mut out = Vec::new();
        if x > 1 {
            out.push((x - 1, y));
        }
        if x < self.n {
            out.push((x + 1, y));
        }
        if y > 1 {
            out.push((x, y - 1));
        }
        if y < self.n {
            out.push((x, y + 1));
        }
        out.retain(|c| self.passable(*c));
        out
    }

    fn problem(&self, name: &str, domain: &str) -> String {
        let mut s = format!("(define (problem {name})\n  (:domain {domain})\n  (:objects");
        for c in self.cells().filter(|c| self.passable(*c)) {
            let _ = write!(s, " {}", cell_name(c));
        }
        s.push_str(" - cell");
        for (st, _) in &self.stations {
            let _ = write!(s, " {st}");
        }
        s.push_str(" - station)\n  (:init\n");
        let mut init = vec![
            format!("(seeker-at {})", cell_name(self.seeker)),
            format!("(police-at {})", cell_name(self.police)),
            format!("(police-station {})", cell_name(self.police_station)),
        ];
        if self.called {
            init.push("(called)".into());
        }
        for c in self.cells().filter(|c| self.passable(*c)) {
            if c != self.seeker && c != self.police {
                init.push(format!("(free {})", cell_name(c)));
            }
            if !self.off_road.contains(&c) {
                init.push(format!("(road {})", cell_name(c)));
            }
            for d in self.neighbours(c) {
                init.push(format!("(adj {} {})", cell_name(c), cell_name(d)));
            }
        }
        for b in &self.booths {
            init.push(format!("(booth {})", cell_name(*b)));
        }
        for (st, c) in &self.stations {
            init.push(format!("(station-at {st} {})", cell_name(*c)));
        }
        for line in init {
            let _ = writeln!(s, "    {line}");
        }
        s.push_str("  )\n  (:goal (and)))\n");
        s
    }

    /// Bundle with one candidate per station; `truth` names the true station.
    pub fn bundle(&self, name: &str, truth: &str) -> Bundle {
        Bundle {
            domain: police_domain(),
            seeker_problem: self.problem(&format!("{name}-seeker"), "police-seeker"),
            preventer_problem: self.problem(&format!("{name}-preventer"), "police-preventer"),
            candidates: self.stations.iter().map(|(st, _)| (st.clone(), format!("(escaped {st})"))).collect(),
            truth: Some(truth.to_string()),
            seeker_plan: None,
            observations: None,
        }
    }

    /// ASCII rendering: S seeker, P police, H police station, B booth,
    /// first letter of a station, # obstacle, ~ off-road. Row `n` first.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for y in (1..=self.n).rev() {
            for x in 1..=self.n {
                let c = (x, y);
                let ch = if self.obstacles.contains(&c) {
                    '#'
                } else if c == self.seeker {
                    'S'
                } else if c == self.police {
                    'P'
                } else if let Some((st, _)) = self.stations.iter().find(|(_, sc)| *sc == c) {
                    st.chars().next().unwrap_or('?').to_ascii_uppercase()
                } else if c == self.police_station {
                    'H'
                } else if self.booths.contains(&c) {
                    'b'
                } else if self.off_road.contains(&c) {
                    '~'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

const BLOCKS_PREDICATES: &str = "\
  (:predicates (on ?a ?b - block) (ontable ?b - block) (clear ?b - block) (holding ?b - block)
               (handempty) (painted ?b - block) (prev-in ?r - room) (connected ?r1 ?r2 - room)
               (paint-in ?r - room) (has-paint) (blocks-in ?r - room))";

/// Blocks-words for the seeker, with stacking gated on unpainted blocks; the
/// preventer walks between rooms, picks up paint and paints clear blocks in
/// the blocks room.
pub fn painted_blocks_domain() -> String {
    format!(
        "(define (domain painted-blocks-seeker)
  (:requirements :strips :typing :negative-preconditions)
  (:types block room)
{BLOCKS_PREDICATES}
  (:action pick-up
    :parameters (?b - block)
    :precondition (and (clear ?b) (ontable ?b) (handempty) (not (painted ?b)))
    :effect (and (holding ?b) (not (clear ?b)) (not (ontable ?b)) (not (handempty))))
  (:action put-down
    :parameters (?b - block)
    :precondition (holding ?b)
    :effect (and (ontable ?b) (clear ?b) (handempty) (not (holding ?b))))
  (:action stack
    :parameters (?b ?c - block)
    :precondition (and (holding ?b) (clear ?c) (not (painted ?c)))
    :effect (and (on ?b ?c) (clear ?b) (handempty) (not (holding ?b)) (not (clear ?c))))
  (:action unstack
    :parameters (?b ?c - block)
    :precondition (and (on ?b ?c) (clear ?b) (handempty) (not (painted ?b)))
    :effect (and (holding ?b) (clear ?c) (not (on ?b ?c)) (not (clear ?b)) (not (handempty)))))

(define (domain painted-blocks-preventer)
  (:requirements :strips :typing :negative-preconditions)
  (:types block room)
{BLOCKS_PREDICATES}
  (:action walk
    :parameters (?from ?to - room)
    :precondition (and (prev-in ?from) (connected ?from ?to))
    :effect (and (prev-in ?to) (not (prev-in ?from))))
  (:action take-paint
    :parameters (?r - room)
    :precondition (and (prev-in ?r) (paint-in ?r) (not (has-paint)))
    :effect (has-paint))
  (:action paint
    :parameters (?b - block ?r - room)
    :precondition (and (has-paint) (prev-in ?r) (blocks-in ?r) (clear ?b) (not (painted ?b)))
    :effect (painted ?b)))
"
    )
}

/// A painted-blocks instance: blocks named by letters, rooms `r1..rk`
/// connected as a line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlocksWorld {
    pub blocks: Vec<String>,
    /// Initial towers, bottom block first.
    pub towers: Vec<Vec<String>>,
    pub rooms: usize,
    pub blocks_room: usize,
    pub paint_room: usize,
    pub prev_room: usize,
    pub prev_has_paint: bool,
    /// (word, blocks top to bottom)
    pub words: Vec<(String, Vec<String>)>,
}

/// Condition for building `word` as a tower, first letter on top.
pub fn word_condition(word: &[String]) -> String {
    let mut lits = Vec::new();
    for w in word.windows(2) {
        lits.push(format!("(on {} {})", w[0], w[1]));
    }
    lits.push(format!("(ontable {})", word.last().expect("nonempty word")));
    lits.push(format!("(clear {})", word[0]));
    format!("(and {})", lits.join(" "))
}

impl BlocksWorld {
    fn problem(&self, name: &str, domain: &str) -> String {
        let mut s =
            format!("(define (problem {name})\n  (:domain {domain})\n  (:objects {} - block", self.blocks.join(" "));
        for r in 1..=self.rooms {
            let _ = write!(s, " r{r}");
        }
        s.push_str(" - room)\n  (:init\n    (handempty)\n");
        for t in &self.towers {
            let _ = writeln!(s, "    (ontable {})", t[0]);
            for w in t.windows(2) {
                let _ = writeln!(s, "    (on {} {})", w[1], w[0]);
            }
            let _ = writeln!(s, "    (clear {})", t.last().expect("nonempty tower"));
        }
        for r in 1..self.rooms {
            let _ = writeln!(s, "    (connected r{r} r{})\n    (connected r{} r{r})", r + 1, r + 1);
        }
        let _ = writeln!(
            s,
            "    (blocks-in r{})\n    (paint-in r{})\n    (prev-in r{})",
            self.blocks_room, self.paint_room, self.prev_room
        );
        if self.prev_has_paint {
            s.push_str("    (has-paint)\n");
        }
        s.push_str("  )\n  (:goal (and)))\n");
        s
    }

    pub fn bundle(&self, name: &str, truth: &str) -> Bundle {
        Bundle {
            domain: painted_blocks_domain(),
            seeker_problem: self.problem(&format!("{name}-seeker"), "painted-blocks-seeker"),
            preventer_problem: self.problem(&format!("{name}-preventer"), "painted-blocks-preventer"),
            candidates: self.words.iter().map(|(w, bs)| (w.clone(), word_condition(bs))).collect(),
            truth: Some(truth.to_string()),
            seeker_plan: None,
            observations: None,
        }
    }
}
