//! Counterplanning task bundles on disk.
//!
//! A bundle is a directory holding:
//!
//! | file             | contents                                              |
//! |------------------|-------------------------------------------------------|
//! | `domain.pddl`    | seeker and preventer domains (one or two `define`s)   |
//! | `seeker.pddl`    | seeker problem                                        |
//! | `preventer.pddl` | preventer problem                                     |
//! | `candidates.txt` | one goal condition per line, optionally `name: cond`  |
//! | `truth.txt`      | the hidden goal (a candidate name or a condition)     |
//! | `seeker.plan`    | optional seeker plan; computed when absent            |
//! | `observations.plan` | optional seeker actions already observed           |
//!
//! Blank lines and lines starting with `;` or `#` in `candidates.txt` are
//! ignored. The truth file is read only by the harness; the loaded
//! [`CounterplanningTask`] carries it as the seeker's goal, which the
//! algorithms never consult.

use std::fs;
use std::path::Path;

use crate::counterplanning::{Candidate, CounterplanningTask};
use crate::error::{Error, Result};
use crate::ground::{ground_joint, GroundOptions};
use crate::pddl::{load_task, parse_ground_condition, LiftedTask, Lit};
use crate::strips::Plan;

pub const DOMAIN_FILE: &str = "domain.pddl";
pub const SEEKER_FILE: &str = "seeker.pddl";
pub const PREVENTER_FILE: &str = "preventer.pddl";
pub const CANDIDATES_FILE: &str = "candidates.txt";
pub const TRUTH_FILE: &str = "truth.txt";
pub const SEEKER_PLAN_FILE: &str = "seeker.plan";
pub const OBSERVATIONS_FILE: &str = "observations.plan";

/// Raw bundle text.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bundle {
    pub domain: String,
    pub seeker_problem: String,
    pub preventer_problem: String,
    /// (name, condition) pairs.
    pub candidates: Vec<(String, String)>,
    pub truth: Option<String>,
    pub seeker_plan: Option<String>,
    pub observations: Option<String>,
}

/// A grounded bundle.
#[derive(Clone, Debug)]
pub struct LoadedBundle {
    pub task: CounterplanningTask,
    pub true_goal: Option<usize>,
    pub seeker_plan: Option<Plan>,
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn read_opt(dir: &Path, name: &str) -> Result<Option<String>> {
    if dir.join(name).exists() {
        read(dir, name).map(Some)
    } else {
        Ok(None)
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Splits `name: (cond)` into its parts; bare conditions are named `g<i>`.
pub fn parse_candidates(text: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with(';') || line.starts_with('#') {
            continue;
        }
        let (name, cond) = match line.find('(') {
            Some(p) if p > 0 => {
                (line[..p].trim().trim_end_matches(':').trim().to_string(), line[p..].trim().to_string())
            }
            _ => (format!("g{}", out.len()), line.to_string()),
        };
        out.push((name, cond));
    }
    out
}

impl Bundle {
    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Bundle> {
        let dir = dir.as_ref();
        Ok(Bundle {
            domain: read(dir, DOMAIN_FILE)?,
            seeker_problem: read(dir, SEEKER_FILE)?,
            preventer_problem: read(dir, PREVENTER_FILE)?,
            candidates: parse_candidates(&read(dir, CANDIDATES_FILE)?),
            truth: read_opt(dir, TRUTH_FILE)?.map(|t| t.trim().to_string()).filter(|t| !t.is_empty()),
            seeker_plan: read_opt(dir, SEEKER_PLAN_FILE)?,
            observations: read_opt(dir, OBSERVATIONS_FILE)?,
        })
    }

    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
        write(dir, DOMAIN_FILE, &self.domain)?;
        write(dir, SEEKER_FILE, &self.seeker_problem)?;
        write(dir, PREVENTER_FILE, &self.preventer_problem)?;
        let cands: String = self.candidates.iter().map(|(n, c)| format!("{n}: {c}\n")).collect();
        write(dir, CANDIDATES_FILE, &cands)?;
        if let Some(t) = &self.truth {
            write(dir, TRUTH_FILE, &format!("{t}\n"))?;
        }
        if let Some(p) = &self.seeker_plan {
            write(dir, SEEKER_PLAN_FILE, p)?;
        }
        if let Some(o) = &self.observations {
            write(dir, OBSERVATIONS_FILE, o)?;
        }
        Ok(())
    }

    fn truth_condition(&self) -> Option<&str> {
        let t = self.truth.as_deref()?;
        Some(self.candidates.iter().find(|(n, _)| n == t).map_or(t, |(_, c)| c.as_str()))
    }

    /// Parses and jointly grounds the bundle.
    pub fn load(&self, opts: &GroundOptions) -> Result<LoadedBundle> {
        let seek: LiftedTask = load_task(&self.domain, &self.seeker_problem)?;
        let prev: LiftedTask = load_task(&self.domain, &self.preventer_problem)?;
        if self.candidates.is_empty() {
            return Err(Error::Empty("candidate goal set"));
        }
        let mut conds: Vec<Vec<Lit>> = Vec::new();
        for (_, c) in &self.candidates {
            conds.push(parse_ground_condition(c, &seek)?);
        }
        let truth = self.truth_condition().map(|t| parse_ground_condition(t, &seek)).transpose()?;
        let mut extra = conds.clone();
        extra.extend(truth.iter().cloned());
        let joint = ground_joint(&[&seek, &prev], &extra, opts)?;
        let candidates = self
            .candidates
            .iter()
            .zip(&conds)
            .map(|((name, _), c)| Ok(Candidate { name: name.clone(), goal: joint.ground_condition(c)? }))
            .collect::<Result<Vec<_>>>()?;
        let mut seek_task = joint.task(0);
        if let Some(t) = &truth {
            seek_task.goal = joint.ground_condition(t)?;
        }
        let observations = match &self.observations {
            Some(text) => Plan::from_text(text, &seek_task.actions).map_err(Error::Invalid)?.steps,
            None => Vec::new(),
        };
        let task = CounterplanningTask { seek: seek_task, prev: joint.task(1), candidates, observations };
        let true_goal = if truth.is_some() {
            Some(task.true_goal_index().ok_or_else(|| Error::Invalid("truth is not among the candidates".into()))?)
        } else {
            None
        };
        let seeker_plan = match &self.seeker_plan {
            Some(text) => Some(Plan::from_text(text, &task.seek.actions).map_err(Error::Invalid)?),
            None => None,
        };
        Ok(LoadedBundle { task, true_goal, seeker_plan })
    }
}
