//! Experiment harness: generate tasks, run each algorithm, collect metrics.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use counterplan::centroids::CostMode;
use counterplan::counterplanning::{Algorithm, AlgorithmConfig, Strategy};
use counterplan::par::{par_map, Execution};
use counterplan::planner::Budget;
use counterplan::simulator::{run_episode, EpisodeTrace, Metrics};

use crate::generators::{generate, DomainKind, GeneratedTask, GeneratorConfig};

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Generator template; `seed` is replaced per task.
    pub generator: GeneratorConfig,
    pub n_tasks: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub strategy: Strategy,
    pub budget: Budget,
    pub cost_mode: CostMode,
    /// Parallelism across tasks.
    pub execution: Execution,
}

impl SuiteConfig {
    pub fn desk(domain: DomainKind, n_tasks: usize, seed: u64) -> Self {
        SuiteConfig {
            generator: GeneratorConfig::desk(domain, seed),
            n_tasks,
            seed,
            algorithms: Algorithm::ALL.to_vec(),
            strategy: Strategy::ClosestToSeek,
            budget: Budget { max_nodes: 1_000_000, max_time: Some(Duration::from_secs(600)) },
            cost_mode: CostMode::Estimated,
            execution: Execution::default(),
        }
    }

    /// Seed of the i-th task.
    pub fn task_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(i as u64)
    }

    pub fn algorithm_config(&self, alg: Algorithm, seed: u64) -> AlgorithmConfig {
        let mut cfg = AlgorithmConfig::new(alg);
        cfg.strategy = self.strategy;
        cfg.seed = seed;
        cfg.budget = self.budget;
        cfg.cost_mode = self.cost_mode;
        // Tasks already run in parallel.
        cfg.execution = Execution::Sequential;
        cfg.recognition.execution = Execution::Sequential;
        cfg
    }
}

/// Per-task outcome: metrics per algorithm or a generation failure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub task_id: String,
    pub seed: u64,
    pub true_goal: Option<String>,
    pub rows: Vec<Metrics>,
    pub traces: Vec<EpisodeTrace>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SuiteResult {
    pub domain: String,
    pub tasks: Vec<TaskOutcome>,
}

impl SuiteResult {
    pub fn rows(&self) -> impl Iterator<Item = &Metrics> {
        self.tasks.iter().flat_map(|t| t.rows.iter())
    }

    pub fn traces(&self) -> impl Iterator<Item = &EpisodeTrace> {
        self.tasks.iter().flat_map(|t| t.traces.iter())
    }
}

/// Runs every algorithm on one generated task.
pub fn run_task(cfg: &SuiteConfig, task: &GeneratedTask, seed: u64) -> TaskOutcome {
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for &alg in &cfg.algorithms {
        let acfg = cfg.algorithm_config(alg, seed);
        let (_, trace, metrics) = run_episode(&task.loaded.task, &task.seeker_plan, &acfg, &task.id);
        rows.push(metrics);
        traces.push(trace);
    }
    TaskOutcome {
        task_id: task.id.clone(),
        seed,
        true_goal: Some(task.loaded.task.candidates[task.true_goal].name.clone()),
        rows,
        traces,
        failure: None,
    }
}

/// Generates `n_tasks` tasks and runs all algorithms on each. Failures are
/// recorded per task; results are ordered by task index.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteResult {
    let idx: Vec<usize> = (0..cfg.n_tasks).collect();
    let tasks = par_map(cfg.execution, &idx, |&i| {
        let seed = cfg.task_seed(i);
        let gcfg = GeneratorConfig { seed, ..cfg.generator.clone() };
        match generate(&gcfg) {
            Ok(t) => run_task(cfg, &t, seed),
            Err(e) => TaskOutcome {
                task_id: format!("{}-{seed}", cfg.generator.domain),
                seed,
                true_goal: None,
                rows: Vec::new(),
                traces: Vec::new(),
                failure: Some(e.to_string()),
            },
        }
    });
    SuiteResult { domain: cfg.generator.domain.to_string(), tasks }
}
