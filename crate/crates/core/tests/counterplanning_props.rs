//! Episode-level properties on random counterplanning tasks.

mod oracle;

use counterplan::counterplanning::{adicp, Algorithm, AlgorithmConfig};
use counterplan::planner::{solve_optimal, Budget};
use counterplan::simulator::run_episode;
use counterplan::Execution;
use oracle::{random_counterplanning, RandomShape};

fn config(alg: Algorithm, seed: u64) -> AlgorithmConfig {
    let mut cfg = AlgorithmConfig::new(alg);
    cfg.seed = seed;
    cfg.execution = Execution::Sequential;
    cfg
}

#[test]
fn episodes_are_seed_deterministic() {
    for seed in 0..15 {
        let c = random_counterplanning(seed, RandomShape::SMALL);
        let plan = solve_optimal(&c.seek, &Budget::default()).plan.unwrap();
        for alg in Algorithm::ALL {
            let (_, t1, m1) = run_episode(&c, &plan, &config(alg, seed), "t");
            let (_, t2, m2) = run_episode(&c, &plan, &config(alg, seed), "t");
            assert_eq!(t1.joint_steps, t2.joint_steps, "seed {seed} {alg}");
            assert_eq!(t1.counterplan, t2.counterplan);
            assert_eq!((m1.e, m1.len_prev, m1.status), (m2.e, m2.len_prev, m2.status));
        }
    }
}

#[test]
fn reactive_mode_waits_with_noops() {
    for seed in 0..30 {
        let c = random_counterplanning(seed, RandomShape::SMALL);
        let plan = solve_optimal(&c.seek, &Budget::default()).plan.unwrap();
        let out = adicp(&c, &plan, &config(Algorithm::Dicp, seed));
        assert!(out.prefix.steps.iter().all(|a| a.is_noop()), "seed {seed}");
        assert_eq!(out.prefix.active_len(), 0);
    }
}

#[test]
fn returned_plan_is_prefix_then_counterplan() {
    for seed in 0..30 {
        let c = random_counterplanning(seed, RandomShape::SMALL);
        let plan = solve_optimal(&c.seek, &Budget::default()).plan.unwrap();
        for alg in Algorithm::ALL {
            let out = adicp(&c, &plan, &config(alg, seed));
            let mut joined = out.prefix.names();
            joined.extend(out.counterplan.iter().flat_map(|p| p.names()));
            assert_eq!(out.prev_plan.names(), joined, "seed {seed} {alg}");
            assert!(out.prefix.len() <= plan.len());
        }
    }
}

#[test]
fn metrics_are_consistent() {
    for seed in 0..30 {
        let c = random_counterplanning(seed, RandomShape::SMALL);
        let plan = solve_optimal(&c.seek, &Budget::default()).plan.unwrap();
        for alg in Algorithm::ALL {
            let (out, _, m) = run_episode(&c, &plan, &config(alg, seed), "t");
            if let Some(r) = m.ratio_anticipatory {
                assert_eq!((r * m.len_prev as f64).round() as usize, out.prefix.active_len(), "seed {seed} {alg}");
            }
            if m.e == 1.0 {
                assert!(m.ratio_seek < 1.0, "seed {seed} {alg}");
            }
        }
    }
}
