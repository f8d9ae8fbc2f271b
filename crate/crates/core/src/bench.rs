//! Throughput and reconfiguration-latency measurement.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::action::NOOP;
use crate::config::{Controller, ScenarioConfig};
use crate::env::{reset_indexed, step, EnvError, StepResult};
use crate::unit::{ALLY, ENEMY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub envs: usize,
    pub steps: usize,
    pub seconds: f64,
    /// Environment transitions per second, summed over all environments.
    pub env_steps_per_sec: f64,
    /// Transitions times configured units per second.
    pub agent_steps_per_sec: f64,
}

/// Both teams driven by the uniform random controller.
pub fn random_vs_random(config: &ScenarioConfig) -> ScenarioConfig {
    let mut c = config.clone();
    c.set_controller(ALLY, Controller::Random, None);
    c.set_controller(ENEMY, Controller::Random, None);
    c
}

struct Batch {
    config: Arc<ScenarioConfig>,
    seed: u64,
    results: Vec<StepResult>,
    resets: u64,
}

impl Batch {
    fn new(config: Arc<ScenarioConfig>, envs: usize, seed: u64) -> Result<Self, EnvError> {
        let results = (0..envs)
            .into_par_iter()
            .map(|k| reset_indexed(Arc::clone(&config), seed, k as u64))
            .collect::<Result<_, _>>()?;
        Ok(Self { config, seed, results, resets: envs as u64 })
    }

    /// One synchronous step of every environment; finished ones are reset
    /// onto a fresh stream.
    fn step(&mut self) -> Result<(), EnvError> {
        let base = self.resets;
        let n = self.results.len() as u64;
        let config = &self.config;
        let seed = self.seed;
        self.results = std::mem::take(&mut self.results)
            .into_par_iter()
            .enumerate()
            .map(|(k, r)| {
                if r.done() {
                    reset_indexed(Arc::clone(config), seed, base + k as u64)
                } else {
                    step(&r.state, &vec![NOOP; r.state.units.len()])
                }
            })
            .collect::<Result<_, _>>()?;
        self.resets += n;
        Ok(())
    }
}

/// Measures random-policy throughput for each env count, after one warmup
/// pass of `steps` steps. Runs on a dedicated pool when `threads` is given.
pub fn benchmark_throughput(
    config: &ScenarioConfig,
    env_counts: &[usize],
    steps: usize,
    threads: Option<usize>,
) -> Result<Vec<BenchRow>, EnvError> {
    let run = || -> Result<Vec<BenchRow>, EnvError> {
        let config = Arc::new(random_vs_random(config));
        let agents = config.units.len() as f64;
        let mut rows = Vec::new();
        for &envs in env_counts {
            let mut batch = Batch::new(Arc::clone(&config), envs, 0)?;
            for _ in 0..steps {
                batch.step()?;
            }
            let start = Instant::now();
            for _ in 0..steps {
                batch.step()?;
            }
            let seconds = start.elapsed().as_secs_f64();
            let transitions = (envs * steps) as f64;
            let rate = if steps == 0 || seconds == 0.0 { 0.0 } else { transitions / seconds };
            rows.push(BenchRow {
                envs,
                steps,
                seconds,
                env_steps_per_sec: rate,
                agent_steps_per_sec: rate * agents,
            });
        }
        Ok(rows)
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool builds")
            .install(run),
        None => run(),
    }
}

/// Wall-clock time of `reset` for each config, after resetting the first one
/// `warmup` times.
pub fn reset_latencies(configs: &[ScenarioConfig], warmup: usize) -> Result<Vec<Duration>, EnvError> {
    if let Some(first) = configs.first() {
        let c = Arc::new(first.clone());
        for k in 0..warmup {
            reset_indexed(Arc::clone(&c), 0, k as u64)?;
        }
    }
    configs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let start = Instant::now();
            reset_indexed(Arc::new(c.clone()), 0, k as u64)?;
            Ok(start.elapsed())
        })
        .collect()
}
