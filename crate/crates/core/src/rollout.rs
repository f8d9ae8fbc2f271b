//! Scripted rollouts, JSONL episode traces and summary metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{Action, NOOP};
use crate::config::{Controller, Outcome, ScenarioConfig, Tier, Winner};
use crate::env::{reset_indexed, step, EnvError, StepResult};
use crate::unit::{ALLY, ENEMY};

/// How one team is driven during a rollout.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Random,
    Heuristic(Tier),
    /// Actions read back from a trace file, keyed by episode and step.
    Replay(Arc<ReplayTrace>),
}

impl PolicySpec {
    pub fn parse(text: &str) -> Result<Self, RolloutError> {
        text.parse()
    }
}

impl FromStr for PolicySpec {
    type Err = RolloutError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "random" {
            return Ok(PolicySpec::Random);
        }
        if let Some(tier) = s.strip_prefix("heuristic:") {
            return tier.parse().map(PolicySpec::Heuristic).map_err(RolloutError::Policy);
        }
        if let Some(path) = s.strip_prefix("replay:") {
            let file = std::fs::File::open(path).map_err(|e| RolloutError::Io(format!("{path}: {e}")))?;
            return ReplayTrace::read(std::io::BufReader::new(file)).map(|t| PolicySpec::Replay(Arc::new(t)));
        }
        Err(RolloutError::Policy(format!(
            "unknown policy '{s}' (expected random, heuristic:<tier> or replay:<trace>)"
        )))
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Random => f.write_str("random"),
            PolicySpec::Heuristic(t) => write!(f, "heuristic:{t}"),
            PolicySpec::Replay(_) => f.write_str("replay"),
        }
    }
}

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error("{0}")]
    Policy(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error("replay trace has no record for episode {episode}, step {t}")]
    ReplayMissing { episode: u64, t: u32 },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOutcome {
    pub winner: String,
    pub reason: String,
}

impl From<Outcome> for TraceOutcome {
    fn from(o: Outcome) -> Self {
        Self { winner: o.winner.key().to_string(), reason: o.reason.key().to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceUnit {
    pub id: usize,
    pub team: u8,
    pub position: [f64; 2],
    pub heading: f64,
    pub health: f64,
    pub alive: bool,
    pub action: Action,
    pub cooldown_timer: f64,
    pub reveal_timer: f64,
}

/// One executed step. `t` counts steps taken, so the first record has `t = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub episode: u64,
    pub t: u32,
    pub units: Vec<TraceUnit>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub outcome: Option<TraceOutcome>,
}

impl TraceRecord {
    /// Record for a step result; padding slots are left out.
    pub fn from_step(episode: u64, r: &StepResult) -> Self {
        let units = r
            .state
            .units
            .iter()
            .enumerate()
            .filter(|(_, u)| u.active)
            .map(|(id, u)| TraceUnit {
                id,
                team: u.team,
                position: [u.position.x, u.position.y],
                heading: u.heading,
                health: u.health,
                alive: u.alive,
                action: r.actions.get(id).copied().unwrap_or(NOOP),
                cooldown_timer: u.cooldown_timer,
                reveal_timer: u.reveal_timer,
            })
            .collect();
        Self {
            episode,
            t: r.state.t,
            units,
            reward: r.reward,
            terminated: r.terminated,
            truncated: r.truncated,
            outcome: r.info.outcome.map(TraceOutcome::from),
        }
    }

    /// One JSON line with keys in sorted order, newline included.
    pub fn to_line(&self) -> String {
        let v = serde_json::to_value(self).expect("trace record serializes");
        let mut s = serde_json::to_string(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

/// Actions of every recorded step, by `(episode, t)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayTrace {
    steps: BTreeMap<(u64, u32), Vec<(usize, u8, Action)>>,
}

impl ReplayTrace {
    pub fn read(reader: impl BufRead) -> Result<Self, RolloutError> {
        let mut steps = BTreeMap::new();
        for rec in read_trace(reader)? {
            let acts = rec.units.iter().map(|u| (u.id, u.team, u.action)).collect();
            steps.insert((rec.episode, rec.t), acts);
        }
        Ok(Self { steps })
    }

    /// Actions recorded for `team` in the step that produced record `t`.
    fn actions(&self, episode: u64, t: u32, team: u8) -> Option<impl Iterator<Item = (usize, Action)> + '_> {
        self.steps
            .get(&(episode, t))
            .map(move |v| v.iter().filter(move |(_, tm, _)| *tm == team).map(|(id, _, a)| (*id, *a)))
    }
}

pub fn read_trace(reader: impl BufRead) -> Result<Vec<TraceRecord>, RolloutError> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| RolloutError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord =
            serde_json::from_str(&line).map_err(|e| RolloutError::Trace { line: k + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

/// Per-episode results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub ally_won: bool,
    pub episode_return: f64,
    pub length: u32,
    pub ally_first_kill: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Summary {
    pub episodes: usize,
    pub win_rate: f64,
    pub mean_return: f64,
    pub mean_length: f64,
    pub first_kill_rate: f64,
}

impl Summary {
    pub fn from_episodes(stats: &[EpisodeStats]) -> Self {
        if stats.is_empty() {
            return Self::default();
        }
        let n = stats.len() as f64;
        Self {
            episodes: stats.len(),
            win_rate: stats.iter().filter(|s| s.ally_won).count() as f64 / n,
            mean_return: stats.iter().map(|s| s.episode_return).sum::<f64>() / n,
            mean_length: stats.iter().map(|s| s.length as f64).sum::<f64>() / n,
            first_kill_rate: stats.iter().filter(|s| s.ally_first_kill).count() as f64 / n,
        }
    }
}

/// Applies the per-team policies to a copy of `config`.
pub fn configure(config: &ScenarioConfig, ally: &PolicySpec, enemy: &PolicySpec) -> ScenarioConfig {
    let mut c = config.clone();
    for (team, policy) in [(ALLY, ally), (ENEMY, enemy)] {
        match policy {
            PolicySpec::Random => c.set_controller(team, Controller::Random, None),
            PolicySpec::Heuristic(t) => c.set_controller(team, Controller::Heuristic, Some(t.params())),
            PolicySpec::Replay(_) => c.set_controller(team, Controller::External, None),
        }
    }
    c
}

/// Everything one episode produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRun {
    pub stats: EpisodeStats,
    pub trace: String,
    pub steps: Vec<StepResult>,
}

/// Runs episode `episode` to completion. The random stream is keyed by
/// `(seed, episode)`.
pub fn run_episode(
    config: &Arc<ScenarioConfig>,
    ally: &PolicySpec,
    enemy: &PolicySpec,
    seed: u64,
    episode: u64,
    keep_steps: bool,
) -> Result<EpisodeRun, RolloutError> {
    let mut r = reset_indexed(Arc::clone(config), seed, episode)?;
    let mut trace = String::new();
    let mut steps = Vec::new();
    if keep_steps {
        steps.push(r.clone());
    }
    let replays: Vec<(u8, &ReplayTrace)> = [(ALLY, ally), (ENEMY, enemy)]
        .into_iter()
        .filter_map(|(team, p)| match p {
            PolicySpec::Replay(t) => Some((team, t.as_ref())),
            _ => None,
        })
        .collect();
    while !r.done() {
        let mut joint = vec![NOOP; r.state.units.len()];
        let t = r.state.t + 1;
        for (team, trace) in &replays {
            let acts = trace.actions(episode, t, *team).ok_or(RolloutError::ReplayMissing { episode, t })?;
            for (id, a) in acts {
                if id < joint.len() {
                    joint[id] = a;
                }
            }
        }
        r = step(&r.state, &joint)?;
        trace.push_str(&TraceRecord::from_step(episode, &r).to_line());
        if keep_steps {
            steps.push(r.clone());
        }
    }
    let stats = EpisodeStats {
        ally_won: r.info.outcome.is_some_and(|o| o.winner == Winner::Ally),
        episode_return: r.state.episode_return,
        length: r.state.t,
        ally_first_kill: r.info.first_kill_team == Some(ALLY),
    };
    Ok(EpisodeRun { stats, trace, steps })
}

/// Runs `episodes` episodes on the current rayon pool and writes their traces
/// to `sink` in episode order.
pub fn run_rollouts(
    config: &ScenarioConfig,
    ally: &PolicySpec,
    enemy: &PolicySpec,
    episodes: u64,
    seed: u64,
    sink: Option<&mut dyn Write>,
) -> Result<Summary, RolloutError> {
    let config = Arc::new(configure(config, ally, enemy));
    let runs: Vec<EpisodeRun> = (0..episodes)
        .into_par_iter()
        .map(|e| run_episode(&config, ally, enemy, seed, e, false))
        .collect::<Result<_, _>>()?;
    if let Some(sink) = sink {
        for run in &runs {
            sink.write_all(run.trace.as_bytes()).map_err(|e| RolloutError::Io(e.to_string()))?;
        }
        sink.flush().map_err(|e| RolloutError::Io(e.to_string()))?;
    }
    let stats: Vec<EpisodeStats> = runs.iter().map(|r| r.stats).collect();
    Ok(Summary::from_episodes(&stats))
}

/// Recomputes per-episode results from trace records.
pub fn stats_from_trace(records: &[TraceRecord]) -> Vec<EpisodeStats> {
    let mut by_episode: BTreeMap<u64, Vec<&TraceRecord>> = BTreeMap::new();
    for r in records {
        by_episode.entry(r.episode).or_default().push(r);
    }
    by_episode
        .values()
        .map(|recs| {
            let mut episode_return = 0.0;
            let mut first_kill = None;
            let mut alive: BTreeMap<usize, bool> = BTreeMap::new();
            for rec in recs {
                episode_return += rec.reward;
                let mut lost = [false; 2];
                for u in &rec.units {
                    let before = alive.insert(u.id, u.alive).unwrap_or(true);
                    if before && !u.alive && (u.team as usize) < 2 {
                        lost[u.team as usize] = true;
                    }
                }
                if first_kill.is_none() {
                    first_kill = match lost {
                        [true, false] => Some(ENEMY),
                        [false, true] => Some(ALLY),
                        _ => None,
                    };
                }
            }
            let last = recs.last().expect("grouped episodes are non-empty");
            EpisodeStats {
                ally_won: last.outcome.as_ref().is_some_and(|o| o.winner == Winner::Ally.key()),
                episode_return,
                length: last.t,
                ally_first_kill: first_kill == Some(ALLY),
            }
        })
        .collect()
}
