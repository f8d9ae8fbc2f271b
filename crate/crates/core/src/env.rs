//! The environment step pipeline, reward, termination, action masks, and the
//! batched reset/step API.
//!
//! `reset` and `step` are pure: they take a state by reference and return a
//! fresh [`StepResult`]. Batches are mapped over a rayon pool; results are
//! identical to sequential execution for any thread count.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use thiserror::Error;

use crate::action::{move_direction, Action, ATTACK, MOVES, NOOP, NUM_ACTIONS, ROTATE};
use crate::combat::{attackable_matrix, resolve_combat};
use crate::config::{
    validate_scenario, Controller, HeuristicParams, Outcome, OutcomeReason, ScenarioConfig, ValidationReport, Winner,
};
use crate::heuristics::{heuristic_step, HeuristicMemory, Scene};
use crate::math::{wrap_angle, Vec2};
use crate::perception::{
    build_global_state, update_reveal_timers, visibility_matrix, write_observation, BoolMatrix, ObservationLayout,
};
use crate::physics::{apply_boundary, detect_contacts, integrate_kinematics, resolve_contacts};
use crate::rng::{tag, RngStream};
use crate::unit::{UnitState, ALLY, ENEMY};
use crate::zone::{swamp_multiplier, Zone, ZoneType};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid scenario:\n{0}")]
    InvalidConfig(ValidationReport),
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("agent {agent}: action {action} is masked out")]
    InvalidAction { agent: usize, action: Action },
    #[error("episode already finished; call reset")]
    EpisodeOver,
}

/// One action per unit slot. Entries for slots not driven by an external
/// controller are ignored.
pub type JointAction = Vec<Action>;

/// Complete simulation state of one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub config: Arc<ScenarioConfig>,
    /// Exactly `max_units` slots; slots past the configured roster are padding.
    pub units: Vec<UnitState>,
    /// Exactly `max_zones` slots, padded with inactive zones.
    pub zones: Vec<Zone>,
    pub t: u32,
    pub rng: RngStream,
    pub prev_health_gap: f64,
    pub initial_health_gap: f64,
    pub memory: Vec<HeuristicMemory>,
    pub episode_return: f64,
    pub first_kill_team: Option<u8>,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub outcome: Option<Outcome>,
    pub first_kill_team: Option<u8>,
    pub episode_length: u32,
    pub episode_return: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: EnvState,
    /// Row-major `[max_units × obs_dim]`.
    pub observations: Vec<f32>,
    pub obs_dim: usize,
    pub global_state: Vec<f32>,
    /// Ally-perspective reward for this step, terminal bonus included.
    pub reward: f64,
    /// Per slot: `reward` for allies, `-reward` for enemies, 0 for padding.
    pub rewards: Vec<f64>,
    pub action_mask: Vec<[bool; NUM_ACTIONS]>,
    /// Actions actually executed this step (empty after reset).
    pub actions: Vec<Action>,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn observation(&self, agent: usize) -> &[f32] {
        &self.observations[agent * self.obs_dim..(agent + 1) * self.obs_dim]
    }

    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

impl EnvState {
    pub fn layout(&self) -> ObservationLayout {
        ObservationLayout::new(self.units.len(), self.zones.len())
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn controller(&self, team: u8) -> Controller {
        self.config.team(team).map_or(Controller::External, |t| t.controller)
    }

    fn heuristic_params(&self, team: u8) -> HeuristicParams {
        self.config.team(team).map(|t| t.heuristic_params()).unwrap_or_default()
    }

    pub fn health_gap(&self) -> f64 {
        health_gap(&self.units)
    }
}

fn team_mean_ratio(units: &[UnitState], team: u8) -> f64 {
    let (sum, n) = units
        .iter()
        .filter(|u| u.active && u.team == team)
        .fold((0.0, 0usize), |(s, n), u| (s + u.health_ratio(), n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Ally mean health ratio minus enemy mean health ratio over every configured
/// unit; dead units count with zero health.
pub fn health_gap(units: &[UnitState]) -> f64 {
    team_mean_ratio(units, ALLY) - team_mean_ratio(units, ENEMY)
}

fn alive_count(units: &[UnitState], team: u8) -> usize {
    units.iter().filter(|u| u.alive && u.team == team).count()
}

/// Elimination, or the truncation verdict once `t` reaches `max_steps`.
pub fn terminal_outcome(state: &EnvState) -> Option<Outcome> {
    let allies = alive_count(&state.units, ALLY);
    let enemies = alive_count(&state.units, ENEMY);
    if allies == 0 {
        return Some(Outcome { winner: Winner::Enemy, reason: OutcomeReason::Elimination });
    }
    if enemies == 0 {
        return Some(Outcome { winner: Winner::Ally, reason: OutcomeReason::Elimination });
    }
    if state.t >= state.config.max_steps {
        let ally = team_mean_ratio(&state.units, ALLY);
        let enemy = team_mean_ratio(&state.units, ENEMY);
        let outcome = if ally > enemy {
            Outcome { winner: Winner::Ally, reason: OutcomeReason::TruncationHealth }
        } else if ally < enemy {
            Outcome { winner: Winner::Enemy, reason: OutcomeReason::TruncationHealth }
        } else {
            Outcome { winner: Winner::Enemy, reason: OutcomeReason::TruncationTie }
        };
        return Some(outcome);
    }
    None
}

pub fn unit_action_mask(u: &UnitState, enable_noop: bool) -> [bool; NUM_ACTIONS] {
    let mut m = [false; NUM_ACTIONS];
    if !u.alive {
        m[NOOP as usize] = true;
        return m;
    }
    for a in MOVES {
        m[a as usize] = true;
    }
    m[ROTATE as usize] = true;
    m[ATTACK as usize] = u.cooldown_timer == 0.0;
    m[NOOP as usize] = enable_noop;
    m
}

pub fn action_mask(state: &EnvState) -> Vec<[bool; NUM_ACTIONS]> {
    let noop = state.config.physics.enable_noop;
    state.units.iter().map(|u| unit_action_mask(u, noop)).collect()
}

pub fn valid_actions(mask: &[bool; NUM_ACTIONS]) -> Vec<Action> {
    (0..NUM_ACTIONS as Action).filter(|a| mask[*a as usize]).collect()
}

/// Resets with environment index 0.
pub fn reset(config: &ScenarioConfig, seed: u64) -> Result<StepResult, EnvError> {
    reset_indexed(Arc::new(config.clone()), seed, 0)
}

/// Resets an environment whose random stream is keyed by `(seed, env_index)`.
pub fn reset_indexed(config: Arc<ScenarioConfig>, seed: u64, env_index: u64) -> Result<StepResult, EnvError> {
    let report = validate_scenario(&config);
    if !report.is_valid() {
        return Err(EnvError::InvalidConfig(report));
    }
    let mut units = Vec::with_capacity(config.max_units);
    for u in &config.units {
        // validated above, resolve cannot fail
        let spec = u.source.resolve().map_err(|_| EnvError::InvalidConfig(report.clone()))?;
        units.push(UnitState::spawn(spec, u.team, u.position, wrap_angle(u.heading_deg.to_radians())));
    }
    units.resize_with(config.max_units, UnitState::placeholder);
    let mut zones = config.zones.clone();
    zones.resize_with(config.max_zones, Zone::inactive);

    let gap = health_gap(&units);
    let n = units.len();
    let state = EnvState {
        config,
        units,
        zones,
        t: 0,
        rng: RngStream::new(seed, env_index),
        prev_health_gap: gap,
        initial_health_gap: gap,
        memory: vec![None; n],
        episode_return: 0.0,
        first_kill_team: None,
        outcome: None,
    };
    Ok(finish(state, Vec::new(), 0.0, false, false))
}

/// Builds observations, masks and info for a post-transition state.
fn finish(state: EnvState, actions: Vec<Action>, reward: f64, terminated: bool, truncated: bool) -> StepResult {
    let layout = state.layout();
    let obs_dim = layout.total();
    let vis = visibility_matrix(&state.units, &state.zones);
    let att = attackable_matrix(&state.units, &vis);
    let n = state.units.len();
    let mut observations = vec![0.0f32; n * obs_dim];
    for i in 0..n {
        write_observation(
            &mut observations[i * obs_dim..(i + 1) * obs_dim],
            i,
            &state.units,
            &state.zones,
            &vis,
            &att,
            &state.config.field,
            &layout,
        );
    }
    let global_state = build_global_state(&state.units, &state.zones, &state.config.field, &layout);
    let rewards = state
        .units
        .iter()
        .map(|u| match (u.active, u.team) {
            (false, _) => 0.0,
            (true, ALLY) => reward,
            (true, _) => -reward,
        })
        .collect();
    let action_mask = action_mask(&state);
    let info = StepInfo {
        outcome: state.outcome,
        first_kill_team: state.first_kill_team,
        episode_length: state.t,
        episode_return: state.episode_return,
    };
    StepResult {
        state,
        observations,
        obs_dim,
        global_state,
        reward,
        rewards,
        action_mask,
        actions,
        terminated,
        truncated,
        info,
    }
}

/// Resolves the action of every slot: external slots are checked against the
/// mask, heuristic and random slots are decided here, dead and padding slots
/// no-op.
fn choose_actions(state: &EnvState, joint: &[Action]) -> Result<(Vec<Action>, Vec<HeuristicMemory>), EnvError> {
    let n = state.units.len();
    if joint.len() != n {
        return Err(EnvError::ActionCount { expected: n, got: joint.len() });
    }
    let masks = action_mask(state);
    let mut memory = state.memory.clone();
    let mut actions = vec![NOOP; n];

    let needs_scene = state
        .units
        .iter()
        .any(|u| u.alive && state.controller(u.team) == Controller::Heuristic);
    let (vis, att) = if needs_scene {
        let vis = visibility_matrix(&state.units, &state.zones);
        let att = attackable_matrix(&state.units, &vis);
        (vis, att)
    } else {
        (BoolMatrix::new(0), BoolMatrix::new(0))
    };
    let scene = Scene {
        states: &state.units,
        zones: &state.zones,
        visibility: &vis,
        attackable: &att,
        field: &state.config.field,
        physics: &state.config.physics,
    };

    let step = state.t as u64;
    for (i, u) in state.units.iter().enumerate() {
        if !u.active {
            continue;
        }
        match state.controller(u.team) {
            Controller::External => {
                let a = joint[i];
                if (a as usize) >= NUM_ACTIONS || !masks[i][a as usize] {
                    return Err(EnvError::InvalidAction { agent: i, action: a });
                }
                actions[i] = a;
            }
            _ if !u.alive => {}
            Controller::Heuristic => {
                let params = state.heuristic_params(u.team);
                let valid = valid_actions(&masks[i]);
                let mut rng = state.rng.at(step, tag::HEURISTIC + i as u64);
                actions[i] = heuristic_step(i, &scene, &mut memory[i], &params, &valid, &mut rng).action;
            }
            Controller::Random => {
                let valid = valid_actions(&masks[i]);
                let mut rng = state.rng.at(step, tag::RANDOM_POLICY + i as u64);
                actions[i] = *valid.choose(&mut rng).unwrap_or(&NOOP);
            }
        }
    }
    Ok((actions, memory))
}

/// Advances one environment by one step.
pub fn step(state: &EnvState, joint: &[Action]) -> Result<StepResult, EnvError> {
    if state.is_done() {
        return Err(EnvError::EpisodeOver);
    }
    let (actions, memory) = choose_actions(state, joint)?;
    let mut next = state.clone();
    next.memory = memory;
    let cfg = Arc::clone(&state.config);
    let physics = &cfg.physics;
    let dt = physics.dt;
    let alive_before: Vec<bool> = next.units.iter().map(|u| u.alive).collect();

    // commanded velocities, swamp slowdown sampled at the start position
    let commanded: Vec<Vec2> = next
        .units
        .iter()
        .zip(&actions)
        .map(|(u, &a)| match move_direction(a) {
            Some(dir) if u.alive => dir * (u.spec.speed * swamp_multiplier(&next.zones, u.position)),
            _ => Vec2::ZERO,
        })
        .collect();

    integrate_kinematics(&mut next.units, &commanded, dt);

    let pre_impulse: Vec<Vec2> = next.units.iter().map(|u| u.velocity).collect();
    let contacts = detect_contacts(&next.units);
    resolve_contacts(&mut next.units, &contacts, physics);
    for (u, v0) in next.units.iter_mut().zip(&pre_impulse) {
        if u.active {
            u.impulse_velocity = u.velocity - *v0;
        }
    }

    apply_boundary(&mut next.units, &cfg.field, physics.boundary_damage_coeff, dt);

    let rotation = physics.rotation_step();
    for (u, &a) in next.units.iter_mut().zip(&actions) {
        if a == ROTATE && u.alive {
            u.heading = wrap_angle(u.heading + rotation);
        }
    }

    let vis = visibility_matrix(&next.units, &next.zones);
    let att = attackable_matrix(&next.units, &vis);
    let interactions = resolve_combat(&mut next.units, &actions, &att);
    update_reveal_timers(&mut next.units, &interactions, physics.reveal_duration);

    for u in next.units.iter_mut().filter(|u| u.alive) {
        let burn: f64 = next
            .zones
            .iter()
            .filter(|z| z.zone_type == ZoneType::Lava && z.contains(u.position))
            .map(|z| z.effect * dt)
            .sum();
        if burn > 0.0 {
            u.health = (u.health - burn).max(0.0);
        }
    }

    for u in next.units.iter_mut() {
        u.alive = u.active && u.health > 0.0;
    }

    if next.first_kill_team.is_none() {
        let lost = |team: u8| {
            next.units
                .iter()
                .zip(&alive_before)
                .any(|(u, &before)| before && !u.alive && u.team == team)
        };
        match (lost(ALLY), lost(ENEMY)) {
            (true, false) => next.first_kill_team = Some(ENEMY),
            (false, true) => next.first_kill_team = Some(ALLY),
            _ => {}
        }
    }

    next.t += 1;
    let gap = health_gap(&next.units);
    let mut reward = gap - next.prev_health_gap;
    next.prev_health_gap = gap;

    let outcome = terminal_outcome(&next);
    let (terminated, truncated) = match outcome {
        Some(Outcome { reason: OutcomeReason::Elimination, .. }) => (true, false),
        Some(_) => (false, true),
        None => (false, false),
    };
    if let Some(o) = outcome {
        reward += if o.winner == Winner::Ally { 1.0 } else { -1.0 };
    }
    next.outcome = outcome;
    next.episode_return += reward;

    Ok(finish(next, actions, reward, terminated, truncated))
}

/// Elementwise [`reset_indexed`], environment `k` keyed by `(seeds[k], k)`.
pub fn reset_batch(configs: &[Arc<ScenarioConfig>], seeds: &[u64]) -> Vec<Result<StepResult, EnvError>> {
    configs
        .par_iter()
        .zip(seeds.par_iter())
        .enumerate()
        .map(|(k, (c, &s))| reset_indexed(Arc::clone(c), s, k as u64))
        .collect()
}

/// Elementwise [`step`]. Missing action vectors count as all-noop.
pub fn step_batch(states: &[EnvState], actions: &[JointAction]) -> Vec<Result<StepResult, EnvError>> {
    states
        .par_iter()
        .enumerate()
        .map(|(k, s)| match actions.get(k) {
            Some(a) => step(s, a),
            None => step(s, &vec![NOOP; s.units.len()]),
        })
        .collect()
}
