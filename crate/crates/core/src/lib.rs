//! Deterministic, batch-parallel 2D multi-agent battle simulator.
//!
//! A scenario describes two teams of circular units on a rectangular field
//! with elliptical terrain zones. The environment advances all units
//! simultaneously in fixed time steps with impulse-based collisions,
//! cone-shaped perception with bush concealment, rectangular hurtboxes and
//! per-unit attack cooldowns.

pub mod action;
pub mod bench;
pub mod combat;
pub mod config;
pub mod env;
pub mod heuristics;
pub mod math;
pub mod naming;
pub mod perception;
pub mod physics;
pub mod rng;
pub mod rollout;
pub mod scenario;
pub mod svg;
pub mod unit;
pub mod zone;

pub use action::{Action, NUM_ACTIONS};
pub use config::{Controller, Field, PhysicsParams, ScenarioConfig, Tier, UnitPlacement};
pub use env::{reset, reset_batch, reset_indexed, step, step_batch, EnvError, EnvState, JointAction, StepResult};
pub use math::Vec2;
pub use unit::{Preset, UnitSpec, UnitState, ALLY, ENEMY};
pub use zone::{Zone, ZoneType};
