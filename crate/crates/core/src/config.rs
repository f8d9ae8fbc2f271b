//! Scenario configuration types and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::math::Vec2;
use crate::unit::{Preset, UnitSpec};
use crate::zone::{Zone, ZoneType};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field {
    pub width: f64,
    pub height: f64,
    /// Editor layout margin; has no effect on the simulation bounds.
    pub margin: f64,
}

impl Field {
    pub fn new(width: f64, height: f64, margin: f64) -> Self {
        Self { width, height, margin }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    pub fn extent(&self) -> Vec2 {
        Vec2::new(self.width, self.height)
    }
}

impl Default for Field {
    fn default() -> Self {
        Self::new(32.0, 32.0, 2.0)
    }
}

/// Simulation constants. Angles are stored in degrees so that scenario files
/// round-trip exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub dt: f64,
    pub restitution: f64,
    pub penetration_slop: f64,
    pub correction_percent: f64,
    pub rotation_step_deg: f64,
    /// Fraction of max health lost per sim-second while out of bounds.
    pub boundary_damage_coeff: f64,
    pub reveal_duration: f64,
    pub enable_noop: bool,
}

impl PhysicsParams {
    pub fn rotation_step(&self) -> f64 {
        self.rotation_step_deg.to_radians()
    }
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            restitution: 0.5,
            penetration_slop: 0.01,
            correction_percent: 0.8,
            rotation_step_deg: 30.0,
            boundary_damage_coeff: 0.1,
            reveal_duration: 1.0,
            enable_noop: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicParams {
    /// Probability of replacing the chosen action with a uniformly random valid one.
    pub epsilon: f64,
    /// Rangers retreat when an enemy is closer than this fraction of their range.
    pub aggressive_threshold: f64,
    pub assassin_speed_threshold: f64,
    pub ranger_range_threshold: f64,
}

/// Named difficulty tiers for the heuristic opponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    Random,
    Novice,
    Medium,
    Advanced,
    Expert,
}

impl Tier {
    pub const ALL: [Tier; 5] = [Tier::Random, Tier::Novice, Tier::Medium, Tier::Advanced, Tier::Expert];

    pub fn params(self) -> HeuristicParams {
        let (epsilon, aggressive_threshold) = match self {
            Tier::Random => (1.0, 0.0),
            Tier::Novice => (0.5, 0.1),
            Tier::Medium => (0.2, 0.3),
            Tier::Advanced => (0.1, 0.5),
            Tier::Expert => (0.01, 0.7),
        };
        HeuristicParams {
            epsilon,
            aggressive_threshold,
            assassin_speed_threshold: 1.4,
            ranger_range_threshold: 10.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Random => "random",
            Tier::Novice => "novice",
            Tier::Medium => "medium",
            Tier::Advanced => "advanced",
            Tier::Expert => "expert",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tier::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown difficulty tier '{s}'"))
    }
}

impl Default for HeuristicParams {
    fn default() -> Self {
        Tier::Medium.params()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Controller {
    /// Actions are supplied by the caller of `step`.
    External,
    Heuristic,
    /// Uniform over valid actions.
    Random,
}

impl Controller {
    pub fn key(self) -> &'static str {
        match self {
            Controller::External => "external",
            Controller::Heuristic => "heuristic",
            Controller::Random => "random",
        }
    }
}

impl FromStr for Controller {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "external" => Ok(Controller::External),
            "heuristic" => Ok(Controller::Heuristic),
            "random" => Ok(Controller::Random),
            other => Err(format!("unknown controller '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamConfig {
    pub id: u8,
    pub controller: Controller,
    pub heuristic: Option<HeuristicParams>,
}

impl TeamConfig {
    pub fn heuristic_params(&self) -> HeuristicParams {
        self.heuristic.unwrap_or_default()
    }
}

/// Override values for a preset, keyed by spec field name. Only keys listed in
/// [`OVERRIDE_KEYS`] are meaningful.
pub type Overrides = BTreeMap<String, OverrideValue>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverrideValue {
    Number(f64),
    Bool(bool),
}

pub const OVERRIDE_KEYS: [&str; 11] = [
    "attack_cooldown",
    "attack_damage",
    "attack_range",
    "body_mass",
    "body_radius",
    "kinematic",
    "max_health",
    "sight_angle",
    "sight_range",
    "space_occupied",
    "speed",
];

#[derive(Debug, Clone, PartialEq)]
pub enum UnitSource {
    Preset { preset: Preset, overrides: Overrides },
    Custom(UnitSpec),
}

impl UnitSource {
    pub fn preset(preset: Preset) -> Self {
        UnitSource::Preset { preset, overrides: Overrides::new() }
    }

    /// Resolves overrides into a concrete spec. Unknown override keys or
    /// mistyped values are reported as errors.
    pub fn resolve(&self) -> Result<UnitSpec, String> {
        match self {
            UnitSource::Custom(spec) => Ok(spec.clone()),
            UnitSource::Preset { preset, overrides } => {
                let mut spec = preset.spec();
                for (key, value) in overrides {
                    apply_override(&mut spec, key, *value)?;
                }
                Ok(spec)
            }
        }
    }

    pub fn set_override(&mut self, key: &str, value: f64) {
        match self {
            UnitSource::Preset { overrides, .. } => {
                overrides.insert(key.to_string(), OverrideValue::Number(value));
            }
            UnitSource::Custom(spec) => {
                // Numeric keys only; errors are impossible for the keys used internally.
                let _ = apply_override(spec, key, OverrideValue::Number(value));
            }
        }
    }
}

fn apply_override(spec: &mut UnitSpec, key: &str, value: OverrideValue) -> Result<(), String> {
    use OverrideValue::{Bool, Number};
    match (key, value) {
        ("kinematic", Bool(b)) => spec.kinematic = b,
        ("space_occupied", Number(n)) if n >= 0.0 && n.fract() == 0.0 => spec.space_occupied = n as u32,
        ("attack_cooldown", Number(n)) => spec.attack_cooldown = n,
        ("attack_damage", Number(n)) => spec.attack_damage = n,
        ("attack_range", Number(n)) => spec.attack_range = n,
        ("body_mass", Number(n)) => spec.body_mass = n,
        ("body_radius", Number(n)) => spec.body_radius = n,
        ("max_health", Number(n)) => spec.max_health = n,
        ("sight_angle", Number(n)) => spec.sight_angle = n,
        ("sight_range", Number(n)) => spec.sight_range = n,
        ("speed", Number(n)) => spec.speed = n,
        (k, _) if OVERRIDE_KEYS.contains(&k) => return Err(format!("override '{k}' has the wrong value type")),
        (k, _) => return Err(format!("unknown override '{k}'")),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitPlacement {
    pub team: u8,
    pub source: UnitSource,
    pub position: Vec2,
    pub heading_deg: f64,
}

impl UnitPlacement {
    pub fn new(team: u8, preset: Preset, position: Vec2, heading_deg: f64) -> Self {
        Self { team, source: UnitSource::preset(preset), position, heading_deg }
    }
}

/// Complete parameterization of one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub field: Field,
    pub physics: PhysicsParams,
    pub max_steps: u32,
    pub teams: Vec<TeamConfig>,
    pub units: Vec<UnitPlacement>,
    pub zones: Vec<Zone>,
    pub max_units: usize,
    pub max_zones: usize,
}

pub const DEFAULT_MAX_STEPS: u32 = 400;
pub const MAX_ZONE_SLOTS: usize = 64;

impl ScenarioConfig {
    /// Empty two-team scenario: team 0 external, team 1 heuristic (medium).
    pub fn new(name: impl Into<String>, field: Field) -> Self {
        Self {
            name: name.into(),
            field,
            physics: PhysicsParams::default(),
            max_steps: DEFAULT_MAX_STEPS,
            teams: default_teams(),
            units: Vec::new(),
            zones: Vec::new(),
            max_units: 0,
            max_zones: 0,
        }
    }

    pub fn team(&self, id: u8) -> Option<&TeamConfig> {
        self.teams.iter().find(|t| t.id == id)
    }

    pub fn team_mut(&mut self, id: u8) -> Option<&mut TeamConfig> {
        self.teams.iter_mut().find(|t| t.id == id)
    }

    /// Sets the controller of team `id`, keeping the team list well-formed.
    pub fn set_controller(&mut self, id: u8, controller: Controller, heuristic: Option<HeuristicParams>) {
        if let Some(team) = self.team_mut(id) {
            team.controller = controller;
            team.heuristic = heuristic;
        } else {
            self.teams.push(TeamConfig { id, controller, heuristic });
            self.teams.sort_by_key(|t| t.id);
        }
    }
}

pub fn default_teams() -> Vec<TeamConfig> {
    vec![
        TeamConfig { id: 0, controller: Controller::External, heuristic: None },
        TeamConfig { id: 1, controller: Controller::Heuristic, heuristic: Some(Tier::Medium.params()) },
    ]
}

/// Which team won and why.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Ally,
    Enemy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeReason {
    Elimination,
    TruncationHealth,
    TruncationTie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub winner: Winner,
    pub reason: OutcomeReason,
}

impl Winner {
    pub fn key(self) -> &'static str {
        match self {
            Winner::Ally => "ally",
            Winner::Enemy => "enemy",
        }
    }
}

impl OutcomeReason {
    pub fn key(self) -> &'static str {
        match self {
            OutcomeReason::Elimination => "elimination",
            OutcomeReason::TruncationHealth => "truncation_health",
            OutcomeReason::TruncationTie => "truncation_tie",
        }
    }
}

/// A single invariant violation, located by a field path such as `units[0].position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Informational notes, e.g. defaults applied during loading. Never make a
    /// config invalid.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "error: {}", v.message)?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

fn in_unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Checks every config invariant; never stops at the first problem.
pub fn validate_scenario(config: &ScenarioConfig) -> ValidationReport {
    let mut r = ValidationReport::default();

    let f = &config.field;
    if !(f.width > 0.0 && f.width.is_finite()) {
        r.push("field.width", "field.width must be > 0");
    }
    if !(f.height > 0.0 && f.height.is_finite()) {
        r.push("field.height", "field.height must be > 0");
    }
    if !(f.margin >= 0.0 && f.margin.is_finite()) {
        r.push("field.margin", "field.margin must be >= 0");
    }

    let p = &config.physics;
    if !(p.dt > 0.0 && p.dt.is_finite()) {
        r.push("physics.dt", "physics.dt must be > 0");
    }
    if !in_unit_interval(p.restitution) {
        r.push("physics.restitution", "physics.restitution must be in [0, 1]");
    }
    if !(p.penetration_slop >= 0.0 && p.penetration_slop.is_finite()) {
        r.push("physics.penetration_slop", "physics.penetration_slop must be >= 0");
    }
    if !(p.correction_percent > 0.0 && p.correction_percent <= 1.0) {
        r.push("physics.correction_percent", "physics.correction_percent must be in (0, 1]");
    }
    if !p.rotation_step_deg.is_finite() {
        r.push("physics.rotation_step_deg", "physics.rotation_step_deg must be finite");
    }
    if !(p.boundary_damage_coeff >= 0.0 && p.boundary_damage_coeff.is_finite()) {
        r.push("physics.boundary_damage_coeff", "physics.boundary_damage_coeff must be >= 0");
    }
    if !(p.reveal_duration >= 0.0 && p.reveal_duration.is_finite()) {
        r.push("physics.reveal_duration", "physics.reveal_duration must be >= 0");
    }

    if config.max_steps == 0 {
        r.push("max_steps", "max_steps must be >= 1");
    }

    let mut ids: Vec<u8> = config.teams.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    if ids != [0, 1] {
        r.push("teams", "exactly two teams with ids 0 and 1 are required");
    }
    for (k, team) in config.teams.iter().enumerate() {
        if let Some(h) = &team.heuristic {
            if !in_unit_interval(h.epsilon) {
                r.push(format!("teams[{k}].heuristic.epsilon"), format!("teams[{k}].heuristic.epsilon must be in [0, 1]"));
            }
            if !in_unit_interval(h.aggressive_threshold) {
                r.push(
                    format!("teams[{k}].heuristic.aggressive_threshold"),
                    format!("teams[{k}].heuristic.aggressive_threshold must be in [0, 1]"),
                );
            }
            if !(h.assassin_speed_threshold >= 0.0 && h.ranger_range_threshold >= 0.0) {
                r.push(format!("teams[{k}].heuristic"), format!("teams[{k}].heuristic thresholds must be >= 0"));
            }
        }
    }

    if config.units.len() > config.max_units {
        r.push("units", format!("{} units exceed max_units {}", config.units.len(), config.max_units));
    }
    let mut per_team = [0usize; 2];
    for (k, u) in config.units.iter().enumerate() {
        if u.team > 1 {
            r.push(format!("units[{k}].team"), format!("units[{k}].team must be 0 or 1"));
        } else {
            per_team[u.team as usize] += 1;
        }
        if !u.position.is_finite() || !f.contains(u.position) {
            r.push(format!("units[{k}].position"), format!("units[{k}].position outside field"));
        }
        if !u.heading_deg.is_finite() {
            r.push(format!("units[{k}].heading_deg"), format!("units[{k}].heading_deg must be finite"));
        }
        match u.source.resolve() {
            Ok(spec) => {
                for (field, msg) in spec.violations() {
                    r.push(format!("units[{k}].spec.{field}"), format!("units[{k}].spec: {msg}"));
                }
            }
            Err(e) => r.push(format!("units[{k}].overrides"), format!("units[{k}].overrides: {e}")),
        }
    }
    for (team, count) in per_team.iter().enumerate() {
        if *count == 0 {
            r.push("units", format!("team {team} has no units"));
        }
    }

    if config.max_zones > MAX_ZONE_SLOTS {
        r.push("max_zones", format!("max_zones must be <= {MAX_ZONE_SLOTS}"));
    }
    if config.zones.len() > config.max_zones {
        r.push("zones", format!("{} zones exceed max_zones {}", config.zones.len(), config.max_zones));
    }
    for (k, z) in config.zones.iter().enumerate() {
        if !z.center.is_finite() {
            r.push(format!("zones[{k}].center"), format!("zones[{k}].center must be finite"));
        }
        if z.zone_type != ZoneType::Inactive
            && !(z.semi_axes.x > 0.0 && z.semi_axes.y > 0.0 && z.semi_axes.is_finite())
        {
            r.push(format!("zones[{k}].semi_axes"), format!("zones[{k}].semi_axes must be > 0"));
        }
        match z.zone_type {
            ZoneType::Swamp => {
                if z.effect > 1.0 {
                    r.push(format!("zones[{k}].effect"), format!("zones[{k}].effect > 1 for swamp"));
                } else if !(z.effect > 0.0) {
                    r.push(format!("zones[{k}].effect"), format!("zones[{k}].effect <= 0 for swamp"));
                }
            }
            ZoneType::Lava => {
                if !(z.effect >= 0.0 && z.effect.is_finite()) {
                    r.push(format!("zones[{k}].effect"), format!("zones[{k}].effect < 0 for lava"));
                }
            }
            ZoneType::Bush | ZoneType::Inactive => {
                if z.effect != 0.0 {
                    r.push(format!("zones[{k}].effect"), format!("zones[{k}].effect must be 0 for {}", z.zone_type));
                }
            }
        }
    }

    r
}
