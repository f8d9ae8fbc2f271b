//! Level sampling over free-parameter ranges and the three level mutation
//! operators (parameter noise, zone axis swap, zone retype).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::catalog::catalog_scenario;
use super::io::{scenario_to_value, LoadError};
use crate::config::{Controller, Field, ScenarioConfig, UnitSource, MAX_ZONE_SLOTS};
use crate::math::Vec2;
use crate::unit::UnitSpec;
use crate::zone::{Zone, ZoneType};

/// Smallest values kept by clipping where the invariant is a strict `> 0`.
const MIN_HEALTH: f64 = 1.0;
const MIN_SEMI_AXIS: f64 = 0.1;
const MIN_SWAMP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    /// Uniform draw; zero-width ranges return `min` without consuming randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min >= self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }

    /// Intersects with `[lo, hi]`; an empty result collapses onto its lower end.
    pub fn clipped(&self, lo: f64, hi: f64) -> Self {
        let min = self.min.clamp(lo, hi);
        let max = self.max.clamp(lo, hi).max(min);
        Self { min, max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    UnitSpec,
    Zones,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitRanges {
    pub max_health: Range,
    pub speed: Range,
    /// Magnitude; sampled values keep the sign of the unit's base damage.
    pub attack_damage: Range,
}

impl Default for UnitRanges {
    fn default() -> Self {
        Self {
            max_health: Range::new(20.0, 800.0),
            speed: Range::new(0.5, 1.5),
            attack_damage: Range::new(5.0, 80.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneRanges {
    pub types: Vec<ZoneType>,
    pub count_min: usize,
    pub count_max: usize,
    /// Center box; `None` means the whole field.
    #[serde(default)]
    pub center_min: Option<[f64; 2]>,
    #[serde(default)]
    pub center_max: Option<[f64; 2]>,
    pub semi_axes: Range,
    pub lava_effect: Range,
    pub swamp_effect: Range,
}

impl Default for ZoneRanges {
    fn default() -> Self {
        Self {
            types: ZoneType::ACTIVE.to_vec(),
            count_min: 6,
            count_max: 6,
            center_min: None,
            center_max: None,
            semi_axes: Range::new(1.0, 6.0),
            lava_effect: Range::new(1.0, 10.0),
            swamp_effect: Range::new(0.3, 0.8),
        }
    }
}

impl ZoneRanges {
    fn center_box(&self, field: &Field) -> (Range, Range) {
        let lo = self.center_min.unwrap_or([0.0, 0.0]);
        let hi = self.center_max.unwrap_or([field.width, field.height]);
        (
            Range::new(lo[0], hi[0]).clipped(0.0, field.width),
            Range::new(lo[1], hi[1]).clipped(0.0, field.height),
        )
    }

    pub fn effect_range(&self, t: ZoneType) -> Range {
        match t {
            ZoneType::Lava => self.lava_effect,
            ZoneType::Swamp => self.swamp_effect,
            ZoneType::Bush | ZoneType::Inactive => Range::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicRanges {
    pub epsilon: Range,
    pub aggressive_threshold: Range,
}

impl Default for HeuristicRanges {
    fn default() -> Self {
        Self { epsilon: Range::new(0.0, 1.0), aggressive_threshold: Range::new(0.0, 1.0) }
    }
}

/// Free-parameter ranges for all three categories.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamRanges {
    pub unit: UnitRanges,
    pub zone: ZoneRanges,
    pub heuristic: HeuristicRanges,
}

impl ParamRanges {
    /// Clips every range to the bounds that keep sampled configs valid.
    pub fn clipped(&self) -> Self {
        let u = &self.unit;
        let z = &self.zone;
        let h = &self.heuristic;
        let mut types: Vec<ZoneType> = z.types.iter().copied().filter(|t| *t != ZoneType::Inactive).collect();
        types.dedup();
        if types.is_empty() {
            types = ZoneType::ACTIVE.to_vec();
        }
        let count_max = z.count_max.min(MAX_ZONE_SLOTS);
        Self {
            unit: UnitRanges {
                max_health: u.max_health.clipped(MIN_HEALTH, f64::MAX),
                speed: u.speed.clipped(0.0, f64::MAX),
                attack_damage: u.attack_damage.clipped(0.0, f64::MAX),
            },
            zone: ZoneRanges {
                types,
                count_min: z.count_min.min(count_max),
                count_max,
                center_min: z.center_min,
                center_max: z.center_max,
                semi_axes: z.semi_axes.clipped(MIN_SEMI_AXIS, f64::MAX),
                lava_effect: z.lava_effect.clipped(0.0, f64::MAX),
                swamp_effect: z.swamp_effect.clipped(MIN_SWAMP, 1.0),
            },
            heuristic: HeuristicRanges {
                epsilon: h.epsilon.clipped(0.0, 1.0),
                aggressive_threshold: h.aggressive_threshold.clipped(0.0, 1.0),
            },
        }
    }
}

/// A base scenario plus the ranges and categories to resample.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGenSpec {
    pub base: ScenarioConfig,
    pub ranges: ParamRanges,
    pub categories: BTreeSet<Category>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    base: Value,
    #[serde(default)]
    ranges: ParamRanges,
    categories: BTreeSet<Category>,
}

impl LevelGenSpec {
    /// Ranges are clipped here, so sampling never has to.
    pub fn new(base: ScenarioConfig, ranges: ParamRanges, categories: impl IntoIterator<Item = Category>) -> Self {
        Self { base, ranges: ranges.clipped(), categories: categories.into_iter().collect() }
    }

    /// Reads a spec document. `base` is either a catalog name or an inline
    /// scenario document.
    pub fn from_json(bytes: &[u8]) -> Result<Self, LoadError> {
        let file: SpecFile = serde_json::from_slice(bytes).map_err(|e| LoadError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let base = match &file.base {
            Value::String(name) => catalog_scenario(name)
                .map_err(|e| LoadError::Schema { path: "base".into(), message: e.to_string() })?,
            other => {
                let text = serde_json::to_vec(other).expect("value serializes");
                super::io::load_scenario(&text).map_err(|e| match e {
                    LoadError::Schema { path, message } => LoadError::Schema { path: format!("base.{path}"), message },
                    other => other,
                })?
            }
        };
        Ok(Self::new(base, file.ranges, file.categories))
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "base": scenario_to_value(&self.base),
            "ranges": self.ranges,
            "categories": self.categories,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

fn set_stat(source: &mut UnitSource, key: &str, value: f64) {
    source.set_override(key, value);
}

fn base_spec(source: &UnitSource) -> UnitSpec {
    source.resolve().expect("valid configs resolve")
}

fn sample_zone<R: Rng + ?Sized>(ranges: &ZoneRanges, field: &Field, rng: &mut R) -> Zone {
    let zone_type = *ranges.types.choose(rng).expect("types non-empty after clipping");
    let (cx, cy) = ranges.center_box(field);
    let center = Vec2::new(cx.sample(rng), cy.sample(rng));
    let semi_axes = Vec2::new(ranges.semi_axes.sample(rng), ranges.semi_axes.sample(rng));
    let effect = ranges.effect_range(zone_type).sample(rng);
    Zone { zone_type, center, semi_axes, effect }
}

/// Draws every enabled free parameter independently and uniformly.
pub fn sample_level<R: Rng + ?Sized>(spec: &LevelGenSpec, rng: &mut R) -> ScenarioConfig {
    let mut c = spec.base.clone();
    let r = &spec.ranges;
    if spec.categories.contains(&Category::UnitSpec) {
        for u in &mut c.units {
            let base = base_spec(&u.source);
            let sign = if base.attack_damage < 0.0 { -1.0 } else { 1.0 };
            let h = r.unit.max_health.sample(rng);
            let v = r.unit.speed.sample(rng);
            let d = r.unit.attack_damage.sample(rng);
            set_stat(&mut u.source, "max_health", h);
            set_stat(&mut u.source, "speed", v);
            set_stat(&mut u.source, "attack_damage", sign * d);
        }
    }
    if spec.categories.contains(&Category::Zones) {
        let n = if r.zone.count_min >= r.zone.count_max {
            r.zone.count_min
        } else {
            rng.random_range(r.zone.count_min..=r.zone.count_max)
        };
        c.zones = (0..n).map(|_| sample_zone(&r.zone, &c.field, rng)).collect();
        c.max_zones = c.max_zones.max(r.zone.count_max);
    }
    if spec.categories.contains(&Category::Heuristic) {
        for team in c.teams.iter_mut().filter(|t| t.controller == Controller::Heuristic) {
            let mut h = team.heuristic_params();
            h.epsilon = r.heuristic.epsilon.sample(rng);
            h.aggressive_threshold = r.heuristic.aggressive_threshold.sample(rng);
            team.heuristic = Some(h);
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MutationOp {
    /// Adds `U(-delta·width, +delta·width)` to every continuous free parameter.
    Perturb { delta: f64 },
    SwapAxes,
    Retype,
}

pub const DEFAULT_PERTURB_DELTA: f64 = 0.1;

impl MutationOp {
    pub fn key(&self) -> &'static str {
        match self {
            MutationOp::Perturb { .. } => "perturb",
            MutationOp::SwapAxes => "swap-axes",
            MutationOp::Retype => "retype",
        }
    }
}

impl fmt::Display for MutationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for MutationOp {
    type Err = String;

    /// `perturb`, `perturb:<delta>`, `swap-axes` or `retype`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perturb" => Ok(MutationOp::Perturb { delta: DEFAULT_PERTURB_DELTA }),
            "swap-axes" | "swap_axes" => Ok(MutationOp::SwapAxes),
            "retype" => Ok(MutationOp::Retype),
            _ => match s.strip_prefix("perturb:").map(str::parse::<f64>) {
                Some(Ok(delta)) if (0.0..=1.0).contains(&delta) => Ok(MutationOp::Perturb { delta }),
                Some(_) => Err(format!("perturb scale must be a number in [0, 1], got '{s}'")),
                None => Err(format!("unknown mutation '{s}'")),
            },
        }
    }
}

fn noise<R: Rng + ?Sized>(range: Range, delta: f64, rng: &mut R) -> f64 {
    let a = delta * range.width();
    if a > 0.0 {
        rng.random_range(-a..=a)
    } else {
        0.0
    }
}

fn active_zone<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Option<usize> {
    let active: Vec<usize> = (0..config.zones.len()).filter(|&k| config.zones[k].is_active()).collect();
    active.choose(rng).copied()
}

/// [`mutate_level_in`] with the default parameter ranges.
pub fn mutate_level<R: Rng + ?Sized>(config: &ScenarioConfig, op: MutationOp, rng: &mut R) -> ScenarioConfig {
    mutate_level_in(config, op, &ParamRanges::default(), rng)
}

/// Applies one mutation. Noise widths and retype effects come from `ranges`;
/// results are clipped to the config invariants. Zone operators leave configs
/// without active zones unchanged.
pub fn mutate_level_in<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    op: MutationOp,
    ranges: &ParamRanges,
    rng: &mut R,
) -> ScenarioConfig {
    let mut c = config.clone();
    match op {
        MutationOp::Perturb { delta } => {
            if delta <= 0.0 {
                return c;
            }
            let r = ranges;
            for u in &mut c.units {
                let base = base_spec(&u.source);
                let h = (base.max_health + noise(r.unit.max_health, delta, rng)).max(MIN_HEALTH);
                let v = (base.speed + noise(r.unit.speed, delta, rng)).max(0.0);
                let sign = if base.attack_damage < 0.0 { -1.0 } else { 1.0 };
                let d = (base.attack_damage.abs() + noise(r.unit.attack_damage, delta, rng)).max(0.0);
                set_stat(&mut u.source, "max_health", h);
                set_stat(&mut u.source, "speed", v);
                set_stat(&mut u.source, "attack_damage", sign * d);
            }
            let field = c.field;
            let (cx, cy) = r.zone.center_box(&field);
            for z in c.zones.iter_mut().filter(|z| z.is_active()) {
                z.center.x = (z.center.x + noise(cx, delta, rng)).clamp(0.0, field.width);
                z.center.y = (z.center.y + noise(cy, delta, rng)).clamp(0.0, field.height);
                z.semi_axes.x = (z.semi_axes.x + noise(r.zone.semi_axes, delta, rng)).max(MIN_SEMI_AXIS);
                z.semi_axes.y = (z.semi_axes.y + noise(r.zone.semi_axes, delta, rng)).max(MIN_SEMI_AXIS);
                match z.zone_type {
                    ZoneType::Lava => z.effect = (z.effect + noise(r.zone.lava_effect, delta, rng)).max(0.0),
                    ZoneType::Swamp => {
                        z.effect = (z.effect + noise(r.zone.swamp_effect, delta, rng)).clamp(MIN_SWAMP, 1.0)
                    }
                    ZoneType::Bush | ZoneType::Inactive => {}
                }
            }
            for team in c.teams.iter_mut().filter(|t| t.controller == Controller::Heuristic) {
                let mut h = team.heuristic_params();
                h.epsilon = (h.epsilon + noise(r.heuristic.epsilon, delta, rng)).clamp(0.0, 1.0);
                h.aggressive_threshold =
                    (h.aggressive_threshold + noise(r.heuristic.aggressive_threshold, delta, rng)).clamp(0.0, 1.0);
                team.heuristic = Some(h);
            }
        }
        MutationOp::SwapAxes => {
            if let Some(k) = active_zone(&c, rng) {
                let a = &mut c.zones[k].semi_axes;
                std::mem::swap(&mut a.x, &mut a.y);
            }
        }
        MutationOp::Retype => {
            if let Some(k) = active_zone(&c, rng) {
                let t = *ZoneType::ACTIVE.choose(rng).expect("non-empty");
                c.zones[k].zone_type = t;
                c.zones[k].effect = ranges.zone.effect_range(t).sample(rng);
            }
        }
    }
    c
}
