//! Unit specifications, the nine stock presets, and per-step unit state.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::math::Vec2;

pub const DEFAULT_SIGHT_ANGLE: f64 = 2.0 * PI / 3.0;
pub const DEFAULT_SIGHT_RANGE: f64 = 20.0;

/// Ally team id.
pub const ALLY: u8 = 0;
/// Enemy team id.
pub const ENEMY: u8 = 1;

/// Static attributes of a unit.
///
/// Negative `attack_damage` means the unit heals instead of attacking.
/// `sight_angle` is the full width of the view fan in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSpec {
    pub name: String,
    pub max_health: f64,
    pub body_radius: f64,
    pub body_mass: f64,
    pub speed: f64,
    pub attack_damage: f64,
    pub attack_range: f64,
    pub attack_cooldown: f64,
    pub sight_angle: f64,
    pub sight_range: f64,
    pub space_occupied: u32,
    pub kinematic: bool,
}

impl UnitSpec {
    pub fn is_healer(&self) -> bool {
        self.attack_damage < 0.0
    }

    /// Returns `(field, message)` for every broken invariant.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut check = |ok: bool, field: &'static str, msg: &str| {
            if !ok {
                out.push((field, msg.to_string()));
            }
        };
        check(self.max_health > 0.0, "max_health", "max_health must be > 0");
        check(self.body_radius > 0.0, "body_radius", "body_radius must be > 0");
        check(self.body_mass > 0.0, "body_mass", "body_mass must be > 0");
        check(self.speed >= 0.0, "speed", "speed must be >= 0");
        check(self.attack_damage.is_finite(), "attack_damage", "attack_damage must be finite");
        check(self.attack_range >= 0.0, "attack_range", "attack_range must be >= 0");
        check(self.attack_cooldown >= 0.0, "attack_cooldown", "attack_cooldown must be >= 0");
        check(
            self.sight_angle > 0.0 && self.sight_angle <= 2.0 * PI,
            "sight_angle",
            "sight_angle must be in (0, 2π]",
        );
        check(self.sight_range > 0.0, "sight_range", "sight_range must be > 0");
        // NaN-guard for everything else: comparisons above already reject NaN.
        check(
            self.max_health.is_finite()
                && self.body_radius.is_finite()
                && self.body_mass.is_finite()
                && self.speed.is_finite()
                && self.attack_range.is_finite()
                && self.attack_cooldown.is_finite()
                && self.sight_range.is_finite(),
            "spec",
            "all scalar attributes must be finite",
        );
        out
    }
}

/// The stock unit roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Farmer,
    Assassin,
    TheKing,
    Mammoth,
    Archer,
    Cannon,
    Deadeye,
    Healer,
    Paladin,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Farmer,
        Preset::Assassin,
        Preset::TheKing,
        Preset::Mammoth,
        Preset::Archer,
        Preset::Cannon,
        Preset::Deadeye,
        Preset::Healer,
        Preset::Paladin,
    ];

    /// Single-letter code used in composition names.
    pub fn code(self) -> char {
        match self {
            Preset::Farmer => 'F',
            Preset::Assassin => 'S',
            Preset::TheKing => 'K',
            Preset::Mammoth => 'M',
            Preset::Archer => 'A',
            Preset::Cannon => 'C',
            Preset::Deadeye => 'D',
            Preset::Healer => 'H',
            Preset::Paladin => 'P',
        }
    }

    pub fn from_code(code: char) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.code() == code)
    }

    /// Lower-case identifier used in scenario files.
    pub fn key(self) -> &'static str {
        match self {
            Preset::Farmer => "farmer",
            Preset::Assassin => "assassin",
            Preset::TheKing => "theking",
            Preset::Mammoth => "mammoth",
            Preset::Archer => "archer",
            Preset::Cannon => "cannon",
            Preset::Deadeye => "deadeye",
            Preset::Healer => "healer",
            Preset::Paladin => "paladin",
        }
    }

    pub fn spec(self) -> UnitSpec {
        // health, radius, mass, speed, damage, range, cooldown, space
        let (h, r, m, v, dmg, range, cd, space) = match self {
            Preset::Farmer => (60.0, 1.0, 1.0, 1.1, 14.0, 2.5, 2.5, 1),
            Preset::Assassin => (70.0, 1.0, 1.0, 1.4, 22.0, 2.5, 1.5, 1),
            Preset::TheKing => (346.0, 1.47, 10.0, 1.2, 46.0, 3.2, 2.5, 1),
            Preset::Mammoth => (685.0, 4.25, 50.0, 1.2, 20.0, 3.0, 6.5, 4),
            Preset::Archer => (40.0, 1.0, 1.0, 1.0, 28.0, 27.0, 8.0, 1),
            Preset::Cannon => (100.0, 1.0, 5.2, 0.5, 80.0, 40.0, 10.0, 1),
            Preset::Deadeye => (40.0, 1.0, 1.0, 1.1, 25.0, 20.0, 8.0, 1),
            Preset::Healer => (25.0, 1.0, 1.0, 1.0, -7.0, 10.0, 2.0, 1),
            Preset::Paladin => (220.0, 1.32, 8.5, 1.2, -6.0, 7.5, 2.0, 1),
        };
        UnitSpec {
            name: self.key().to_string(),
            max_health: h,
            body_radius: r,
            body_mass: m,
            speed: v,
            attack_damage: dmg,
            attack_range: range,
            attack_cooldown: cd,
            sight_angle: DEFAULT_SIGHT_ANGLE,
            sight_range: DEFAULT_SIGHT_RANGE,
            space_occupied: space,
            kinematic: false,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Preset {
    type Err = String;

    /// Accepts the file key (`"farmer"`), the display name (`"Farmer"`,
    /// `"TheKing"`) or the single-letter code (`"F"`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        if let Some(p) = Preset::ALL.into_iter().find(|p| p.key() == lower) {
            return Ok(p);
        }
        let mut chars = s.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if let Some(p) = Preset::from_code(c) {
                return Ok(p);
            }
        }
        Err(format!("unknown unit preset '{s}'"))
    }
}

/// Dynamic state of one unit slot.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitState {
    pub spec: UnitSpec,
    pub team: u8,
    pub position: Vec2,
    pub velocity: Vec2,
    /// Velocity change applied by the previous contact-resolution pass; carried
    /// into the next step's integration.
    pub impulse_velocity: Vec2,
    pub heading: f64,
    pub health: f64,
    pub cooldown_timer: f64,
    pub alive: bool,
    /// `false` for padding placeholders.
    pub active: bool,
    pub reveal_timer: f64,
}

impl UnitState {
    pub fn spawn(spec: UnitSpec, team: u8, position: Vec2, heading: f64) -> Self {
        let health = spec.max_health;
        Self {
            spec,
            team,
            position,
            velocity: Vec2::ZERO,
            impulse_velocity: Vec2::ZERO,
            heading,
            health,
            cooldown_timer: 0.0,
            alive: true,
            active: true,
            reveal_timer: 0.0,
        }
    }

    /// Inactive padding slot. Its spec is a harmless Farmer copy so every
    /// divisor stays non-zero.
    pub fn placeholder() -> Self {
        Self {
            spec: Preset::Farmer.spec(),
            team: ALLY,
            position: Vec2::ZERO,
            velocity: Vec2::ZERO,
            impulse_velocity: Vec2::ZERO,
            heading: 0.0,
            health: 0.0,
            cooldown_timer: 0.0,
            alive: false,
            active: false,
            reveal_timer: 0.0,
        }
    }

    pub fn heading_vec(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    pub fn health_ratio(&self) -> f64 {
        self.health / self.spec.max_health
    }

    pub fn inverse_mass(&self) -> f64 {
        if self.spec.kinematic {
            0.0
        } else {
            1.0 / self.spec.body_mass
        }
    }
}
