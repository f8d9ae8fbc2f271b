//! Elliptical terrain zones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::math::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZoneType {
    Lava,
    Bush,
    Swamp,
    Inactive,
}

impl ZoneType {
    pub const ACTIVE: [ZoneType; 3] = [ZoneType::Lava, ZoneType::Bush, ZoneType::Swamp];

    pub fn code(self) -> Option<char> {
        match self {
            ZoneType::Lava => Some('L'),
            ZoneType::Bush => Some('B'),
            ZoneType::Swamp => Some('S'),
            ZoneType::Inactive => None,
        }
    }

    pub fn from_code(c: char) -> Option<ZoneType> {
        ZoneType::ACTIVE.into_iter().find(|z| z.code() == Some(c))
    }

    pub fn key(self) -> &'static str {
        match self {
            ZoneType::Lava => "lava",
            ZoneType::Bush => "bush",
            ZoneType::Swamp => "swamp",
            ZoneType::Inactive => "inactive",
        }
    }
}

impl fmt::Display for ZoneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ZoneType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lava" => Ok(ZoneType::Lava),
            "bush" => Ok(ZoneType::Bush),
            "swamp" => Ok(ZoneType::Swamp),
            "inactive" => Ok(ZoneType::Inactive),
            other => Err(format!("unknown zone type '{other}'")),
        }
    }
}

/// An axis-aligned ellipse with a type-dependent effect magnitude.
///
/// `effect` is HP per sim-second for lava, the speed multiplier for swamp,
/// and unused (0) for bush.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub zone_type: ZoneType,
    pub center: Vec2,
    pub semi_axes: Vec2,
    pub effect: f64,
}

impl Zone {
    pub fn new(zone_type: ZoneType, center: Vec2, semi_axes: Vec2, effect: f64) -> Self {
        Self { zone_type, center, semi_axes, effect }
    }

    pub fn inactive() -> Self {
        Self::new(ZoneType::Inactive, Vec2::ZERO, Vec2::ZERO, 0.0)
    }

    pub fn is_active(&self) -> bool {
        self.zone_type != ZoneType::Inactive
    }

    /// Whether `p` lies inside (or on) the ellipse. Inactive zones contain nothing.
    pub fn contains(&self, p: Vec2) -> bool {
        if !self.is_active() {
            return false;
        }
        let dx = (p.x - self.center.x) / self.semi_axes.x;
        let dy = (p.y - self.center.y) / self.semi_axes.y;
        dx * dx + dy * dy <= 1.0
    }
}

/// Strongest (smallest) multiplier among swamps containing `p`; 1.0 outside swamps.
pub fn swamp_multiplier(zones: &[Zone], p: Vec2) -> f64 {
    zones
        .iter()
        .filter(|z| z.zone_type == ZoneType::Swamp && z.contains(p))
        .map(|z| z.effect)
        .fold(1.0, f64::min)
}

/// Index of the first bush containing `p`.
pub fn bush_at(zones: &[Zone], p: Vec2) -> Option<usize> {
    zones.iter().position(|z| z.zone_type == ZoneType::Bush && z.contains(p))
}
