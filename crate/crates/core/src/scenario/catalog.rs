//! Predefined scenarios.
//!
//! Three kinds of entries ship as scenario files under `catalog/`:
//! challenge maps with fixed units and zones, unit compositions without
//! zones, and zone layouts without units. A unit composition and a zone
//! layout combine into one scenario named `<units>_<zones>`.

use std::collections::BTreeMap;

use thiserror::Error;

use super::io::{load_scenario, LoadError};
use crate::config::{Field, ScenarioConfig, UnitPlacement};
use crate::math::Vec2;
use crate::naming::{parse_composition_name, parse_zones, Composition};
use crate::unit::{Preset, ALLY, ENEMY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CatalogKind {
    Challenge,
    Units,
    Zones,
}

impl CatalogKind {
    pub fn key(self) -> &'static str {
        match self {
            CatalogKind::Challenge => "challenge",
            CatalogKind::Units => "units",
            CatalogKind::Zones => "zones",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: CatalogKind,
    /// Canonical scenario document.
    pub source: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown scenario '{0}'")]
    Unknown(String),
    #[error("'{name}' is a {found} entry, expected {expected}")]
    WrongKind { name: String, found: &'static str, expected: &'static str },
    #[error("catalog entry '{name}' is malformed: {source}")]
    Malformed { name: String, source: LoadError },
}

macro_rules! entry {
    ($kind:ident, $name:literal, $file:literal) => {
        CatalogEntry { name: $name, kind: CatalogKind::$kind, source: include_str!(concat!("../../catalog/", $file)) }
    };
}

static ENTRIES: &[CatalogEntry] = &[
    entry!(Challenge, "crossfire", "crossfire.json"),
    entry!(Challenge, "vsrangers", "vsrangers.json"),
    entry!(Challenge, "ambush", "ambush.json"),
    entry!(Challenge, "superking", "superking.json"),
    entry!(Challenge, "clover", "clover.json"),
    entry!(Challenge, "bypass", "bypass.json"),
    entry!(Challenge, "ribbon", "ribbon.json"),
    entry!(Challenge, "grid", "grid.json"),
    entry!(Challenge, "pingpong", "pingpong.json"),
    entry!(Challenge, "encirclement", "encirclement.json"),
    entry!(Units, "1F1M3A1Hvs2F1S1K1A1H", "units/1F1M3A1Hvs2F1S1K1A1H.json"),
    entry!(Units, "2F1M1A1C1Pvs2F1S1K1A1H", "units/2F1M1A1C1Pvs2F1S1K1A1H.json"),
    entry!(Units, "1S1M1A2C1Hvs2F1S1K1A1H", "units/1S1M1A2C1Hvs2F1S1K1A1H.json"),
    entry!(Units, "1F1K2D2Pvs2F1S1K1A1H", "units/1F1K2D2Pvs2F1S1K1A1H.json"),
    entry!(Units, "2F1M2Avs2S1K", "units/2F1M2Avs2S1K.json"),
    entry!(Units, "2K1M2Dvs2S1K", "units/2K1M2Dvs2S1K.json"),
    entry!(Units, "1M4Avs2S1K", "units/1M4Avs2S1K.json"),
    entry!(Units, "1S3K1Cvs2S1K", "units/1S3K1Cvs2S1K.json"),
    entry!(Units, "4F1S1K2A1Pvs2M1C1P", "units/4F1S1K2A1Pvs2M1C1P.json"),
    entry!(Units, "2F2S1K1M2C1Pvs2M1C1P", "units/2F2S1K1M2C1Pvs2M1C1P.json"),
    entry!(Units, "4F1S1K1C1Pvs2M1C1P", "units/4F1S1K1C1Pvs2M1C1P.json"),
    entry!(Units, "3F1S1K1A1D1Pvs2M1C1P", "units/3F1S1K1A1D1Pvs2M1C1P.json"),
    entry!(Units, "5F1S1A1Dvs7F1S1D1H", "units/5F1S1A1Dvs7F1S1D1H.json"),
    entry!(Units, "4F1S1A1Cvs7F1S1D1H", "units/4F1S1A1Cvs7F1S1D1H.json"),
    entry!(Units, "2F1S1A1C1Dvs7F1S1D1H", "units/2F1S1A1C1Dvs7F1S1D1H.json"),
    entry!(Units, "3F2S1K1A1Cvs7F1S1D1H", "units/3F2S1K1A1Cvs7F1S1D1H.json"),
    entry!(Zones, "2L2B2S", "zones/2L2B2S.json"),
    entry!(Zones, "2L2B2S-1", "zones/2L2B2S-1.json"),
    entry!(Zones, "2L2B2S-2", "zones/2L2B2S-2.json"),
];

pub fn catalog_entries() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn challenge_names() -> Vec<&'static str> {
    ENTRIES.iter().filter(|e| e.kind == CatalogKind::Challenge).map(|e| e.name).collect()
}

fn find(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

fn parse_entry(e: &CatalogEntry) -> Result<ScenarioConfig, CatalogError> {
    load_scenario(e.source.as_bytes()).map_err(|source| CatalogError::Malformed { name: e.name.to_string(), source })
}

/// Every shipped entry by name.
pub fn catalog() -> BTreeMap<String, ScenarioConfig> {
    ENTRIES
        .iter()
        .map(|e| (e.name.to_string(), parse_entry(e).expect("shipped catalog entries parse")))
        .collect()
}

fn entry_of_kind(name: &str, kind: CatalogKind) -> Result<ScenarioConfig, CatalogError> {
    let e = find(name).ok_or_else(|| CatalogError::Unknown(name.to_string()))?;
    if e.kind != kind {
        return Err(CatalogError::WrongKind { name: name.to_string(), found: e.kind.key(), expected: kind.key() });
    }
    parse_entry(e)
}

/// Merges a unit composition with a zone layout. Unit names that are not
/// shipped but parse as a composition get the default lineup.
pub fn compose(units_name: &str, zones_name: &str) -> Result<ScenarioConfig, CatalogError> {
    let mut config = units_scenario(units_name)?;
    let zones = entry_of_kind(zones_name, CatalogKind::Zones)?;
    config.name = format!("{units_name}_{zones_name}");
    config.field.width = config.field.width.max(zones.field.width);
    config.field.height = config.field.height.max(zones.field.height);
    config.max_zones = config.max_zones.max(zones.zones.len());
    config.zones = zones.zones;
    Ok(config)
}

fn units_scenario(name: &str) -> Result<ScenarioConfig, CatalogError> {
    match find(name) {
        Some(_) => entry_of_kind(name, CatalogKind::Units),
        None => {
            let comp = parse_composition_name(name).map_err(|_| CatalogError::Unknown(name.to_string()))?;
            if comp.zone_count() > 0 || comp.variant.is_some() {
                return Err(CatalogError::Unknown(name.to_string()));
            }
            Ok(lineup(&comp, Field::new(40.0, 40.0, 2.0)))
        }
    }
}

/// Resolves any catalog name: a shipped entry, `<units>_<zones>` or a bare
/// unit composition.
pub fn catalog_scenario(name: &str) -> Result<ScenarioConfig, CatalogError> {
    if let Some(e) = find(name) {
        return parse_entry(e);
    }
    if let Some((units, zones)) = name.split_once('_') {
        return compose(units, zones);
    }
    units_scenario(name)
}

fn expand(units: &BTreeMap<Preset, u32>) -> Vec<Preset> {
    units.iter().flat_map(|(p, n)| std::iter::repeat_n(*p, *n as usize)).collect()
}

/// Stacks one team's units in columns centred at `x0`; extra columns open
/// outward in direction `side`.
fn columns(units: &[Preset], x0: f64, side: f64, height: f64) -> Vec<(Preset, Vec2)> {
    const GAP: f64 = 1.0;
    let mut cols: Vec<(Vec<Preset>, f64)> = Vec::new();
    let mut cur: Vec<Preset> = Vec::new();
    let mut used = 0.0;
    for &p in units {
        let d = 2.0 * p.spec().body_radius;
        let need = if cur.is_empty() { d } else { used + GAP + d };
        if !cur.is_empty() && need > height - 4.0 {
            cols.push((std::mem::take(&mut cur), used));
            used = d;
        } else {
            used = need;
        }
        cur.push(p);
    }
    if !cur.is_empty() {
        cols.push((cur, used));
    }
    let mut out = Vec::new();
    let mut x = x0;
    let mut prev_width = 0.0;
    for (k, (col, used)) in cols.iter().enumerate() {
        let width = col.iter().map(|p| 2.0 * p.spec().body_radius).fold(0.0, f64::max);
        if k > 0 {
            x += side * (prev_width / 2.0 + GAP + width / 2.0);
        }
        let mut y = (height - used) / 2.0;
        for &p in col {
            let r = p.spec().body_radius;
            out.push((p, Vec2::new(x, y + r)));
            y += 2.0 * r + GAP;
        }
        prev_width = width;
    }
    out
}

/// Default layout for a composition: allies in columns near the left edge
/// facing right, enemies mirrored on the right.
pub fn lineup(comp: &Composition, field: Field) -> ScenarioConfig {
    let mut config = ScenarioConfig::new(comp.units_name(), field);
    for (p, pos) in columns(&expand(&comp.ally), 0.28 * field.width, -1.0, field.height) {
        config.units.push(UnitPlacement::new(ALLY, p, pos, 0.0));
    }
    for (p, pos) in columns(&expand(&comp.enemy), 0.72 * field.width, 1.0, field.height) {
        config.units.push(UnitPlacement::new(ENEMY, p, pos, 180.0));
    }
    config.max_units = config.units.len();
    config
}

/// Zone layout counts of a zone entry name such as `2L2B2S-1`.
pub fn zone_counts(name: &str) -> Option<BTreeMap<crate::zone::ZoneType, u32>> {
    let base = name.split_once('-').map_or(name, |(b, _)| b);
    parse_zones(base, 0).ok()
}
