//! Compositional scenario names such as `2F1M2Avs2S1K_2L2B2S-1`.
//!
//! Grammar: `<units>vs<units>[_<zones>][-<variant>]` where each group is a run
//! of `<count><code>` pairs. Unit codes are the preset letters
//! (`F S K M A C D H P`); zone codes are `L B S`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::unit::Preset;
use crate::zone::ZoneType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid composition name at byte {offset}: {message}")]
pub struct NameError {
    pub offset: usize,
    pub message: String,
}

fn err(offset: usize, message: impl Into<String>) -> NameError {
    NameError { offset, message: message.into() }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Composition {
    pub ally: BTreeMap<Preset, u32>,
    pub enemy: BTreeMap<Preset, u32>,
    pub zones: BTreeMap<ZoneType, u32>,
    pub variant: Option<String>,
}

impl Composition {
    pub fn ally_count(&self) -> u32 {
        self.ally.values().sum()
    }

    pub fn enemy_count(&self) -> u32 {
        self.enemy.values().sum()
    }

    pub fn zone_count(&self) -> u32 {
        self.zones.values().sum()
    }

    /// The `<units>vs<units>` part in canonical form.
    pub fn units_name(&self) -> String {
        format!("{}vs{}", format_units(&self.ally), format_units(&self.enemy))
    }
}

/// Canonical form: counts merged per code, codes in table order, zero counts
/// dropped, zone suffix omitted when there are no zones.
impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.units_name())?;
        if self.zone_count() > 0 {
            write!(f, "_{}", format_zones(&self.zones))?;
        }
        if let Some(v) = &self.variant {
            write!(f, "-{v}")?;
        }
        Ok(())
    }
}

pub fn format_units(units: &BTreeMap<Preset, u32>) -> String {
    units
        .iter()
        .filter(|(_, n)| **n > 0)
        .map(|(p, n)| format!("{n}{}", p.code()))
        .collect()
}

pub fn format_zones(zones: &BTreeMap<ZoneType, u32>) -> String {
    zones
        .iter()
        .filter(|(z, n)| **n > 0 && z.code().is_some())
        .map(|(z, n)| format!("{n}{}", z.code().unwrap_or('?')))
        .collect()
}

/// Parses a run of `<count><code>` pairs starting at byte `base` of the
/// original name.
fn parse_counts<K: Ord>(
    text: &str,
    base: usize,
    what: &str,
    lookup: impl Fn(char) -> Option<K>,
) -> Result<BTreeMap<K, u32>, NameError> {
    if text.is_empty() {
        return Err(err(base, format!("empty {what} group")));
    }
    let bytes = text.as_bytes();
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == start {
            return Err(err(base + i, format!("expected a count before '{}'", bytes[i] as char)));
        }
        let count: u32 = text[start..i]
            .parse()
            .map_err(|_| err(base + start, "count does not fit in 32 bits"))?;
        let Some(&c) = bytes.get(i) else {
            return Err(err(base + i, format!("count without a {what} code")));
        };
        let key = lookup(c as char)
            .ok_or_else(|| err(base + i, format!("unknown {what} code '{}'", c as char)))?;
        *out.entry(key).or_insert(0) += count;
        i += 1;
    }
    Ok(out)
}

pub fn parse_units(text: &str, base: usize) -> Result<BTreeMap<Preset, u32>, NameError> {
    parse_counts(text, base, "unit", Preset::from_code)
}

pub fn parse_zones(text: &str, base: usize) -> Result<BTreeMap<ZoneType, u32>, NameError> {
    parse_counts(text, base, "zone", ZoneType::from_code)
}

pub fn parse_composition_name(name: &str) -> Result<Composition, NameError> {
    let (body, variant) = match name.find('-') {
        Some(dash) => {
            let v = &name[dash + 1..];
            if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(err(dash + 1, "variant must be a non-empty alphanumeric suffix"));
            }
            (&name[..dash], Some(v.to_string()))
        }
        None => (name, None),
    };
    let (units, zones) = match body.find('_') {
        Some(us) => (&body[..us], Some((us + 1, &body[us + 1..]))),
        None => (body, None),
    };
    let vs = units.find("vs").ok_or_else(|| err(units.len(), "missing 'vs' separator"))?;
    let ally = parse_units(&units[..vs], 0)?;
    let enemy = parse_units(&units[vs + 2..], vs + 2)?;
    let zones = match zones {
        Some((base, text)) => parse_zones(text, base)?,
        None => BTreeMap::new(),
    };
    Ok(Composition { ally, enemy, zones, variant })
}
