//! Scenario file reading and writing.
//!
//! The document is UTF-8 JSON with `"version": 1`. Saving always produces the
//! canonical form: keys sorted, floats in shortest round-trip notation, two
//! space indentation and a trailing newline.

use std::path::Path;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::config::{
    validate_scenario, Controller, Field, HeuristicParams, OverrideValue, Overrides, PhysicsParams, ScenarioConfig,
    TeamConfig, UnitPlacement, UnitSource, ValidationReport, DEFAULT_MAX_STEPS,
};
use crate::math::Vec2;
use crate::unit::{Preset, UnitSpec};
use crate::zone::{Zone, ZoneType};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Schema { path: path.into(), message: message.into() }
}

fn pair(v: Vec2) -> Value {
    Value::Array(vec![v.x.into(), v.y.into()])
}

fn object(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn team_value(t: &TeamConfig) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), t.id.into());
    m.insert("controller".into(), t.controller.key().into());
    if let Some(h) = &t.heuristic {
        m.insert(
            "heuristic".into(),
            object(vec![("epsilon", h.epsilon.into()), ("aggressive_threshold", h.aggressive_threshold.into())]),
        );
    }
    Value::Object(m)
}

fn unit_value(u: &UnitPlacement) -> Value {
    let mut m = Map::new();
    m.insert("team".into(), u.team.into());
    m.insert("position".into(), pair(u.position));
    m.insert("heading_deg".into(), u.heading_deg.into());
    match &u.source {
        UnitSource::Preset { preset, overrides } => {
            m.insert("preset".into(), preset.key().into());
            let o: Map<String, Value> = overrides
                .iter()
                .map(|(k, v)| {
                    let v = match v {
                        OverrideValue::Number(n) => Value::from(*n),
                        OverrideValue::Bool(b) => Value::from(*b),
                    };
                    (k.clone(), v)
                })
                .collect();
            m.insert("overrides".into(), Value::Object(o));
        }
        UnitSource::Custom(spec) => {
            m.insert("spec".into(), serde_json::to_value(spec).expect("unit spec serializes"));
        }
    }
    Value::Object(m)
}

fn zone_value(z: &Zone) -> Value {
    object(vec![
        ("type", z.zone_type.key().into()),
        ("center", pair(z.center)),
        ("semi_axes", pair(z.semi_axes)),
        ("effect", z.effect.into()),
    ])
}

/// Document tree of `config`. Non-finite numbers become `null`.
pub fn scenario_to_value(config: &ScenarioConfig) -> Value {
    let f = &config.field;
    let p = &config.physics;
    object(vec![
        ("version", FORMAT_VERSION.into()),
        ("name", config.name.clone().into()),
        (
            "field",
            object(vec![("width", f.width.into()), ("height", f.height.into()), ("margin", f.margin.into())]),
        ),
        (
            "physics",
            object(vec![
                ("dt", p.dt.into()),
                ("restitution", p.restitution.into()),
                ("penetration_slop", p.penetration_slop.into()),
                ("correction_percent", p.correction_percent.into()),
                ("rotation_step_deg", p.rotation_step_deg.into()),
                ("boundary_damage_coeff", p.boundary_damage_coeff.into()),
                ("reveal_duration", p.reveal_duration.into()),
                ("enable_noop", p.enable_noop.into()),
            ]),
        ),
        ("max_steps", config.max_steps.into()),
        ("teams", Value::Array(config.teams.iter().map(team_value).collect())),
        ("units", Value::Array(config.units.iter().map(unit_value).collect())),
        ("zones", Value::Array(config.zones.iter().map(zone_value).collect())),
        ("max_units", config.max_units.into()),
        ("max_zones", config.max_zones.into()),
    ])
}

/// Canonical text of `config`.
pub fn scenario_to_string(config: &ScenarioConfig) -> String {
    let mut s = serde_json::to_string_pretty(&scenario_to_value(config)).expect("value serializes");
    s.push('\n');
    s
}

pub fn save_scenario(config: &ScenarioConfig) -> Vec<u8> {
    scenario_to_string(config).into_bytes()
}

/// Parses a document without checking config invariants.
pub fn load_scenario(bytes: &[u8]) -> Result<ScenarioConfig, LoadError> {
    load_scenario_with_notes(bytes).map(|(c, _)| c)
}

/// Parses a document and validates it. Defaults filled in for missing fields
/// are listed as notes in the report.
pub fn load_and_validate(bytes: &[u8]) -> Result<(ScenarioConfig, ValidationReport), LoadError> {
    let (config, notes) = load_scenario_with_notes(bytes)?;
    let mut report = validate_scenario(&config);
    report.notes = notes;
    Ok((config, report))
}

pub fn read_scenario_file(path: &Path) -> Result<(ScenarioConfig, ValidationReport), LoadError> {
    let bytes = std::fs::read(path)
        .map_err(|e| LoadError::Io { path: path.display().to_string(), message: e.to_string() })?;
    load_and_validate(&bytes)
}

pub fn write_scenario_file(path: &Path, config: &ScenarioConfig) -> std::io::Result<()> {
    std::fs::write(path, save_scenario(config))
}

fn load_scenario_with_notes(bytes: &[u8]) -> Result<(ScenarioConfig, Vec<String>), LoadError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| LoadError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut r = Reader::default();
    let config = r.scenario(&value)?;
    Ok((config, r.notes))
}

#[derive(Default)]
struct Reader {
    notes: Vec<String>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>, LoadError> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>, LoadError> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64, LoadError> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn as_uint(v: &Value, path: &str, max: u64) -> Result<u64, LoadError> {
    match v.as_u64() {
        Some(n) if n <= max => Ok(n),
        Some(_) => Err(schema(path, format!("must be at most {max}"))),
        None => Err(schema(path, "expected a non-negative integer")),
    }
}

fn as_str<'v>(v: &'v Value, path: &str) -> Result<&'v str, LoadError> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn as_vec2(v: &Value, path: &str) -> Result<Vec2, LoadError> {
    let a = as_array(v, path)?;
    if a.len() != 2 {
        return Err(schema(path, "expected [x, y]"));
    }
    Ok(Vec2::new(as_f64(&a[0], &format!("{path}[0]"))?, as_f64(&a[1], &format!("{path}[1]"))?))
}

fn reject_unknown(m: &Map<String, Value>, path: &str, known: &[&str]) -> Result<(), LoadError> {
    match m.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(schema(join(path, k), "unknown key")),
        None => Ok(()),
    }
}

impl Reader {
    fn note_default(&mut self, path: &str, shown: impl std::fmt::Display) {
        self.notes.push(format!("{path} missing; default {shown} applied"));
    }

    fn f64_or(&mut self, m: &Map<String, Value>, path: &str, key: &str, default: f64) -> Result<f64, LoadError> {
        let p = join(path, key);
        match m.get(key) {
            Some(v) => as_f64(v, &p),
            None => {
                self.note_default(&p, default);
                Ok(default)
            }
        }
    }

    fn scenario(&mut self, v: &Value) -> Result<ScenarioConfig, LoadError> {
        let m = as_object(v, "$")?;
        reject_unknown(
            m,
            "",
            &[
                "version", "name", "field", "physics", "max_steps", "teams", "units", "zones", "max_units",
                "max_zones",
            ],
        )?;
        match m.get("version") {
            Some(v) => {
                let version = as_uint(v, "version", u64::MAX)?;
                if version != FORMAT_VERSION {
                    return Err(schema("version", format!("unsupported version {version}")));
                }
            }
            None => self.note_default("version", FORMAT_VERSION),
        }
        let name = match m.get("name") {
            Some(v) => as_str(v, "name")?.to_string(),
            None => {
                self.note_default("name", "\"\"");
                String::new()
            }
        };
        let field = match m.get("field") {
            Some(v) => self.field(v)?,
            None => {
                self.notes.push("field missing; default field applied".into());
                Field::default()
            }
        };
        let physics = match m.get("physics") {
            Some(v) => self.physics(v)?,
            None => {
                self.notes.push("physics missing; default physics applied".into());
                PhysicsParams::default()
            }
        };
        let max_steps = match m.get("max_steps") {
            Some(v) => as_uint(v, "max_steps", u32::MAX as u64)? as u32,
            None => {
                self.note_default("max_steps", DEFAULT_MAX_STEPS);
                DEFAULT_MAX_STEPS
            }
        };
        let teams = match m.get("teams") {
            Some(v) => as_array(v, "teams")?
                .iter()
                .enumerate()
                .map(|(k, t)| self.team(t, &format!("teams[{k}]")))
                .collect::<Result<Vec<_>, _>>()?,
            None => {
                self.notes.push("teams missing; default teams applied".into());
                crate::config::default_teams()
            }
        };
        let units = match m.get("units") {
            Some(v) => as_array(v, "units")?
                .iter()
                .enumerate()
                .map(|(k, u)| self.unit(u, &format!("units[{k}]")))
                .collect::<Result<Vec<_>, _>>()?,
            None => {
                self.note_default("units", "[]");
                Vec::new()
            }
        };
        let zones = match m.get("zones") {
            Some(v) => as_array(v, "zones")?
                .iter()
                .enumerate()
                .map(|(k, z)| self.zone(z, &format!("zones[{k}]")))
                .collect::<Result<Vec<_>, _>>()?,
            None => {
                self.note_default("zones", "[]");
                Vec::new()
            }
        };
        let max_units = match m.get("max_units") {
            Some(v) => as_uint(v, "max_units", u32::MAX as u64)? as usize,
            None => {
                self.note_default("max_units", units.len());
                units.len()
            }
        };
        let max_zones = match m.get("max_zones") {
            Some(v) => as_uint(v, "max_zones", u32::MAX as u64)? as usize,
            None => {
                self.note_default("max_zones", zones.len());
                zones.len()
            }
        };
        Ok(ScenarioConfig { name, field, physics, max_steps, teams, units, zones, max_units, max_zones })
    }

    fn field(&mut self, v: &Value) -> Result<Field, LoadError> {
        let m = as_object(v, "field")?;
        reject_unknown(m, "field", &["width", "height", "margin"])?;
        let d = Field::default();
        Ok(Field {
            width: self.f64_or(m, "field", "width", d.width)?,
            height: self.f64_or(m, "field", "height", d.height)?,
            margin: self.f64_or(m, "field", "margin", d.margin)?,
        })
    }

    fn physics(&mut self, v: &Value) -> Result<PhysicsParams, LoadError> {
        let path = "physics";
        let m = as_object(v, path)?;
        reject_unknown(
            m,
            path,
            &[
                "dt",
                "restitution",
                "penetration_slop",
                "correction_percent",
                "rotation_step_deg",
                "boundary_damage_coeff",
                "reveal_duration",
                "enable_noop",
            ],
        )?;
        let d = PhysicsParams::default();
        let enable_noop = match m.get("enable_noop") {
            Some(v) => v.as_bool().ok_or_else(|| schema("physics.enable_noop", "expected a boolean"))?,
            None => {
                self.note_default("physics.enable_noop", d.enable_noop);
                d.enable_noop
            }
        };
        Ok(PhysicsParams {
            dt: self.f64_or(m, path, "dt", d.dt)?,
            restitution: self.f64_or(m, path, "restitution", d.restitution)?,
            penetration_slop: self.f64_or(m, path, "penetration_slop", d.penetration_slop)?,
            correction_percent: self.f64_or(m, path, "correction_percent", d.correction_percent)?,
            rotation_step_deg: self.f64_or(m, path, "rotation_step_deg", d.rotation_step_deg)?,
            boundary_damage_coeff: self.f64_or(m, path, "boundary_damage_coeff", d.boundary_damage_coeff)?,
            reveal_duration: self.f64_or(m, path, "reveal_duration", d.reveal_duration)?,
            enable_noop,
        })
    }

    fn team(&mut self, v: &Value, path: &str) -> Result<TeamConfig, LoadError> {
        let m = as_object(v, path)?;
        reject_unknown(m, path, &["id", "controller", "heuristic"])?;
        let id_path = join(path, "id");
        let id = as_uint(m.get("id").ok_or_else(|| schema(&id_path, "required"))?, &id_path, u8::MAX as u64)? as u8;
        let ctrl_path = join(path, "controller");
        let controller: Controller = match m.get("controller") {
            Some(v) => as_str(v, &ctrl_path)?.parse().map_err(|e: String| schema(&ctrl_path, e))?,
            None => {
                self.note_default(&ctrl_path, "external");
                Controller::External
            }
        };
        let heuristic = match m.get("heuristic") {
            Some(v) => {
                let hp = join(path, "heuristic");
                let h = as_object(v, &hp)?;
                reject_unknown(h, &hp, &["epsilon", "aggressive_threshold"])?;
                let d = HeuristicParams::default();
                Some(HeuristicParams {
                    epsilon: self.f64_or(h, &hp, "epsilon", d.epsilon)?,
                    aggressive_threshold: self.f64_or(h, &hp, "aggressive_threshold", d.aggressive_threshold)?,
                    ..d
                })
            }
            None => None,
        };
        Ok(TeamConfig { id, controller, heuristic })
    }

    fn unit(&mut self, v: &Value, path: &str) -> Result<UnitPlacement, LoadError> {
        let m = as_object(v, path)?;
        reject_unknown(m, path, &["team", "preset", "spec", "overrides", "position", "heading_deg"])?;
        let team_path = join(path, "team");
        let team =
            as_uint(m.get("team").ok_or_else(|| schema(&team_path, "required"))?, &team_path, u8::MAX as u64)? as u8;
        let pos_path = join(path, "position");
        let position = as_vec2(m.get("position").ok_or_else(|| schema(&pos_path, "required"))?, &pos_path)?;
        let heading_deg = self.f64_or(m, path, "heading_deg", 0.0)?;
        let source = match (m.get("preset"), m.get("spec")) {
            (Some(p), None) => {
                let pp = join(path, "preset");
                let preset: Preset = as_str(p, &pp)?.parse().map_err(|e: String| schema(&pp, e))?;
                let mut overrides = Overrides::new();
                if let Some(o) = m.get("overrides") {
                    let op = join(path, "overrides");
                    for (k, v) in as_object(o, &op)? {
                        let kp = join(&op, k);
                        let value = match v {
                            Value::Bool(b) => OverrideValue::Bool(*b),
                            Value::Number(_) => OverrideValue::Number(as_f64(v, &kp)?),
                            _ => return Err(schema(kp, "expected a number or boolean")),
                        };
                        overrides.insert(k.clone(), value);
                    }
                } else {
                    self.note_default(&join(path, "overrides"), "{}");
                }
                let source = UnitSource::Preset { preset, overrides };
                source.resolve().map_err(|e| schema(join(path, "overrides"), e))?;
                source
            }
            (None, Some(s)) => {
                if m.contains_key("overrides") {
                    return Err(schema(join(path, "overrides"), "only allowed together with a preset"));
                }
                let spec: UnitSpec =
                    serde_json::from_value(s.clone()).map_err(|e| schema(join(path, "spec"), e.to_string()))?;
                UnitSource::Custom(spec)
            }
            (Some(_), Some(_)) => return Err(schema(path, "give either preset or spec, not both")),
            (None, None) => return Err(schema(path, "one of preset or spec is required")),
        };
        Ok(UnitPlacement { team, source, position, heading_deg })
    }

    fn zone(&mut self, v: &Value, path: &str) -> Result<Zone, LoadError> {
        let m = as_object(v, path)?;
        reject_unknown(m, path, &["type", "center", "semi_axes", "effect"])?;
        let tp = join(path, "type");
        let zone_type: ZoneType =
            as_str(m.get("type").ok_or_else(|| schema(&tp, "required"))?, &tp)?.parse().map_err(|e: String| schema(&tp, e))?;
        let cp = join(path, "center");
        let center = as_vec2(m.get("center").ok_or_else(|| schema(&cp, "required"))?, &cp)?;
        let sp = join(path, "semi_axes");
        let semi_axes = as_vec2(m.get("semi_axes").ok_or_else(|| schema(&sp, "required"))?, &sp)?;
        let effect = self.f64_or(m, path, "effect", 0.0)?;
        Ok(Zone { zone_type, center, semi_axes, effect })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Tier, UnitSource};
    use crate::unit::{ALLY, ENEMY};

    fn sample() -> ScenarioConfig {
        let mut c = ScenarioConfig::new("2F1Avs1K_1L", Field::new(40.0, 30.0, 2.0));
        c.units = vec![
            UnitPlacement::new(ALLY, Preset::Farmer, Vec2::new(5.0, 5.0), 0.0),
            UnitPlacement::new(ALLY, Preset::Farmer, Vec2::new(5.0, 8.25), 12.5),
            UnitPlacement::new(ALLY, Preset::Archer, Vec2::new(3.0, 6.5), -30.0),
            UnitPlacement::new(ENEMY, Preset::TheKing, Vec2::new(30.0, 6.5), 180.0),
        ];
        c.units[3].source.set_override("max_health", 800.0);
        if let UnitSource::Preset { overrides, .. } = &mut c.units[1].source {
            overrides.insert("kinematic".into(), OverrideValue::Bool(true));
        }
        let mut custom = Preset::Healer.spec();
        custom.name = "medic".into();
        custom.sight_angle = 1.1;
        c.units.push(UnitPlacement {
            team: ENEMY,
            source: UnitSource::Custom(custom),
            position: Vec2::new(33.0, 6.5),
            heading_deg: 180.0,
        });
        c.zones = vec![Zone::new(ZoneType::Lava, Vec2::new(20.0, 15.0), Vec2::new(3.0, 1.0), 5.0)];
        c.max_units = 6;
        c.max_zones = 2;
        c.set_controller(ENEMY, Controller::Heuristic, Some(Tier::Expert.params()));
        c.physics.dt = 0.05;
        c
    }

    #[test]
    fn load_of_save_is_identity() {
        let c = sample();
        let bytes = save_scenario(&c);
        let back = load_scenario(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(save_scenario(&back), bytes);
    }

    #[test]
    fn keys_are_sorted_and_text_ends_with_newline() {
        let text = scenario_to_string(&sample());
        assert!(text.ends_with("}\n"));
        let top: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \"") )
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = top.clone();
        sorted.sort();
        assert_eq!(top, sorted);
        assert!(text.contains("\"dt\": 0.05"));
        assert!(text.contains("\"version\": 1"));
    }

    #[test]
    fn reformatted_document_canonicalizes() {
        let c = sample();
        let v = scenario_to_value(&c);
        let compact = serde_json::to_vec(&v).unwrap();
        assert_eq!(save_scenario(&load_scenario(&compact).unwrap()), save_scenario(&c));
    }

    #[test]
    fn missing_physics_uses_defaults() {
        let doc = r#"{"version": 1, "name": "x", "field": {"width": 20, "height": 20, "margin": 1},
            "teams": [{"id": 0, "controller": "external"}, {"id": 1, "controller": "random"}],
            "units": [{"team": 0, "preset": "farmer", "position": [2, 2]},
                      {"team": 1, "preset": "F", "position": [18, 18], "heading_deg": 180}]}"#;
        let (c, report) = load_and_validate(doc.as_bytes()).unwrap();
        assert!(report.is_valid(), "{report}");
        let d = PhysicsParams::default();
        assert_eq!(c.physics.dt, d.dt);
        assert_eq!(c.physics.restitution, d.restitution);
        assert_eq!(c.physics.penetration_slop, d.penetration_slop);
        assert_eq!(c.physics.correction_percent, d.correction_percent);
        assert_eq!(c.physics.rotation_step_deg, d.rotation_step_deg);
        assert_eq!(c.physics.boundary_damage_coeff, d.boundary_damage_coeff);
        assert_eq!(c.physics.reveal_duration, d.reveal_duration);
        assert_eq!(c.physics.enable_noop, d.enable_noop);
        assert_eq!(c.max_units, 2);
        assert_eq!(c.max_steps, DEFAULT_MAX_STEPS);
        assert!(report.notes.iter().any(|n| n.starts_with("physics missing")));
        assert!(report.notes.iter().any(|n| n.starts_with("units[0].heading_deg missing")));
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err = load_scenario(b"{\n  \"name\": \"x\",\n  oops\n}").unwrap_err();
        match err {
            LoadError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_path() {
        let cases: [(&str, &str); 6] = [
            (r#"{"field": {"width": "wide"}}"#, "field.width"),
            (r#"{"units": [{"team": 0, "preset": "dragon", "position": [1, 1]}]}"#, "units[0].preset"),
            (r#"{"units": [{"team": 0, "preset": "farmer", "position": [1]}]}"#, "units[0].position"),
            (r#"{"zones": [{"type": "ice", "center": [0, 0], "semi_axes": [1, 1]}]}"#, "zones[0].type"),
            (r#"{"teamz": []}"#, "teamz"),
            (r#"{"units": [{"team": 0, "preset": "farmer", "position": [1, 1], "overrides": {"wings": 2}}]}"#, "units[0].overrides"),
        ];
        for (doc, path) in cases {
            match load_scenario(doc.as_bytes()) {
                Err(LoadError::Schema { path: p, .. }) => assert_eq!(p, path, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
    }

    #[test]
    fn invariant_violations_become_report_entries() {
        let doc = r#"{"units": [{"team": 0, "preset": "farmer", "position": [100, 1]}]}"#;
        let (_, report) = load_and_validate(doc.as_bytes()).unwrap();
        assert!(!report.is_valid());
        assert!(report.violations.iter().any(|v| v.path == "units[0].position"));
    }

    #[test]
    fn unsupported_version_is_rejected() {
        assert!(matches!(load_scenario(br#"{"version": 2}"#), Err(LoadError::Schema { .. })));
    }
}
