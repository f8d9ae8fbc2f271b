#![allow(dead_code)]

use battlesim::config::{Controller, Field, HeuristicParams, Tier, UnitPlacement, UnitSource};
use battlesim::unit::{Preset, UnitSpec, UnitState, ALLY, ENEMY};
use battlesim::zone::{Zone, ZoneType};
use battlesim::{ScenarioConfig, Vec2};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_zone(r: &mut impl Rng, field: &Field) -> Zone {
    let t = *[ZoneType::Lava, ZoneType::Bush, ZoneType::Swamp].choose(r).unwrap();
    let effect = match t {
        ZoneType::Lava => r.random_range(0.0..10.0),
        ZoneType::Swamp => r.random_range(0.05..=1.0),
        _ => 0.0,
    };
    Zone::new(
        t,
        Vec2::new(r.random_range(0.0..field.width), r.random_range(0.0..field.height)),
        Vec2::new(r.random_range(0.5..8.0), r.random_range(0.5..8.0)),
        effect,
    )
}

fn random_source(r: &mut impl Rng) -> UnitSource {
    let preset = *Preset::ALL.choose(r).unwrap();
    match r.random_range(0..4) {
        0 => {
            let mut s = UnitSource::preset(preset);
            s.set_override("max_health", r.random_range(5.0..500.0));
            s.set_override("speed", r.random_range(0.0..2.0));
            s
        }
        1 => {
            let mut spec: UnitSpec = preset.spec();
            spec.name = format!("custom-{}", r.random_range(0..100));
            spec.attack_range = r.random_range(0.5..30.0);
            spec.sight_angle = r.random_range(0.3..std::f64::consts::TAU);
            UnitSource::Custom(spec)
        }
        _ => UnitSource::preset(preset),
    }
}

fn random_team(r: &mut impl Rng, c: &mut ScenarioConfig, team: u8) {
    let controller = *[Controller::External, Controller::Heuristic, Controller::Random].choose(r).unwrap();
    let params = (controller == Controller::Heuristic).then(|| HeuristicParams {
        epsilon: r.random_range(0.0..=1.0),
        aggressive_threshold: r.random_range(0.0..=1.0),
        ..Tier::Medium.params()
    });
    c.set_controller(team, controller, params);
}

/// A random scenario that passes validation, with up to `max_units` units and
/// `max_zones` zones.
pub fn random_config(seed: u64, max_units: usize, max_zones: usize) -> ScenarioConfig {
    assert!(max_units >= 2);
    let mut r = rng(seed);
    let field = Field::new(r.random_range(8.0..60.0), r.random_range(8.0..60.0), r.random_range(0.0..3.0));
    let mut c = ScenarioConfig::new(format!("random-{seed}"), field);
    c.max_steps = r.random_range(1..500);
    c.physics.dt = r.random_range(0.01..0.3);
    c.physics.restitution = r.random_range(0.0..=1.0);
    random_team(&mut r, &mut c, ALLY);
    random_team(&mut r, &mut c, ENEMY);
    let n = r.random_range(2..=max_units);
    for k in 0..n {
        let team = if k == 0 { ALLY } else if k == 1 { ENEMY } else { r.random_range(0..2) };
        c.units.push(UnitPlacement {
            team,
            source: random_source(&mut r),
            position: Vec2::new(r.random_range(0.0..=field.width), r.random_range(0.0..=field.height)),
            heading_deg: r.random_range(-180.0..180.0),
        });
    }
    let z = r.random_range(0..=max_zones);
    c.zones = (0..z).map(|_| random_zone(&mut r, &field)).collect();
    c.max_units = max_units;
    c.max_zones = max_zones;
    c
}

/// Two overlapping, non-kinematic bodies with arbitrary masses and velocities.
pub fn random_contact_pair(r: &mut impl Rng) -> Vec<UnitState> {
    let mk = |r: &mut ChaCha8Rng| {
        let mut spec = Preset::Farmer.spec();
        spec.body_mass = r.random_range(0.1..50.0);
        spec.body_radius = r.random_range(0.3..4.0);
        let mut u = UnitState::spawn(spec, ALLY, Vec2::ZERO, 0.0);
        u.velocity = Vec2::new(r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
        u
    };
    let mut local = rng(r.random());
    let a = mk(&mut local);
    let mut b = mk(&mut local);
    let reach = a.spec.body_radius + b.spec.body_radius;
    let dir = Vec2::from_angle(local.random_range(0.0..std::f64::consts::TAU));
    b.position = dir * (reach * local.random_range(0.05..0.999));
    vec![a, b]
}

pub fn momentum(units: &[UnitState]) -> Vec2 {
    units.iter().fold(Vec2::ZERO, |acc, u| acc + u.velocity * u.spec.body_mass)
}

pub fn kinetic_energy(units: &[UnitState]) -> f64 {
    units.iter().map(|u| 0.5 * u.spec.body_mass * u.velocity.length_squared()).sum()
}

/// Ally mean health fraction minus enemy mean health fraction over every
/// configured (active) unit.
pub fn gap_oracle(units: &[UnitState]) -> f64 {
    let mean = |team: u8| {
        let ratios: Vec<f64> = units
            .iter()
            .filter(|u| u.active && u.team == team)
            .map(|u| if u.alive { u.health / u.spec.max_health } else { 0.0 })
            .collect();
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    mean(ALLY) - mean(ENEMY)
}
