//! Acceptance suite. Every criterion prints exactly one line:
//! `[PASS]`, `[FAIL]` or `[UNVERIFIED]`, followed by the measured values.
//!
//! Run with `cargo test -p battlesim --test acceptance -- --nocapture`.

mod common;

use std::sync::Arc;
use std::time::Instant;

use battlesim::action::{ATTACK, MOVE_RIGHT, NOOP, ROTATE};
use battlesim::bench::{benchmark_throughput, reset_latencies};
use battlesim::config::{Tier, Winner};
use battlesim::env::valid_actions;
use battlesim::perception::{update_reveal_timers, visibility_matrix, BoolMatrix};
use battlesim::physics::{apply_boundary, detect_contacts, detect_contacts_brute_force, integrate_kinematics, resolve_contacts};
use battlesim::rng::{tag, RngStream};
use battlesim::rollout::{configure, run_rollouts, PolicySpec, TraceRecord};
use battlesim::scenario::{
    catalog_entries, catalog_scenario, load_scenario, mutate_level, sample_level, save_scenario, Category, LevelGenSpec,
    MutationOp, ParamRanges,
};
use battlesim::scenario::catalog::challenge_names;
use battlesim::{
    reset, reset_batch, step, step_batch, Controller, EnvError, EnvState, Field, PhysicsParams, Preset, ScenarioConfig,
    UnitPlacement, UnitState, Vec2, Zone, ZoneType, ALLY, ENEMY,
};
use common::{gap_oracle, kinetic_energy, momentum, random_config, random_contact_pair, rng};
use rand::seq::IndexedRandom;
use rand::Rng;

fn report(name: &str, ok: bool, detail: String) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn random_vs_random(c: &ScenarioConfig) -> Arc<ScenarioConfig> {
    Arc::new(configure(c, &PolicySpec::Random, &PolicySpec::Random))
}

#[test]
fn reward_telescoping() {
    let names = challenge_names();
    assert_eq!(names.len(), 10);
    let mut worst = 0.0f64;
    let mut episodes = 0;
    for (s, name) in names.iter().enumerate() {
        let config = random_vs_random(&catalog_scenario(name).unwrap());
        let idle = vec![NOOP; config.max_units];
        for e in 0..100u64 {
            let mut r = battlesim::reset_indexed(Arc::clone(&config), 31 + s as u64, e).unwrap();
            let start = gap_oracle(&r.state.units);
            let mut dense = 0.0;
            while !r.done() {
                r = step(&r.state, &idle).unwrap();
                let terminal = match r.info.outcome {
                    Some(o) if o.winner == Winner::Ally => 1.0,
                    Some(_) => -1.0,
                    None => 0.0,
                };
                dense += r.reward - terminal;
            }
            worst = worst.max((dense - (gap_oracle(&r.state.units) - start)).abs());
            episodes += 1;
        }
    }
    report(
        "reward telescoping",
        episodes == 1000 && worst < 1e-6,
        format!("{episodes} episodes over {} scenarios, max |sum dense - gap delta| = {worst:.3e} (tol 1e-6)", names.len()),
    )
}

/// Valid action for every external slot, drawn from a stream keyed by the
/// environment identity and step.
fn scripted_actions(s: &EnvState) -> Vec<u8> {
    let masks = battlesim::env::action_mask(s);
    s.units
        .iter()
        .enumerate()
        .map(|(i, u)| {
            if !u.active || s.controller(u.team) != Controller::External {
                return NOOP;
            }
            let mut r = RngStream::new(s.rng.seed, s.rng.env_index).at(s.t as u64, tag::ROLLOUT + i as u64);
            *valid_actions(&masks[i]).choose(&mut r).unwrap()
        })
        .collect()
}

/// Per-environment JSONL traces of a scripted batch run.
fn scripted_batch_traces(config: &Arc<ScenarioConfig>, batch: usize, threads: usize, seed: u64) -> Vec<String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let configs = vec![Arc::clone(config); batch];
        let mut results: Vec<_> = reset_batch(&configs, &vec![seed; batch]).into_iter().map(Result::unwrap).collect();
        let mut traces = vec![String::new(); batch];
        loop {
            let live: Vec<usize> = (0..batch).filter(|&k| !results[k].done()).collect();
            if live.is_empty() {
                break;
            }
            let states: Vec<EnvState> = live.iter().map(|&k| results[k].state.clone()).collect();
            let actions: Vec<Vec<u8>> = states.iter().map(scripted_actions).collect();
            for (k, r) in live.iter().zip(step_batch(&states, &actions)) {
                let r = r.unwrap();
                traces[*k].push_str(&TraceRecord::from_step(*k as u64, &r).to_line());
                results[*k] = r;
            }
        }
        traces
    })
}

#[test]
fn determinism() {
    let mut c = catalog_scenario("vsrangers").unwrap();
    c.max_steps = 120;
    let config = Arc::new(c);
    let mut single: Vec<String> = Vec::new();
    let mut full: Vec<String> = Vec::new();
    let mut runs = 0;
    for _run in 0..2 {
        for threads in [1, 8] {
            single.push(scripted_batch_traces(&config, 1, threads, 99).concat());
            let t = scripted_batch_traces(&config, 64, threads, 99);
            single.push(t[0].clone());
            full.push(t.concat());
            runs += 2;
        }
    }
    let ok = single.windows(2).all(|w| w[0] == w[1]) && full.windows(2).all(|w| w[0] == w[1]) && !single[0].is_empty();
    report(
        "determinism",
        ok,
        format!(
            "{runs} runs (2 x threads {{1,8}} x batch {{1,64}}): env-0 trace {} bytes, 64-env trace {} bytes, all byte-identical = {ok}",
            single[0].len(),
            full[0].len()
        ),
    )
}

#[test]
fn physics_oracle() {
    let mut r = rng(4242);
    let (mut max_dp, mut max_de) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..100_000 {
        let mut units = random_contact_pair(&mut r);
        let params = PhysicsParams { restitution: r.random_range(0.0..=1.0), ..PhysicsParams::default() };
        let (p0, k0) = (momentum(&units), kinetic_energy(&units));
        let contacts = detect_contacts(&units);
        assert_eq!(contacts.len(), 1);
        resolve_contacts(&mut units, &contacts, &params);
        let p1 = momentum(&units);
        max_dp = max_dp.max((p1.x - p0.x).abs()).max((p1.y - p0.y).abs());
        max_de = max_de.max(kinetic_energy(&units) - k0);
    }

    let mut max_swap = 0.0f64;
    for _ in 0..1000 {
        let mut spec = Preset::Farmer.spec();
        spec.body_mass = r.random_range(0.1..20.0);
        let (va, vb) = (r.random_range(0.1..5.0), r.random_range(0.1..5.0));
        let mut a = UnitState::spawn(spec.clone(), ALLY, Vec2::new(0.0, 0.0), 0.0);
        let mut b = UnitState::spawn(spec, ENEMY, Vec2::new(1.9, 0.0), 0.0);
        a.velocity = Vec2::new(va, 0.0);
        b.velocity = Vec2::new(-vb, 0.0);
        let mut units = vec![a, b];
        let params = PhysicsParams { restitution: 1.0, ..PhysicsParams::default() };
        let contacts = detect_contacts(&units);
        resolve_contacts(&mut units, &contacts, &params);
        max_swap = max_swap
            .max((units[0].velocity.x + vb).abs())
            .max((units[1].velocity.x - va).abs())
            .max(units[0].velocity.y.abs())
            .max(units[1].velocity.y.abs());
    }

    let mut mismatches = 0;
    let mut contacts_seen = 0;
    for _ in 0..1000 {
        let units: Vec<UnitState> = (0..32)
            .map(|_| {
                let mut spec = Preset::Farmer.spec();
                spec.body_radius = r.random_range(0.2..3.0);
                let p = Vec2::new(r.random_range(0.0..25.0), r.random_range(0.0..25.0));
                let mut u = UnitState::spawn(spec, ALLY, p, 0.0);
                u.active = r.random_bool(0.9);
                u
            })
            .collect();
        let fast = detect_contacts(&units);
        contacts_seen += fast.len();
        if fast != detect_contacts_brute_force(&units) {
            mismatches += 1;
        }
    }

    report(
        "physics oracle",
        max_dp < 1e-9 && max_de <= 1e-9 && max_swap < 1e-9 && mismatches == 0,
        format!(
            "100000 contacts: max |dp| {max_dp:.2e}, max dE {max_de:.2e}; elastic swap err {max_swap:.2e}; \
             sweep vs all-pairs mismatches {mismatches}/1000 ({contacts_seen} contacts)"
        ),
    )
}

#[test]
fn boundary_penalty() {
    let mut r = rng(7);
    let mut exact = 0;
    let mut direct_exact = 0;
    for _ in 0..100 {
        let h = r.random_range(1.0..1000.0);
        let dt = r.random_range(0.01..0.5);
        let expected = h - 0.1 * h * dt;

        let mut c = ScenarioConfig::new("edge", Field::new(20.0, 20.0, 0.0));
        let mut ally = UnitPlacement::new(ALLY, Preset::Farmer, Vec2::new(20.0, 10.0), 90.0);
        ally.source.set_override("max_health", h);
        c.units = vec![ally, UnitPlacement::new(ENEMY, Preset::Farmer, Vec2::new(1.0, 10.0), 180.0)];
        c.max_units = 2;
        c.physics.dt = dt;
        c.set_controller(ENEMY, Controller::External, None);
        let s0 = reset(&c, 0).unwrap();
        let s1 = step(&s0.state, &[MOVE_RIGHT, ROTATE]).unwrap();
        let u = &s1.state.units[0];
        if u.health == expected && u.position.x == 20.0 {
            exact += 1;
        }

        let mut spec = Preset::Farmer.spec();
        spec.max_health = h;
        let mut units = vec![UnitState::spawn(spec, ALLY, Vec2::new(-0.5, 3.0), 0.0)];
        apply_boundary(&mut units, &Field::new(10.0, 10.0, 0.0), 0.1, dt);
        if units[0].health == expected {
            direct_exact += 1;
        }
    }
    report(
        "boundary penalty",
        exact == 100 && direct_exact == 100,
        format!("health after one out-of-bounds step == h - 0.1*h*dt bit-exactly: {exact}/100 via step, {direct_exact}/100 direct"),
    )
}

#[test]
fn bush_truth_table() {
    let observer_pos = Vec2::new(10.0, 10.0);
    let target_pos = Vec2::new(14.0, 10.0);
    let bushes = |obs_in: bool, tgt_in: bool| -> Vec<Zone> {
        let bush = |c: Vec2, a: Vec2| Zone::new(ZoneType::Bush, c, a, 0.0);
        match (obs_in, tgt_in) {
            (true, true) => vec![bush(Vec2::new(12.0, 10.0), Vec2::new(3.5, 1.5))],
            (true, false) => vec![bush(observer_pos, Vec2::new(1.5, 1.5))],
            (false, true) => vec![bush(target_pos, Vec2::new(1.5, 1.5))],
            (false, false) => vec![],
        }
    };
    let pair = |same: bool| {
        vec![
            UnitState::spawn(Preset::Farmer.spec(), ALLY, observer_pos, 0.0),
            UnitState::spawn(Preset::Farmer.spec(), if same { ALLY } else { ENEMY }, target_pos, 0.0),
        ]
    };

    let mut correct = 0;
    let mut rows = Vec::new();
    for obs_in in [false, true] {
        for tgt_in in [false, true] {
            for same in [false, true] {
                let zones = bushes(obs_in, tgt_in);
                let units = pair(same);
                assert_eq!(zones.iter().any(|z| z.contains(observer_pos)), obs_in);
                assert_eq!(zones.iter().any(|z| z.contains(target_pos)), tgt_in);
                // a unit in a bush is hidden from opponents outside that bush
                let expected = same || !tgt_in || obs_in;
                let got = visibility_matrix(&units, &zones).get(0, 1);
                correct += (got == expected) as usize;
                rows.push(format!("{}{}{}={}", obs_in as u8, tgt_in as u8, same as u8, got as u8));
            }
        }
    }

    // a revealed enemy in a bush is visible until its timer runs out
    let zones = bushes(false, true);
    let mut units = pair(false);
    let mut hits = BoolMatrix::new(2);
    hits.set(1, 0, true);
    update_reveal_timers(&mut units, &hits, 1.0);
    let revealed = visibility_matrix(&units, &zones).get(0, 1);
    for _ in 0..10 {
        integrate_kinematics(&mut units, &[Vec2::ZERO, Vec2::ZERO], 0.1);
    }
    let expired = visibility_matrix(&units, &zones).get(0, 1);
    correct += revealed as usize + !expired as usize;

    report(
        "bush visibility truth table",
        correct == 10,
        format!("{correct}/10 cases (obs_in,tgt_in,same=visible: {}; revealed=1 got {}, expired=0 got {})", rows.join(" "), revealed as u8, expired as u8),
    )
}

#[test]
fn action_mask_soundness() {
    let mut scenarios: Vec<Arc<ScenarioConfig>> =
        challenge_names().iter().map(|n| random_vs_random(&catalog_scenario(n).unwrap())).collect();
    for name in ["1F1M1Avs1F1M1A", "2F1M2Avs2S1K_2L2B2S", "4F1S1K1C1Pvs2M1C1P_2L2B2S-1"] {
        scenarios.push(random_vs_random(&catalog_scenario(name).unwrap()));
    }
    let envs = 64;
    let configs: Vec<Arc<ScenarioConfig>> = (0..envs).map(|k| Arc::clone(&scenarios[k % scenarios.len()])).collect();
    let mut results: Vec<_> = reset_batch(&configs, &vec![5; envs]).into_iter().map(Result::unwrap).collect();
    let mut resets = envs as u64;
    let (mut steps, mut violations, mut cooling, mut attacks) = (0u64, 0u64, 0u64, 0u64);
    let no_actions: Vec<Vec<u8>> = Vec::new();
    while steps < 1_000_000 {
        let states: Vec<EnvState> = results.iter().map(|r| r.state.clone()).collect();
        let next: Vec<_> = step_batch(&states, &no_actions).into_iter().map(Result::unwrap).collect();
        for (before, after) in states.iter().zip(&next) {
            for (i, (u0, u1)) in before.units.iter().zip(&after.state.units).enumerate() {
                let attacked = after.actions[i] == ATTACK && u1.cooldown_timer == u1.spec.attack_cooldown && u0.alive;
                if u0.cooldown_timer > 0.0 {
                    cooling += 1;
                    // a running timer only ever shrinks unless an attack restarts it
                    let reset_timer = u1.cooldown_timer >= u0.cooldown_timer;
                    if after.actions[i] == ATTACK || reset_timer {
                        violations += 1;
                    }
                } else if attacked {
                    attacks += 1;
                }
            }
        }
        steps += next.len() as u64;
        results = next
            .into_iter()
            .enumerate()
            .map(|(k, r)| {
                if r.done() {
                    resets += 1;
                    battlesim::reset_indexed(Arc::clone(&configs[k]), 5, resets).unwrap()
                } else {
                    r
                }
            })
            .collect();
    }

    // external callers are refused too
    let mut c = catalog_scenario("vsrangers").unwrap();
    c.set_controller(ENEMY, Controller::External, None);
    let mut s = reset(&c, 0).unwrap().state;
    s.units[0].cooldown_timer = 0.5;
    let mut joint = vec![ROTATE; s.units.len()];
    joint[0] = ATTACK;
    let refused = matches!(step(&s, &joint), Err(EnvError::InvalidAction { agent: 0, .. }));

    report(
        "action-mask soundness",
        violations == 0 && refused && attacks > 0,
        format!("{steps} steps, {cooling} unit-steps with cooldown > 0, {violations} attacks by cooling units, {attacks} attacks by ready units; masked external attack refused = {refused}"),
    )
}

const TIER_COMPOSITION: &str = "1F1M1Avs1F1M1A";
const TIER_EPISODES: u64 = 500;
const TIER_SEED: u64 = 2024;
const TIER_TOLERANCE: f64 = 0.05;
/// Measured once on this engine and frozen.
const CALIBRATED_MEDIUM_VS_RANDOM: f64 = 0.892;
const CALIBRATED_EXPERT_VS_NOVICE: f64 = 0.950;
const CALIBRATED_VS_RANDOM: [f64; 5] = [0.370, 0.806, 0.892, 0.908, 0.984];

fn policy(t: Tier) -> PolicySpec {
    match t {
        Tier::Random => PolicySpec::Random,
        t => PolicySpec::Heuristic(t),
    }
}

#[test]
fn heuristic_tier_ordering() {
    let start = Instant::now();
    let c = catalog_scenario(TIER_COMPOSITION).unwrap();
    let win = |a: Tier, e: Tier| run_rollouts(&c, &policy(a), &policy(e), TIER_EPISODES, TIER_SEED, None).unwrap().win_rate;

    let vs_random: Vec<f64> = Tier::ALL.iter().map(|t| win(*t, Tier::Random)).collect();
    let medium_vs_random = vs_random[2];
    let expert_vs_novice = win(Tier::Expert, Tier::Novice);

    let monotone = vs_random[0] < vs_random[1] && vs_random[1] < vs_random[2] && vs_random[2] < vs_random[3] && vs_random[3] <= vs_random[4];
    let near = |x: f64, y: f64| (x - y).abs() <= TIER_TOLERANCE;
    let calibrated = near(medium_vs_random, CALIBRATED_MEDIUM_VS_RANDOM)
        && near(expert_vs_novice, CALIBRATED_EXPERT_VS_NOVICE)
        && vs_random.iter().zip(CALIBRATED_VS_RANDOM).all(|(x, y)| near(*x, y));
    let ok = medium_vs_random >= 0.80 && expert_vs_novice >= 0.70 && monotone && calibrated;
    let secs = start.elapsed().as_secs_f64();
    report(
        "heuristic tier ordering",
        ok && secs < 300.0,
        format!(
            "{TIER_COMPOSITION}, {TIER_EPISODES} episodes/pairing: medium vs random {medium_vs_random:.3} (>= 0.80), \
             expert vs novice {expert_vs_novice:.3} (>= 0.70); vs random [random, novice, medium, advanced, expert] = {:?}, \
             monotone {monotone}, within +-{TIER_TOLERANCE} of calibration {calibrated}; {secs:.1}s",
            vs_random.iter().map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    )
}

#[test]
fn throughput_and_reconfiguration() {
    let start = Instant::now();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let c = catalog_scenario("vsrangers").unwrap();
    let rows = benchmark_throughput(&c, &[64, 1024], 20, None).unwrap();
    let ratio = rows[1].env_steps_per_sec / rows[0].env_steps_per_sec;
    let scaling = format!(
        "{cores} cores: {:.0} env-steps/s at 64 envs, {:.0} at 1024, ratio {ratio:.2} (target >= 8 on >= 16 cores)",
        rows[0].env_steps_per_sec, rows[1].env_steps_per_sec
    );
    if cores >= 16 {
        report("throughput scaling", ratio >= 8.0, scaling);
    } else {
        println!("[UNVERIFIED] throughput scaling: {scaling}; needs a >= 16-core host");
    }

    let bases = ["crossfire", "ambush", "2F1M2Avs2S1K_2L2B2S", "3F1S1K1A1D1Pvs2M1C1P_2L2B2S-2"];
    let configs: Vec<ScenarioConfig> = (0..100u64)
        .map(|k| {
            let spec = LevelGenSpec::new(
                catalog_scenario(bases[k as usize % bases.len()]).unwrap(),
                ParamRanges::default(),
                [Category::UnitSpec, Category::Zones, Category::Heuristic],
            );
            sample_level(&spec, &mut RngStream::new(11, k).at(0, tag::SAMPLE_LEVEL))
        })
        .collect();
    let distinct = configs.windows(2).all(|w| w[0] != w[1]);
    let lat = reset_latencies(&configs, 20).unwrap();
    let max_ms = lat.iter().map(|d| d.as_secs_f64() * 1e3).fold(0.0, f64::max);
    let mean_ms = lat.iter().map(|d| d.as_secs_f64() * 1e3).sum::<f64>() / lat.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    report(
        "reconfiguration latency",
        distinct && max_ms < 10.0 && secs < 600.0,
        format!("100 distinct sampled scenarios: reset mean {mean_ms:.3} ms, max {max_ms:.3} ms (< 10 ms); {secs:.1}s total"),
    )
}

#[test]
fn generator_and_mutator_validity() {
    let mut bases: Vec<ScenarioConfig> = challenge_names().iter().map(|n| catalog_scenario(n).unwrap()).collect();
    for n in ["2F1M2Avs2S1K_2L2B2S", "1S3K1Cvs2S1K_2L2B2S-1", "5F1S1A1Dvs7F1S1D1H_2L2B2S-2", "2K1M2Dvs2S1K"] {
        bases.push(catalog_scenario(n).unwrap());
    }
    let specs: Vec<LevelGenSpec> = bases
        .into_iter()
        .map(|b| LevelGenSpec::new(b, ParamRanges::default(), [Category::UnitSpec, Category::Zones, Category::Heuristic]))
        .collect();

    let mut sampled_bad = 0;
    let mut mutated_bad = 0;
    let ops = [MutationOp::Perturb { delta: 0.1 }, MutationOp::SwapAxes, MutationOp::Retype];
    let mut per_op = [0usize; 3];
    for k in 0..10_000u64 {
        let level = sample_level(&specs[k as usize % specs.len()], &mut RngStream::new(3, k).at(0, tag::SAMPLE_LEVEL));
        sampled_bad += !battlesim::config::validate_scenario(&level).is_valid() as usize;
        let op = k as usize % 3;
        let mutated = mutate_level(&level, ops[op], &mut RngStream::new(3, k).at(0, tag::MUTATE_LEVEL));
        per_op[op] += 1;
        mutated_bad += !battlesim::config::validate_scenario(&mutated).is_valid() as usize;
    }

    let mut c = catalog_scenario("crossfire").unwrap();
    c.zones = vec![
        Zone::new(ZoneType::Lava, Vec2::new(5.0, 5.0), Vec2::new(2.0, 5.0), 3.0),
        Zone::inactive(),
    ];
    c.max_zones = c.max_zones.max(2);
    let swapped = mutate_level(&c, MutationOp::SwapAxes, &mut rng(0));
    let mut expected = c.clone();
    expected.zones[0].semi_axes = Vec2::new(5.0, 2.0);
    let directed = swapped == expected;

    report(
        "generator/mutator validity",
        sampled_bad == 0 && mutated_bad == 0 && directed,
        format!(
            "10000 sampled: {sampled_bad} invalid; 10000 mutated (perturb {}, swap_axes {}, retype {}): {mutated_bad} invalid; directed swap_axes (2,5)->(5,2) = {directed}",
            per_op[0], per_op[1], per_op[2]
        ),
    )
}

#[test]
fn scenario_round_trip() {
    let mut catalog_stable = 0;
    for e in catalog_entries() {
        let c = load_scenario(e.source.as_bytes()).unwrap();
        catalog_stable += (save_scenario(&c) == e.source.as_bytes()) as usize;
    }
    let mut random_stable = 0;
    for k in 0..1000u64 {
        let c = random_config(k, 12, 8);
        let bytes = save_scenario(&c);
        let back = load_scenario(&bytes).unwrap();
        random_stable += (back == c && save_scenario(&back) == bytes) as usize;
    }
    report(
        "scenario round-trip",
        catalog_stable == catalog_entries().len() && random_stable == 1000,
        format!("catalog {catalog_stable}/{} byte-stable, random configs {random_stable}/1000 byte-stable", catalog_entries().len()),
    )
}
