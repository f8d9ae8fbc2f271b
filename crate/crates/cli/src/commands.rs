use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use battlesim::bench::{benchmark_throughput, reset_latencies};
use battlesim::config::{validate_scenario, ScenarioConfig};
use battlesim::rng::{tag, RngStream};
use battlesim::rollout::{configure, run_episode, run_rollouts, PolicySpec};
use battlesim::scenario::{
    catalog_entries, catalog_scenario, mutate_level, read_scenario_file, sample_level, write_scenario_file, Category,
    LevelGenSpec, LoadError, MutationOp, ParamRanges,
};
use battlesim::svg::render_svg;

/// Marks errors that map to exit code 2.
#[derive(Debug)]
pub struct ValidationFailed(pub String);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "validation failed\n{}", self.0.trim_end())
    }
}

impl std::error::Error for ValidationFailed {}

/// Reads a scenario from a file, or from the catalog when no such file exists.
fn load_scenario_arg(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    if !path.exists() {
        return catalog_scenario(arg).with_context(|| format!("'{arg}' is neither a file nor a catalog scenario"));
    }
    match read_scenario_file(path) {
        Ok((config, report)) => {
            if !report.is_valid() {
                return Err(ValidationFailed(report.to_string()).into());
            }
            Ok(config)
        }
        Err(e @ LoadError::Io { .. }) => Err(e.into()),
        Err(e) => Err(ValidationFailed(format!("{arg}: {e}")).into()),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
        None => Ok(f()),
    }
}

pub struct RunArgs {
    pub scenario: String,
    pub episodes: u64,
    pub seed: u64,
    pub ally: String,
    pub enemy: String,
    pub trace: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub svg_every: u32,
    pub threads: Option<usize>,
}

pub fn run(args: &RunArgs) -> Result<()> {
    let config = load_scenario_arg(&args.scenario)?;
    let ally: PolicySpec = args.ally.parse()?;
    let enemy: PolicySpec = args.enemy.parse()?;
    let mut sink = match &args.trace {
        Some(p) => Some(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => None,
    };
    let summary = with_threads(args.threads, || {
        run_rollouts(
            &config,
            &ally,
            &enemy,
            args.episodes,
            args.seed,
            sink.as_mut().map(|w| w as &mut dyn Write),
        )
    })??;
    if let Some(dir) = &args.svg {
        write_frames(dir, &config, &ally, &enemy, args.episodes, args.seed, args.svg_every.max(1))?;
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn write_frames(
    dir: &Path,
    config: &ScenarioConfig,
    ally: &PolicySpec,
    enemy: &PolicySpec,
    episodes: u64,
    seed: u64,
    every: u32,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let config = Arc::new(configure(config, ally, enemy));
    for e in 0..episodes {
        let run = run_episode(&config, ally, enemy, seed, e, true)?;
        let last = run.steps.len() - 1;
        for (k, r) in run.steps.iter().enumerate() {
            if r.state.t % every == 0 || k == last {
                let path = dir.join(format!("ep{e:04}_t{:04}.svg", r.state.t));
                fs::write(&path, render_svg(&r.state)).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}

pub fn bench(scenario: &str, envs: &[usize], steps: usize, threads: Option<usize>, reconfig: usize) -> Result<()> {
    let config = load_scenario_arg(scenario)?;
    let rows = benchmark_throughput(&config, envs, steps, threads)?;
    println!("{:>8} {:>8} {:>10} {:>14} {:>16}", "envs", "steps", "seconds", "env_steps/s", "agent_steps/s");
    for r in &rows {
        println!(
            "{:>8} {:>8} {:>10.3} {:>14.0} {:>16.0}",
            r.envs, r.steps, r.seconds, r.env_steps_per_sec, r.agent_steps_per_sec
        );
    }
    if reconfig > 0 {
        let spec = LevelGenSpec::new(config, ParamRanges::default(), [Category::UnitSpec, Category::Zones, Category::Heuristic]);
        let configs: Vec<ScenarioConfig> = (0..reconfig as u64)
            .map(|k| sample_level(&spec, &mut RngStream::new(0, k).at(0, tag::SAMPLE_LEVEL)))
            .collect();
        let lat = reset_latencies(&configs, 10)?;
        let ms: Vec<f64> = lat.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        let mean = ms.iter().sum::<f64>() / ms.len() as f64;
        let max = ms.iter().copied().fold(0.0, f64::max);
        println!("reconfiguration: {} scenarios, mean {mean:.3} ms, max {max:.3} ms per reset", ms.len());
    }
    Ok(())
}

pub fn validate(file: &str) -> Result<()> {
    let (config, report) = match read_scenario_file(Path::new(file)) {
        Ok(ok) => ok,
        Err(e @ LoadError::Io { .. }) => return Err(e.into()),
        Err(e) => return Err(ValidationFailed(format!("{file}: {e}")).into()),
    };
    for note in &report.notes {
        println!("note: {note}");
    }
    if !report.is_valid() {
        return Err(ValidationFailed(report.violations.iter().map(|v| format!("{}\n", v.message)).collect()).into());
    }
    println!("{}: valid ({} units, {} zones)", file, config.units.len(), config.zones.len());
    Ok(())
}

pub fn gen(spec: &Path, count: u64, seed: u64, out: &Path) -> Result<()> {
    let bytes = fs::read(spec).with_context(|| format!("reading {}", spec.display()))?;
    let spec = LevelGenSpec::from_json(&bytes).map_err(|e| ValidationFailed(format!("{}: {e}", "spec")))?;
    let report = validate_scenario(&spec.base);
    if !report.is_valid() {
        return Err(ValidationFailed(format!("spec base:\n{report}")).into());
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for k in 0..count {
        let mut level = sample_level(&spec, &mut RngStream::new(seed, k).at(0, tag::SAMPLE_LEVEL));
        level.name = format!("{}-gen{k}", spec.base.name);
        let report = validate_scenario(&level);
        if !report.is_valid() {
            bail!("sampled level {k} is invalid:\n{report}");
        }
        let path = out.join(format!("level_{k:05}.json"));
        write_scenario_file(&path, &level).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("wrote {count} levels to {}", out.display());
    Ok(())
}

pub fn mutate(scenario: &str, op: &str, seed: u64, out: &Path) -> Result<()> {
    let config = load_scenario_arg(scenario)?;
    let op: MutationOp = op.parse().map_err(anyhow::Error::msg)?;
    let mutated = mutate_level(&config, op, &mut RngStream::new(seed, 0).at(0, tag::MUTATE_LEVEL));
    let report = validate_scenario(&mutated);
    if !report.is_valid() {
        bail!("mutated level is invalid:\n{report}");
    }
    write_scenario_file(out, &mutated).with_context(|| format!("writing {}", out.display()))?;
    println!("{op}: wrote {}", out.display());
    Ok(())
}

pub fn catalog(_list: bool, export: Option<&Path>) -> Result<()> {
    match export {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for e in catalog_entries() {
                let path = dir.join(format!("{}.json", e.name));
                fs::write(&path, e.source).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("exported {} scenarios to {}", catalog_entries().len(), dir.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            for e in catalog_entries() {
                // a closed pipe (e.g. `| head`) just ends the listing
                if writeln!(out, "{:<10} {}", e.kind.key(), e.name).is_err() {
                    break;
                }
            }
        }
    }
    Ok(())
}
