use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ibrom::diagnostics::convergence_order;
use ibrom::exec::Execution;
use ibrom::harness::run::{kernel_table, Setup};
use ibrom::harness::speedup::{measure, write_table};
use ibrom::harness::{run_checks, run_model, Experiment, ExperimentConfig, ModelKind, RunSummary};
use ibrom::eulerian::ProjectionSolver;

#[derive(Parser)]
#[command(name = "ibrom", version, about = "Immersed-boundary FSI solver with a reduced-order model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run every config matching a glob and tabulate the results.
    Sweep {
        pattern: String,
        #[command(flatten)]
        opts: RunOpts,
        /// Also time the full model against `--model` (default rom-interp).
        #[arg(long)]
        speedup: bool,
    },
    /// Sample the kernel tables of a config into the cache directory.
    SampleTables {
        config: PathBuf,
        #[arg(long, env = "IBROM_CACHE_DIR")]
        cache_dir: PathBuf,
    },
    /// Run the invariant checks on small grids.
    Verify,
    /// Print a preset config as TOML.
    Preset {
        #[arg(value_enum)]
        experiment: PresetName,
        #[arg(long)]
        h: f64,
        /// Capsule membrane stiffness.
        #[arg(long, default_value_t = 1e-5)]
        sigma: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    Membrane,
    Jeffery,
    TwoCell,
    Capsule,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// fom, rom-direct or rom-interp; overrides the config.
    #[arg(long)]
    model: Option<ModelKind>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Kernel table cache.
    #[arg(long, env = "IBROM_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

impl RunOpts {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(m) = self.model {
            cfg.model = m;
        }
        if let Some(n) = self.steps {
            cfg.time.steps = n;
        }
        if let Some(dt) = self.dt {
            cfg.time.dt = Some(dt);
        }
    }
}

fn load(path: &Path, opts: &RunOpts) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    opts.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn run_one(cfg: &ExperimentConfig, out: &Path, cache: Option<&Path>) -> Result<RunSummary> {
    log::info!(
        "{} {} h = {} dt = {:e} steps = {} -> {}",
        cfg.experiment.name(),
        cfg.model.name(),
        cfg.grid.h,
        cfg.dt(),
        cfg.time.steps,
        out.display()
    );
    let res = run_model(cfg, Some(out), cache)?;
    Ok(res.summary)
}

fn cmd_run(config: &Path, opts: &RunOpts) -> Result<()> {
    let cfg = load(config, opts)?;
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let s = run_one(&cfg, &out, opts.cache_dir.as_deref())?;
    print!("{}", s.to_text());
    Ok(())
}

fn cmd_sweep(pattern: &str, opts: &RunOpts, speedup: bool) -> Result<()> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)?.collect::<std::result::Result<_, _>>()?;
    paths.sort();
    if paths.is_empty() {
        bail!("no config matches `{pattern}`");
    }
    let root = opts.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&root)?;
    let mut table = String::from(
        "config,model,h,steps,final_perimeter,max_abs_flux,median_step_secs,model_order_full,model_order_reduced\n",
    );
    let mut rows = Vec::new();
    let mut configs = Vec::new();
    for p in &paths {
        let cfg = load(p, opts)?;
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let s = run_one(&cfg, &root.join(stem), opts.cache_dir.as_deref())?;
        let _ = writeln!(
            table,
            "{stem},{},{},{},{:e},{:e},{:e},{},{}",
            s.model, s.h, s.steps, s.final_perimeter, s.max_abs_flux, s.median_step_secs, s.full_order, s.reduced_order
        );
        rows.push(s);
        configs.push(cfg);
    }
    fs::write(root.join("sweep.csv"), &table)?;
    print!("{table}");
    for w in rows.windows(3) {
        let halving = (w[0].h / w[1].h - 2.0).abs() < 1e-9 && (w[1].h / w[2].h - 2.0).abs() < 1e-9;
        if halving && w.iter().all(|s| s.model == w[0].model) {
            let p = [w[0].final_perimeter, w[1].final_perimeter, w[2].final_perimeter];
            match convergence_order(p[0], p[1], p[2]) {
                Ok(o) => println!("convergence order h = {} .. {}: {o:.4}", w[0].h, w[2].h),
                Err(e) => println!("convergence order h = {} .. {}: {e}", w[0].h, w[2].h),
            }
        }
    }
    if speedup {
        let rom = opts.model.filter(|m| *m != ModelKind::Fom).unwrap_or(ModelKind::RomInterp);
        let measured = configs
            .iter()
            .map(|c| measure(c, rom, 120))
            .collect::<ibrom::Result<Vec<_>>>()?;
        let path = root.join("speedup.csv");
        write_table(&measured, &path)?;
        print!("{}", fs::read_to_string(&path)?);
    }
    Ok(())
}

fn cmd_sample_tables(config: &Path, cache: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config).with_context(|| format!("reading {}", config.display()))?;
    let setup = Setup::new(&cfg)?;
    let solver = ProjectionSolver::factorize(&setup.grid)?;
    fs::create_dir_all(cache)?;
    let info = kernel_table(&cfg, &solver, &setup.x0, Some(cache), Execution::default())?;
    let t = &info.table;
    if info.from_cache {
        println!("table already cached in {}", cache.display());
    } else {
        println!("sampled in {:.3} s", info.sampling_secs);
    }
    println!(
        "h = {} extent = {} spacing = {} samples per side = {}",
        t.h(),
        t.extent(),
        t.spacing(),
        t.n_side()
    );
    Ok(())
}

fn cmd_verify() -> Result<()> {
    let checks = run_checks()?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, opts } => cmd_run(&config, &opts),
        Command::Sweep { pattern, opts, speedup } => cmd_sweep(&pattern, &opts, speedup),
        Command::SampleTables { config, cache_dir } => cmd_sample_tables(&config, &cache_dir),
        Command::Verify => cmd_verify(),
        Command::Preset { experiment, h, sigma } => {
            let cfg = match experiment {
                PresetName::Membrane => ExperimentConfig::preset(Experiment::Membrane, h),
                PresetName::Jeffery => ExperimentConfig::preset(Experiment::Jeffery, h),
                PresetName::TwoCell => ExperimentConfig::preset(Experiment::TwoCell, h),
                PresetName::Capsule => ExperimentConfig::capsule(h, sigma),
            };
            print!("{}", cfg.to_toml()?);
            Ok(())
        }
    }
}
