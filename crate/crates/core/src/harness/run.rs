//! Experiment drivers for the full and reduced models.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;

use crate::diagnostics::{jeffery_angle, mass_flux, principal_angle, shape_metrics, AngleTracker};
use crate::error::{Error, Result};
use crate::eulerian::{ProjectionSolver, StaggeredGrid};
use crate::exec::Execution;
use crate::fom::{BackgroundFlow, BackgroundKind, FluidParams, FomSolver};
use crate::interp::{cache, default_extent, sample_kernel_tables, KernelTable};
use crate::lagrangian::{ForceModel, StructureState};
use crate::rom::{Assembly, RomSolver};

use super::config::{Experiment, ExperimentConfig, ModelKind};
use super::record::{median, write_snapshot, Row, TimeSeriesRecord};

/// Everything a run needs, built once from the config.
pub struct Setup {
    pub grid: StaggeredGrid,
    pub params: FluidParams,
    pub x0: StructureState,
    pub model: ForceModel,
    pub background: BackgroundFlow,
    pub dt: f64,
    pub steps: usize,
    pub radius: f64,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid.build()?;
        let x0 = cfg.structure()?;
        let model = cfg.forces.build(&x0);
        let dt = cfg.dt();
        let background = BackgroundFlow::new(cfg.background.clone(), &grid, &cfg.fluid, dt, cfg.time.steps + 1)?;
        Ok(Setup {
            radius: 2.0 * grid.h(),
            grid,
            params: cfg.fluid,
            x0,
            model,
            background,
            dt,
            steps: cfg.time.steps,
        })
    }
}

/// A kernel table with how it was obtained.
pub struct TableInfo {
    pub table: Arc<KernelTable>,
    /// Sampling wall time; zero when loaded from the cache.
    pub sampling_secs: f64,
    pub from_cache: bool,
}

pub fn table_extent(cfg: &ExperimentConfig, x0: &StructureState) -> f64 {
    let h = cfg.grid.h;
    cfg.table
        .extent
        .unwrap_or_else(|| default_extent(x0.diameter(), h, cfg.table.spacing * h))
}

/// Loads the table from the cache directory (if given and present) or samples
/// it, saving the result to the cache.
pub fn kernel_table(
    cfg: &ExperimentConfig,
    solver: &ProjectionSolver,
    x0: &StructureState,
    cache_dir: Option<&Path>,
    exec: Execution,
) -> Result<TableInfo> {
    let h = cfg.grid.h;
    let spacing = cfg.table.spacing * h;
    let extent = table_extent(cfg, x0);
    let radius = 2.0 * h;
    if let Some(dir) = cache_dir {
        // The sampler rounds the extent up to whole spacings; the key uses the rounded value.
        let rounded = (extent / spacing - 1e-9).ceil() * spacing;
        if let Some(t) = cache::load(dir, h, radius, cfg.grid.bc, rounded, spacing)? {
            return Ok(TableInfo {
                table: Arc::new(t),
                sampling_secs: 0.0,
                from_cache: true,
            });
        }
    }
    let start = Instant::now();
    let table = sample_kernel_tables(solver, radius, extent, spacing, exec)?;
    let sampling_secs = start.elapsed().as_secs_f64();
    if let Some(dir) = cache_dir {
        cache::save(&table, dir)?;
    }
    Ok(TableInfo {
        table: Arc::new(table),
        sampling_secs,
        from_cache: false,
    })
}

/// Scalars reported at the end of a run.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub experiment: String,
    pub model: String,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    /// Dimension of the full DAE state, `n_u + n_p`.
    pub full_order: usize,
    pub reduced_order: usize,
    pub reynolds: Option<f64>,
    pub median_step_secs: f64,
    pub total_secs: f64,
    pub sampling_secs: Option<f64>,
    pub table_from_cache: bool,
    pub final_perimeter: f64,
    pub final_ref: [f64; 2],
    pub max_abs_flux: f64,
    pub max_divergence: Option<f64>,
    pub max_angle_error: Option<f64>,
    pub max_regularization: f64,
    pub max_node_speed: f64,
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.experiment);
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "dt = {:e}", self.dt);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "model_order_full = {}", self.full_order);
        let _ = writeln!(s, "model_order_reduced = {}", self.reduced_order);
        if let Some(re) = self.reynolds {
            let _ = writeln!(s, "reynolds = {re:e}");
        }
        let _ = writeln!(s, "median_step_secs = {:e}", self.median_step_secs);
        let _ = writeln!(s, "total_secs = {:.3}", self.total_secs);
        if let Some(t) = self.sampling_secs {
            let _ = writeln!(s, "sampling_secs = {t:e}");
            let _ = writeln!(s, "table_from_cache = {}", self.table_from_cache);
        }
        let _ = writeln!(s, "final_perimeter = {:e}", self.final_perimeter);
        let _ = writeln!(s, "final_ref_x = {:e}", self.final_ref[0]);
        let _ = writeln!(s, "final_ref_y = {:e}", self.final_ref[1]);
        let _ = writeln!(s, "max_abs_flux = {:e}", self.max_abs_flux);
        if let Some(d) = self.max_divergence {
            let _ = writeln!(s, "max_divergence = {d:e}");
        }
        if let Some(e) = self.max_angle_error {
            let _ = writeln!(s, "max_angle_error = {e:e}");
        }
        let _ = writeln!(s, "max_node_speed = {:e}", self.max_node_speed);
        let _ = writeln!(s, "max_m0_regularization = {:e}", self.max_regularization);
        s
    }
}

pub struct RunOutput {
    pub record: TimeSeriesRecord,
    pub summary: RunSummary,
    pub final_x: StructureState,
}

/// Per-run observation state shared by both models.
struct Observer<'a> {
    cfg: &'a ExperimentConfig,
    out: Option<&'a Path>,
    p0: f64,
    tracker: AngleTracker,
    record: TimeSeriesRecord,
    summary: RunSummary,
}

impl<'a> Observer<'a> {
    fn new(cfg: &'a ExperimentConfig, setup: &Setup, out: Option<&'a Path>, model: &str, mode: &str) -> Result<Self> {
        if let Some(dir) = out {
            if cfg.output.snapshot_every > 0 {
                fs::create_dir_all(dir.join("snapshots"))?;
            }
        }
        Ok(Observer {
            cfg,
            out,
            p0: shape_metrics(&setup.x0, 0, 1.0).perimeter,
            tracker: AngleTracker::default(),
            record: TimeSeriesRecord {
                model: model.to_string(),
                assembly_mode: mode.to_string(),
                n_bodies: setup.x0.bodies().len(),
                rows: Vec::new(),
            },
            summary: RunSummary {
                experiment: cfg.experiment.name().to_string(),
                model: model.to_string(),
                h: setup.grid.h(),
                dt: setup.dt,
                steps: setup.steps,
                full_order: setup.grid.n_u() + setup.grid.n_p(),
                reduced_order: 2 * setup.x0.n_nodes(),
                reynolds: cfg.reynolds(),
                ..RunSummary::default()
            },
        })
    }

    fn exact_angle(&self, t: f64) -> Option<f64> {
        match (&self.cfg.experiment, &self.cfg.background) {
            (Experiment::Jeffery, BackgroundKind::Shear { gamma_dot }) => {
                let [s1, s2] = self.cfg.bodies[0].semi_axes;
                Some(jeffery_angle(t, s1, s2, *gamma_dot))
            }
            _ => None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn observe(
        &mut self,
        step: usize,
        t: f64,
        x: &StructureState,
        node_velocity: &[f64],
        lyapunov: f64,
        divergence: Option<f64>,
        timing: [f64; 3],
    ) -> Result<()> {
        let m = shape_metrics(x, 0, self.p0);
        let flux = mass_flux(node_velocity, x, 0)?;
        let exact = self.exact_angle(t);
        let angle = exact.map(|_| self.tracker.update(principal_angle(x, 0)));
        if let (Some(a), Some(e)) = (angle, exact) {
            let err = (a - e).abs();
            self.summary.max_angle_error = Some(self.summary.max_angle_error.map_or(err, |m| m.max(err)));
        }
        self.summary.max_abs_flux = self.summary.max_abs_flux.max(flux.abs());
        if let Some(d) = divergence {
            self.summary.max_divergence = Some(self.summary.max_divergence.map_or(d, |m| m.max(d)));
        }
        let speed = node_velocity.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        self.summary.max_node_speed = self.summary.max_node_speed.max(speed);
        let last = step == self.summary.steps;
        if step % self.cfg.output.record_every == 0 || last {
            let p = x.node(0);
            let centers = (0..x.bodies().len()).flat_map(|b| x.centroid(b)).collect();
            self.record.rows.push(Row {
                t,
                step,
                ref_x: p[0],
                ref_y: p[1],
                perimeter: m.perimeter,
                area: m.area,
                delta_p: m.delta_p,
                swelling: m.swelling,
                flux,
                lyapunov: Some(lyapunov),
                divergence,
                angle,
                angle_exact: exact,
                centers,
                assembly_secs: timing[0],
                solve_secs: timing[1],
                step_secs: timing[2],
                self_intersecting: m.self_intersecting,
            });
        }
        if let Some(dir) = self.out {
            let every = self.cfg.output.snapshot_every;
            if every > 0 && (step % every == 0 || last) {
                write_snapshot(&dir.join("snapshots").join(format!("step_{step:06}.csv")), x)?;
            }
        }
        if last {
            self.summary.final_perimeter = m.perimeter;
            self.summary.final_ref = x.node(0);
        }
        Ok(())
    }

    /// On error, writes the rows gathered so far to `series.csv` before
    /// passing the error on.
    fn bail(&self, res: Result<()>) -> Result<()> {
        if let (Err(_), Some(dir)) = (&res, self.out) {
            let _ = self.record.write_csv(&dir.join("series.csv"));
        }
        res
    }

    fn finish(mut self, total: f64, final_x: StructureState) -> RunOutput {
        self.summary.total_secs = total;
        self.summary.median_step_secs = median(&self.record.step_times(10)).unwrap_or(0.0);
        RunOutput {
            record: self.record,
            summary: self.summary,
            final_x,
        }
    }
}

/// Runs the full model. Rows hold the state after `step` steps; timing
/// columns hold the cost of the step that produced it.
pub fn run_fom(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutput> {
    let setup = Setup::new(cfg)?;
    let fom = FomSolver::new(&setup.grid, setup.params, setup.model.clone(), setup.background.clone(), setup.radius)?;
    let mut obs = Observer::new(cfg, &setup, out, "fom", "none")?;
    let mut st = fom.initial_state(setup.x0.clone())?;
    let start = Instant::now();
    let mut timing = [0.0; 3];
    let res = (|| {
        for k in 0..=setup.steps {
            let v = node_velocity_fom(&fom, &st)?;
            let div = if cfg.output.divergence { Some(fom.divergence_norm(&st.u)?) } else { None };
            obs.observe(k, st.t, &st.x, &v, fom.lyapunov(&st), div, timing)?;
            if k == setup.steps {
                break;
            }
            let t0 = Instant::now();
            fom.step(&mut st, setup.dt)?;
            let secs = t0.elapsed().as_secs_f64();
            timing = [0.0, secs, secs];
        }
        Ok(())
    })();
    obs.bail(res)?;
    Ok(obs.finish(start.elapsed().as_secs_f64(), st.x))
}

fn node_velocity_fom(fom: &FomSolver, st: &crate::fom::FomState) -> Result<Vec<f64>> {
    let mut v = st.b.interp(&st.u, fom.grid().h())?;
    if !fom.background().is_none() {
        let vb = fom.background().node_velocity(&st.b, st.step);
        v.iter_mut().zip(&vb).for_each(|(a, b)| *a += b);
    }
    Ok(v)
}

/// Builds the reduced solver for `cfg.model` (direct or interpolated).
pub fn rom_solver(
    cfg: &ExperimentConfig,
    setup: &Setup,
    cache_dir: Option<&Path>,
    exec: Execution,
) -> Result<(RomSolver, Option<TableInfo>)> {
    let ps = ProjectionSolver::factorize(&setup.grid)?;
    let (assembly, info) = match cfg.model {
        ModelKind::RomInterp => {
            let info = kernel_table(cfg, &ps, &setup.x0, cache_dir, exec)?;
            (Assembly::Interpolated(info.table.clone()), Some(info))
        }
        ModelKind::RomDirect => (Assembly::Direct, None),
        ModelKind::Fom => return Err(Error::Config("rom_solver called for the full model".into())),
    };
    let rom = RomSolver::with_solver(
        ps,
        setup.params,
        setup.model.clone(),
        setup.background.clone(),
        setup.radius,
        assembly,
    )?
    .with_shift(cfg.rom.shift)?
    .with_execution(exec);
    Ok((rom, info))
}

/// Runs the reduced model selected by `cfg.model`.
pub fn run_rom(cfg: &ExperimentConfig, out: Option<&Path>, cache_dir: Option<&Path>) -> Result<RunOutput> {
    let setup = Setup::new(cfg)?;
    let (rom, info) = rom_solver(cfg, &setup, cache_dir, Execution::default())?;
    let mut obs = Observer::new(cfg, &setup, out, cfg.model.name(), rom.assembly().name())?;
    if let Some(i) = &info {
        obs.summary.sampling_secs = Some(i.sampling_secs);
        obs.summary.table_from_cache = i.from_cache;
    }
    let h2 = setup.grid.h().powi(2);
    let mut st = rom.initial_state(setup.x0.clone())?;
    let start = Instant::now();
    let mut timing = [0.0; 3];
    let res = (|| {
        for k in 0..=setup.steps {
            let t0 = Instant::now();
            let coeffs = rom.assemble(&st, setup.dt)?;
            let assembly_secs = t0.elapsed().as_secs_f64();
            obs.summary.max_regularization = obs.summary.max_regularization.max(coeffs.regularization);
            let z = DVector::from_column_slice(&st.z);
            let mut v: Vec<f64> = (&coeffs.m0 * &z * h2).iter().copied().collect();
            let vb = rom.background_node_velocity(&st);
            v.iter_mut().zip(&vb).for_each(|(a, b)| *a += b);
            let div = if cfg.output.divergence {
                let u = rom.reconstruct_velocity(&st)?;
                Some(rom.projection().operators().m.mul_vec(&u).iter().fold(0.0f64, |m, x| m.max(x.abs())))
            } else {
                None
            };
            obs.observe(k, st.t, &st.x, &v, rom.lyapunov(&st, &coeffs), div, timing)?;
            if k == setup.steps {
                break;
            }
            let t1 = Instant::now();
            rom.advance(&mut st, &coeffs, setup.dt)?;
            let solve_secs = t1.elapsed().as_secs_f64();
            timing = [assembly_secs, solve_secs, assembly_secs + solve_secs];
        }
        Ok(())
    })();
    obs.bail(res)?;
    Ok(obs.finish(start.elapsed().as_secs_f64(), st.x))
}

/// Runs `cfg.model` and, when `out` is given, writes `series.csv`,
/// `summary.txt` and the snapshots there. If a step fails, the rows gathered
/// so far are still written to `series.csv` and the error is returned.
pub fn run_model(cfg: &ExperimentConfig, out: Option<&Path>, cache_dir: Option<&Path>) -> Result<RunOutput> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let res = match cfg.model {
        ModelKind::Fom => run_fom(cfg, out)?,
        _ => run_rom(cfg, out, cache_dir)?,
    };
    if let Some(dir) = out {
        res.record.write_csv(&dir.join("series.csv"))?;
        fs::write(dir.join("summary.txt"), res.summary.to_text())?;
    }
    Ok(res)
}
