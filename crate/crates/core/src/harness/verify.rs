//! Quick invariant checks on small grids, behind `ibrom verify`.

use crate::diagnostics::{jeffery_angle, shape_metrics};
use crate::error::Result;
use crate::eulerian::{materialize_dense, BoundaryKind, ProjectionSolver, StaggeredGrid};
use crate::exec::Execution;
use crate::fom::FluidParams;
use crate::lagrangian::{SpreadOperator, StructureState};
use crate::rom::{assemble_rom_direct, transfer_function_fom, transfer_function_rom};

use super::config::{ExperimentConfig, ModelKind};
use super::run::run_model;

/// Outcome of one check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Deterministic pseudo-random values in `[-1, 1)`.
fn lcg(seed: u64, n: usize) -> Vec<f64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

fn projector(bc: BoundaryKind) -> Result<Check> {
    let grid = StaggeredGrid::new(16, 16, 1.0 / 16.0, bc)?;
    let solver = ProjectionSolver::factorize(&grid)?;
    let ops = solver.operators();
    let mut worst = 0.0f64;
    for k in 0..10 {
        let qv = solver.project(&lcg(k, grid.n_u()))?;
        let qqv = solver.project(&qv)?;
        let d: Vec<f64> = qqv.iter().zip(&qv).map(|(a, b)| a - b).collect();
        let qnp = solver.project(&ops.n.mul_vec(&lcg(100 + k, grid.n_p())))?;
        worst = worst.max(inf(&d)).max(inf(&ops.m.mul_vec(&qv))).max(inf(&qnp));
    }
    let name = match bc {
        BoundaryKind::Periodic => "projector identities (periodic)",
        BoundaryKind::Channel => "projector identities (channel)",
    };
    Ok(check(name, worst < 1e-10, format!("max residual {worst:.1e}")))
}

fn moment_matching() -> Result<Check> {
    let grid = StaggeredGrid::new(8, 8, 0.5, BoundaryKind::Periodic)?;
    let h = grid.h();
    let params = FluidParams { rho: 1.0, mu: 0.1 };
    let x = StructureState::rotated_ellipse([2.0, 2.0], 1.0, 0.7, 0.3, 4)?;
    let b = SpreadOperator::assemble(&grid, &x, 2.0 * h)?;
    let solver = ProjectionSolver::factorize(&grid)?;
    let coeffs = assemble_rom_direct(&solver, &b, &b, 0.01, &params, 0.0, Execution::Sequential)?;
    let dense = materialize_dense(&grid)?;
    let full = transfer_function_fom(&dense, &b, 0.0, &params, h)?;
    let red = transfer_function_rom(&coeffs, 0.0, h);
    let err = (full - red).amax();
    Ok(check("transfer function at t = 0", err < 1e-10, format!("max difference {err:.1e}")))
}

fn membrane_runs() -> Result<Vec<Check>> {
    let mut cfg = ExperimentConfig::membrane(0.25);
    cfg.time.steps = 40;
    cfg.output.divergence = true;
    let mut out = Vec::new();
    let fom = run_model(&cfg, None, None)?;
    let again = run_model(&cfg, None, None)?;
    let same = fom
        .record
        .rows
        .iter()
        .zip(&again.record.rows)
        .all(|(a, b)| a.ref_x == b.ref_x && a.ref_y == b.ref_y && a.perimeter == b.perimeter && a.flux == b.flux);
    out.push(check("deterministic rerun", same, format!("{} rows compared", fom.record.rows.len())));
    cfg.model = ModelKind::RomInterp;
    let rom = run_model(&cfg, None, None)?;
    let div = rom.summary.max_divergence.unwrap_or(f64::NAN);
    out.push(check("reduced velocity divergence", div < 1e-9, format!("max |M Q B z| {div:.1e}")));
    let sw = fom
        .record
        .rows
        .iter()
        .chain(&rom.record.rows)
        .map(|r| r.swelling)
        .fold(0.0f64, f64::max);
    out.push(check("isoperimetric bound", sw <= 1.0 + 1e-9, format!("max Sw {sw:.6}")));
    Ok(out)
}

fn jeffery_branch() -> Check {
    let (s1, s2) = (0.2, 0.3);
    let period = crate::diagnostics::jeffery_period(s1, s2, 1.0);
    let n = 2000;
    let mut prev = jeffery_angle(0.0, s1, s2, 1.0);
    let mut jump = 0.0f64;
    for k in 1..=n {
        let a = jeffery_angle(2.0 * period * k as f64 / n as f64, s1, s2, 1.0);
        jump = jump.max((a - prev).abs());
        prev = a;
    }
    check(
        "Jeffery angle continuity",
        jump < std::f64::consts::FRAC_PI_2,
        format!("max step {jump:.3} rad"),
    )
}

fn circle_metrics() -> Result<Check> {
    let x = StructureState::ellipse([0.0, 0.0], 1.0, 1.0, 256)?;
    let m = shape_metrics(&x, 0, 2.0 * std::f64::consts::PI);
    let ok = (m.perimeter - 2.0 * std::f64::consts::PI).abs() < 2e-4 && (m.swelling - 1.0).abs() < 1e-3;
    Ok(check(
        "circle shape metrics",
        ok,
        format!("p {:.6}, Sw {:.6}", m.perimeter, m.swelling),
    ))
}

/// Runs every check. Errors from the solvers are returned, failed checks are not.
pub fn run_checks() -> Result<Vec<Check>> {
    let mut out = vec![
        projector(BoundaryKind::Periodic)?,
        projector(BoundaryKind::Channel)?,
        moment_matching()?,
        jeffery_branch(),
        circle_metrics()?,
    ];
    out.extend(membrane_runs()?);
    Ok(out)
}
