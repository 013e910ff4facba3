//! Kernel tables: reduced-coefficient entries of a node pair sampled as
//! functions of the pair displacement `X_I - X_J`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::{BoundaryKind, ProjectionSolver, StaggeredGrid};
use crate::exec::Execution;
use crate::lagrangian::spread::kernel_dot;
use crate::lagrangian::SpreadOperator;

/// The eight sampled 2x2 blocks: `K0_ab` for `B^T Q B`, `K1_ab` for `B^T Q G Q B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    K0xx,
    K0xy,
    K0yx,
    K0yy,
    K1xx,
    K1xy,
    K1yx,
    K1yy,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::K0xx,
        Family::K0xy,
        Family::K0yx,
        Family::K0yy,
        Family::K1xx,
        Family::K1xy,
        Family::K1yx,
        Family::K1yy,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `K0` (0) or `K1` (1) family with row and column components.
    pub fn of(order: usize, a: usize, b: usize) -> Family {
        Family::ALL[4 * order + 2 * a + b]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    pub(crate) h: f64,
    pub(crate) r: f64,
    pub(crate) bc: BoundaryKind,
    pub(crate) extent: f64,
    pub(crate) spacing: f64,
    pub(crate) n_side: usize,
    /// One row-major `n_side x n_side` array per family, index `ix + n_side*iy`.
    pub(crate) values: Vec<Vec<f64>>,
}

/// `round(2 extent / spacing) + 1`.
pub fn samples_per_side(extent: f64, spacing: f64) -> usize {
    (2.0 * extent / spacing).round() as usize + 1
}

/// Default half-width of the sampled displacement square: the structure
/// diameter plus `4h`, rounded up to a whole number of sample spacings.
pub fn default_extent(diameter: f64, h: f64, spacing: f64) -> f64 {
    ((diameter + 4.0 * h) / spacing).ceil() * spacing
}

impl KernelTable {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    /// Displacement of sample node `(ix, iy)`.
    pub fn node_delta(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            -self.extent + ix as f64 * self.spacing,
            -self.extent + iy as f64 * self.spacing,
        ]
    }

    pub fn value_at_node(&self, family: Family, ix: usize, iy: usize) -> f64 {
        self.values[family.index()][ix + self.n_side * iy]
    }

    /// Checks that this table was sampled for the given discretization.
    pub fn check_compatible(&self, h: f64, r: f64, bc: BoundaryKind) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if close(self.h, h) && close(self.r, r) && self.bc == bc {
            Ok(())
        } else {
            Err(Error::TableMismatch(format!(
                "table has h = {}, r = {}, bc = {}; run has h = {h}, r = {r}, bc = {bc}",
                self.h, self.r, self.bc
            )))
        }
    }

    fn locate(&self, d: f64) -> Option<(usize, f64)> {
        let u = (d + self.extent) / self.spacing;
        let last = (self.n_side - 1) as f64;
        let u = if (u - u.round()).abs() < 1e-9 { u.round() } else { u };
        if !(0.0..=last).contains(&u) {
            return None;
        }
        let i = (u.floor() as usize).min(self.n_side - 2);
        Some((i, u - i as f64))
    }

    /// Bilinear interpolation of `family` at displacement `delta`.
    pub fn eval(&self, family: Family, delta: [f64; 2]) -> Result<f64> {
        let mut out = [0.0];
        self.eval_many(&[family], delta, &mut out)?;
        Ok(out[0])
    }

    /// Evaluates several families at one displacement, sharing the lookup.
    pub fn eval_many(&self, families: &[Family], delta: [f64; 2], out: &mut [f64]) -> Result<()> {
        let (Some((ix, fx)), Some((iy, fy))) = (self.locate(delta[0]), self.locate(delta[1])) else {
            return Err(Error::TableCoverage {
                dx: delta[0],
                dy: delta[1],
                extent: self.extent,
            });
        };
        let n = self.n_side;
        let k = ix + n * iy;
        let w = [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy];
        for (o, f) in out.iter_mut().zip(families) {
            let v = &self.values[f.index()];
            *o = w[0] * v[k] + w[1] * v[k + 1] + w[2] * v[k + n] + w[3] * v[k + n + 1];
        }
        Ok(())
    }
}

/// Probe offsets from the domain center in units of `h`, with weights, for
/// one axis. Periodic axes fold `-1/2` onto `+1/2` (a whole-cell shift).
fn probe_offsets(periodic: bool) -> &'static [(f64, f64)] {
    if periodic {
        &[(0.0, 0.5), (0.5, 0.5)]
    } else {
        &[(-0.5, 0.25), (0.0, 0.5), (0.5, 0.25)]
    }
}

type Probe = ([f64; 2], f64, Vec<Vec<f64>>);

/// Projected spread columns (`Q b`, `Q G Q b` per component) of the probe set
/// around `base`, with trapezoid weights.
fn probe_fields(solver: &ProjectionSolver, base: [f64; 2], r: f64) -> Result<Vec<Probe>> {
    let grid = solver.grid();
    let h = grid.h();
    let g = &solver.operators().g;
    let mut probes = Vec::new();
    for &(ox, wx) in probe_offsets(true) {
        for &(oy, wy) in probe_offsets(grid.bc() == BoundaryKind::Periodic) {
            let p = [base[0] + ox * h, base[1] + oy * h];
            let b = SpreadOperator::assemble_positions(grid, &p, r)?;
            let mut fields = Vec::with_capacity(4);
            for comp in 0..2 {
                let y = solver.project(&b.column_dense(comp))?;
                let z = solver.project(&g.mul_vec(&y))?;
                fields.push(y);
                fields.push(z);
            }
            probes.push((p, wx * wy, fields));
        }
    }
    Ok(probes)
}

/// Probe-averaged entries of all eight families at displacement `d`.
fn sample_at(grid: &StaggeredGrid, probes: &[Probe], r: f64, d: [f64; 2]) -> [f64; 8] {
    let mut v = [0.0; 8];
    let mut dots = [0.0; 4];
    for (p, w, fields) in probes {
        let fields: Vec<&[f64]> = fields.iter().map(|f| f.as_slice()).collect();
        for a in 0..2 {
            kernel_dot(grid, [p[0] + d[0], p[1] + d[1]], r, a, &fields, &mut dots);
            for b in 0..2 {
                v[Family::of(0, a, b).index()] += w * dots[2 * b];
                v[Family::of(1, a, b).index()] += w * dots[2 * b + 1];
            }
        }
    }
    v
}

/// Samples all eight families on `[-extent, extent]^2` with the given spacing.
///
/// The kernel entries of a node pair depend slightly on where the pair sits
/// relative to the grid, so each sample is the cell average (trapezoid rule
/// over the probe offsets) of `b_a(P + delta)^T Q b_b(P)` and of the same with
/// `Q G Q`. In a periodic domain `P` is the domain center; in a channel the
/// pair is centered on the channel's center line, `P_y = y_c - delta_y / 2`,
/// so the table stays continuous across `delta_y = 0`. Either way the probe
/// set is mirror symmetric, which makes the averaged table even in each
/// displacement component for `K_xx`, `K_yy` and odd for the cross families;
/// only one quadrant is computed.
///
/// `extent` is rounded up to a whole number of spacings.
pub fn sample_kernel_tables(
    solver: &ProjectionSolver,
    r: f64,
    extent: f64,
    spacing: f64,
    exec: Execution,
) -> Result<KernelTable> {
    let grid = solver.grid();
    let h = grid.h();
    if !(spacing > 0.0 && spacing <= 0.5 * h + 1e-15) {
        return Err(Error::InvalidParameter(format!(
            "table spacing must lie in (0, h/2], got {spacing} with h = {h}"
        )));
    }
    if !(extent > 0.0) {
        return Err(Error::InvalidParameter(format!("table extent must be positive, got {extent}")));
    }
    let extent = (extent / spacing - 1e-9).ceil() * spacing;
    let channel = grid.bc() == BoundaryKind::Channel;
    let margin_x = extent + r + h;
    let margin_y = if channel { 0.5 * extent + r + h } else { margin_x };
    if margin_x >= 0.5 * grid.lx() || margin_y >= 0.5 * grid.ly() {
        return Err(Error::InvalidParameter(format!(
            "table extent {extent} plus kernel radius and probe offset exceeds the half-domain {}x{}",
            0.5 * grid.lx(),
            0.5 * grid.ly()
        )));
    }
    let center = grid.center();
    let shared = if channel { None } else { Some(probe_fields(solver, center, r)?) };
    let n_side = samples_per_side(extent, spacing);
    let mid = (n_side - 1) / 2;
    let quarter = n_side - mid;
    let mut table = KernelTable {
        h,
        r,
        bc: grid.bc(),
        extent,
        spacing,
        n_side,
        values: vec![vec![0.0; n_side * n_side]; 8],
    };
    let rows = exec.try_map(quarter, |qy| -> Result<Vec<[f64; 8]>> {
        let dy = table.node_delta(mid, mid + qy)[1];
        let own;
        let probes = match &shared {
            Some(p) => p,
            None => {
                own = probe_fields(solver, [center[0], center[1] - 0.5 * dy], r)?;
                &own
            }
        };
        Ok((0..quarter)
            .map(|qx| sample_at(grid, probes, r, table.node_delta(mid + qx, mid + qy)))
            .collect())
    })?;
    for iy in 0..n_side {
        for ix in 0..n_side {
            let (qx, qy) = (ix.abs_diff(mid), iy.abs_diff(mid));
            let flip = (ix < mid) != (iy < mid);
            let v = &rows[qy][qx];
            for (f, val) in v.iter().enumerate() {
                let cross = f % 4 == 1 || f % 4 == 2;
                table.values[f][ix + n_side * iy] = if cross && flip { -val } else { *val };
            }
        }
    }
    Ok(table)
}

/// Free-function form of [`KernelTable::eval`].
pub fn eval_table(table: &KernelTable, family: Family, delta: [f64; 2]) -> Result<f64> {
    table.eval(family, delta)
}
