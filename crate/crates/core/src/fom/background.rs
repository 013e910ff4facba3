//! Force-free background flows `u1` superposed on the forced fluid component.
//!
//! All supported flows are unidirectional, `u1 = (U(y), 0)`, so they are
//! stored as one value per x-face row and are discretely divergence-free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::{BoundaryKind, StaggeredGrid, VelocityField};
use crate::lagrangian::SpreadOperator;

use super::params::FluidParams;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BackgroundKind {
    #[default]
    None,
    /// `U = gamma_dot (y - y_c)`.
    Shear { gamma_dot: f64 },
    /// `U = u0 [1 - ((y - y_c)/half_width)^2]`.
    Poiseuille { u0: f64, half_width: f64 },
    /// Channel flow started from rest by the constant body force that drives
    /// the Poiseuille profile `(u0, half_width)`.
    ChannelTransient { u0: f64, half_width: f64 },
}

#[derive(Clone, Debug)]
pub struct BackgroundFlow {
    kind: BackgroundKind,
    nx: usize,
    h: f64,
    steady: Vec<f64>,
    /// Row profiles of the transient flow, one per time step.
    history: Vec<Vec<f64>>,
}

fn row_y(grid: &StaggeredGrid, j: usize) -> f64 {
    (j as f64 + 0.5) * grid.h()
}

impl BackgroundFlow {
    pub fn none(grid: &StaggeredGrid) -> Self {
        BackgroundFlow {
            kind: BackgroundKind::None,
            nx: grid.nx(),
            h: grid.h(),
            steady: vec![0.0; grid.ny()],
            history: Vec::new(),
        }
    }

    /// Builds the flow. `dt` and `n_steps` are only used by the transient kind,
    /// which is integrated once here and replayed by step index.
    pub fn new(
        kind: BackgroundKind,
        grid: &StaggeredGrid,
        params: &FluidParams,
        dt: f64,
        n_steps: usize,
    ) -> Result<Self> {
        let yc = 0.5 * grid.ly();
        let mut flow = Self::none(grid);
        flow.kind = kind.clone();
        match kind {
            BackgroundKind::None => {}
            BackgroundKind::Shear { gamma_dot } => {
                if grid.bc() == BoundaryKind::Channel {
                    return Err(Error::Unsupported("shear background on a channel grid".into()));
                }
                flow.steady = (0..grid.ny()).map(|j| gamma_dot * (row_y(grid, j) - yc)).collect();
            }
            BackgroundKind::Poiseuille { u0, half_width } => {
                if !(half_width > 0.0) {
                    return Err(Error::InvalidParameter(format!("half_width must be positive, got {half_width}")));
                }
                flow.steady = (0..grid.ny())
                    .map(|j| {
                        let s = (row_y(grid, j) - yc) / half_width;
                        u0 * (1.0 - s * s)
                    })
                    .collect();
            }
            BackgroundKind::ChannelTransient { u0, half_width } => {
                if grid.bc() != BoundaryKind::Channel {
                    return Err(Error::Unsupported("transient channel flow needs a channel grid".into()));
                }
                if !(half_width > 0.0 && dt > 0.0) {
                    return Err(Error::InvalidParameter("transient channel flow needs half_width > 0 and dt > 0".into()));
                }
                flow.history = transient_profiles(grid, params, u0, half_width, dt, n_steps);
            }
        }
        Ok(flow)
    }

    pub fn kind(&self) -> &BackgroundKind {
        &self.kind
    }

    pub fn is_none(&self) -> bool {
        self.kind == BackgroundKind::None
    }

    /// `U(y_j)` on the x-face rows at step `step`.
    pub fn profile(&self, step: usize) -> &[f64] {
        if self.history.is_empty() {
            &self.steady
        } else {
            &self.history[step.min(self.history.len() - 1)]
        }
    }

    pub fn field(&self, grid: &StaggeredGrid, step: usize) -> VelocityField {
        let prof = self.profile(step);
        let mut u = VelocityField::zeros(grid);
        for (k, v) in u.iter_mut().enumerate().take(grid.n_ux()) {
            *v = prof[k / grid.nx()];
        }
        u
    }

    /// Node velocities `h^2 B^T u1` without forming `u1`.
    pub fn node_velocity(&self, b: &SpreadOperator, step: usize) -> Vec<f64> {
        let n = b.n_nodes();
        let mut out = vec![0.0; 2 * n];
        if self.is_none() {
            return out;
        }
        let prof = self.profile(step);
        let h2 = self.h * self.h;
        for (c, o) in out.iter_mut().enumerate().take(n) {
            let (rows, vals) = b.column(c);
            *o = h2 * rows.iter().zip(vals).map(|(&r, &w)| w * prof[r / self.nx]).sum::<f64>();
        }
        out
    }
}

/// Explicit integration of `U_t = (mu/rho) U_yy + g` from rest with
/// `g = 2 mu u0 / (rho D^2)`, using the same wall reflection as the x-velocity
/// Laplacian. Sub-steps keep the 1D update stable for any outer `dt`.
fn transient_profiles(
    grid: &StaggeredGrid,
    params: &FluidParams,
    u0: f64,
    half_width: f64,
    dt: f64,
    n_steps: usize,
) -> Vec<Vec<f64>> {
    let ny = grid.ny();
    let nu = params.nu();
    let h2 = grid.h() * grid.h();
    let g = 2.0 * params.mu * u0 / (params.rho * half_width * half_width);
    let sub = ((dt * nu / (0.25 * h2)).ceil() as usize).max(1);
    let tau = dt / sub as f64;
    let mut u = vec![0.0; ny];
    let mut next = vec![0.0; ny];
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(u.clone());
    for _ in 0..n_steps {
        for _ in 0..sub {
            for j in 0..ny {
                let down = if j == 0 { -u[0] } else { u[j - 1] };
                let up = if j + 1 == ny { -u[ny - 1] } else { u[j + 1] };
                next[j] = u[j] + tau * (nu * (up - 2.0 * u[j] + down) / h2 + g);
            }
            std::mem::swap(&mut u, &mut next);
        }
        out.push(u.clone());
    }
    out
}

/// Background velocity field at step `step`.
pub fn background_flow(flow: &BackgroundFlow, grid: &StaggeredGrid, step: usize) -> VelocityField {
    flow.field(grid, step)
}
