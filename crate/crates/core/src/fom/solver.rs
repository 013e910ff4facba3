//! Forward-Euler integration of the projected Stokes system coupled to the
//! structure.

use crate::error::{check_len, Error, Result};
use crate::eulerian::{PressureField, ProjectionSolver, StaggeredGrid, VelocityField};
use crate::lagrangian::{check_leak, ForceModel, SpreadOperator, StructureState};

use super::background::BackgroundFlow;
use super::params::FluidParams;

#[derive(Clone, Debug)]
pub struct FomState {
    pub t: f64,
    pub step: usize,
    /// Forced fluid component `u0`.
    pub u: VelocityField,
    pub x: StructureState,
    pub b: SpreadOperator,
}

/// Per-step diagnostics returned by [`FomSolver::step`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    /// Largest node displacement of the step.
    pub max_dx: f64,
}

pub struct FomSolver {
    solver: ProjectionSolver,
    params: FluidParams,
    model: ForceModel,
    background: BackgroundFlow,
    radius: f64,
}

pub(crate) fn ensure_finite(v: &[f64], t: f64, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t, what })
    }
}

pub(crate) fn warn_step_size(params: &FluidParams, h: f64, dt: f64) {
    let limit = params.diffusive_dt_limit(h);
    if dt > limit {
        log::warn!("dt = {dt:e} exceeds the explicit viscous guard {limit:e}");
    }
}

impl FomSolver {
    pub fn new(
        grid: &StaggeredGrid,
        params: FluidParams,
        model: ForceModel,
        background: BackgroundFlow,
        radius: f64,
    ) -> Result<Self> {
        params.validate()?;
        Ok(FomSolver {
            solver: ProjectionSolver::factorize(grid)?,
            params,
            model,
            background,
            radius,
        })
    }

    pub fn grid(&self) -> &StaggeredGrid {
        self.solver.grid()
    }

    pub fn projection(&self) -> &ProjectionSolver {
        &self.solver
    }

    pub fn params(&self) -> &FluidParams {
        &self.params
    }

    pub fn model(&self) -> &ForceModel {
        &self.model
    }

    pub fn background(&self) -> &BackgroundFlow {
        &self.background
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Fluid at rest around the structure `x`.
    pub fn initial_state(&self, x: StructureState) -> Result<FomState> {
        self.model.validate(&x)?;
        let b = SpreadOperator::assemble(self.grid(), &x, self.radius)?;
        Ok(FomState {
            t: 0.0,
            step: 0,
            u: VelocityField::zeros(self.grid()),
            x,
            b,
        })
    }

    /// `u += dt Q((mu/rho) G u + B F / rho)`, then `X += dt h^2 B^T (u + u1)`
    /// with `B` frozen, then `B` is rebuilt at the new positions.
    pub fn step(&self, state: &mut FomState, dt: f64) -> Result<StepInfo> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let h = self.grid().h();
        warn_step_size(&self.params, h, dt);
        let leak = check_leak(&state.x, h);
        if !leak.is_ok() {
            log::warn!("leak condition violated at t = {}: max gap {}", state.t, leak.max_gap());
        }
        let f = self.model.evaluate(&state.x)?;
        let mut rhs = self.solver.operators().g.mul_vec(&state.u);
        let bf = state.b.spread(&f)?;
        let (nu, inv_rho) = (self.params.nu(), 1.0 / self.params.rho);
        rhs.iter_mut().zip(&bf).for_each(|(r, s)| *r = nu * *r + inv_rho * s);
        let du = self.solver.project(&rhs)?;
        state.u.iter_mut().zip(&du).for_each(|(u, d)| *u += dt * d);
        ensure_finite(&state.u, state.t, "fluid velocity")?;

        let mut v = state.b.interp(&state.u, h)?;
        if !self.background.is_none() {
            let vb = self.background.node_velocity(&state.b, state.step);
            v.iter_mut().zip(&vb).for_each(|(a, b)| *a += b);
        }
        state.x.advance(&v, dt);
        ensure_finite(state.x.positions(), state.t, "structure position")?;
        let max_dx = dt * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max_dx > 0.25 * h {
            log::warn!("node moved {max_dx:e} > h/4 in one step at t = {}", state.t);
        }
        state.b = SpreadOperator::assemble(self.grid(), &state.x, self.radius)?;
        state.t += dt;
        state.step += 1;
        Ok(StepInfo { max_dx })
    }

    /// `V = 1/2 u^T u + W(X) / (h^2 rho)`; `Qu = u` for the divergence-free state.
    pub fn lyapunov(&self, state: &FomState) -> f64 {
        let h = self.grid().h();
        let kinetic = 0.5 * state.u.iter().map(|v| v * v).sum::<f64>();
        kinetic + self.model.energy(&state.x) / (h * h * self.params.rho)
    }

    /// Exact time derivative of [`FomSolver::lyapunov`] along the
    /// semi-discrete flow, `(mu/rho) u^T G u`.
    pub fn lyapunov_rate(&self, state: &FomState) -> f64 {
        let gu = self.solver.operators().g.mul_vec(&state.u);
        self.params.nu() * gu.iter().zip(state.u.iter()).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Pressure of the current state.
    pub fn pressure(&self, state: &FomState) -> Result<PressureField> {
        let f = self.model.evaluate(&state.x)?;
        let bf = state.b.spread(&f)?;
        self.solver.recover_pressure(&state.u, &bf, self.params.mu)
    }

    /// `||M u||_inf`.
    pub fn divergence_norm(&self, u: &[f64]) -> Result<f64> {
        check_len("divergence", self.grid().n_u(), u.len())?;
        Ok(self.solver.operators().m.mul_vec(u).iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Total velocity `u0 + u1` at the state's step.
    pub fn total_velocity(&self, state: &FomState) -> VelocityField {
        let mut u = state.u.clone();
        if !self.background.is_none() {
            let ub = self.background.field(self.grid(), state.step);
            u.iter_mut().zip(ub.iter()).for_each(|(a, b)| *a += b);
        }
        u
    }
}

/// Free-function form of [`FomSolver::step`].
pub fn step_fom(solver: &FomSolver, mut state: FomState, dt: f64) -> Result<FomState> {
    solver.step(&mut state, dt)?;
    Ok(state)
}
