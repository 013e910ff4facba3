//! Reduced-order time stepping.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::eulerian::{ProjectionSolver, StaggeredGrid};
use crate::exec::Execution;
use crate::fom::solver::{ensure_finite, warn_step_size};
use crate::fom::{BackgroundFlow, FluidParams};
use crate::interp::{assemble_rom_interp, KernelTable};
use crate::lagrangian::{check_leak, ForceModel, SpreadOperator, StructureState};

use super::assembly::assemble_rom_direct;
use super::coefficients::RomCoefficients;

/// How the reduced coefficients are built each step.
#[derive(Clone, Debug)]
pub enum Assembly {
    Direct,
    Interpolated(Arc<KernelTable>),
}

impl Assembly {
    pub fn name(&self) -> &'static str {
        match self {
            Assembly::Direct => "direct",
            Assembly::Interpolated(_) => "interp",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RomState {
    pub t: f64,
    pub step: usize,
    /// Reduced coordinate, stacked like the columns of `B`.
    pub z: Vec<f64>,
    pub x: StructureState,
    pub x_prev: StructureState,
    pub b: SpreadOperator,
    pub b_prev: SpreadOperator,
}

/// Per-step report of [`RomSolver::step`].
#[derive(Clone, Debug)]
pub struct RomStepInfo {
    /// Coefficients assembled at the configuration the step started from.
    pub coeffs: RomCoefficients,
    pub assembly_secs: f64,
    pub max_dx: f64,
}

pub struct RomSolver {
    solver: ProjectionSolver,
    params: FluidParams,
    model: ForceModel,
    background: BackgroundFlow,
    radius: f64,
    assembly: Assembly,
    shift: f64,
    exec: Execution,
}

impl RomSolver {
    pub fn new(
        grid: &StaggeredGrid,
        params: FluidParams,
        model: ForceModel,
        background: BackgroundFlow,
        radius: f64,
        assembly: Assembly,
    ) -> Result<Self> {
        Self::with_solver(ProjectionSolver::factorize(grid)?, params, model, background, radius, assembly)
    }

    pub fn with_solver(
        solver: ProjectionSolver,
        params: FluidParams,
        model: ForceModel,
        background: BackgroundFlow,
        radius: f64,
        assembly: Assembly,
    ) -> Result<Self> {
        params.validate()?;
        if let Assembly::Interpolated(t) = &assembly {
            t.check_compatible(solver.grid().h(), radius, solver.grid().bc())?;
        }
        Ok(RomSolver {
            solver,
            params,
            model,
            background,
            radius,
            assembly,
            shift: 0.0,
            exec: Execution::default(),
        })
    }

    /// Relative `M0` shift applied at every assembly (see [`RomCoefficients::new`]).
    pub fn with_shift(mut self, shift: f64) -> Result<Self> {
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(Error::InvalidParameter(format!("M0 shift must be finite and non-negative, got {shift}")));
        }
        self.shift = shift;
        Ok(self)
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
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

    pub fn assembly(&self) -> &Assembly {
        &self.assembly
    }

    /// `z = 0` and `B_prev = B_now`.
    pub fn initial_state(&self, x: StructureState) -> Result<RomState> {
        self.model.validate(&x)?;
        let b = SpreadOperator::assemble(self.grid(), &x, self.radius)?;
        Ok(RomState {
            t: 0.0,
            step: 0,
            z: vec![0.0; 2 * x.n_nodes()],
            x_prev: x.clone(),
            x,
            b_prev: b.clone(),
            b,
        })
    }

    pub fn assemble(&self, state: &RomState, dt: f64) -> Result<RomCoefficients> {
        match &self.assembly {
            Assembly::Direct => assemble_rom_direct(
                &self.solver,
                &state.b,
                &state.b_prev,
                dt,
                &self.params,
                self.shift,
                self.exec,
            ),
            Assembly::Interpolated(table) => assemble_rom_interp(
                table,
                state.x.positions(),
                state.x_prev.positions(),
                dt,
                &self.params,
                self.shift,
                self.exec,
            ),
        }
    }

    /// `z += dt M0^{-1}(M1 z + M2 F)`, `X += dt h^2 (M0 z + B^T u1)`, then
    /// `B_prev <- B`, `B <- B(X)`.
    pub fn step(&self, state: &mut RomState, dt: f64) -> Result<RomStepInfo> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let h = self.grid().h();
        warn_step_size(&self.params, h, dt);
        let leak = check_leak(&state.x, h);
        if !leak.is_ok() {
            log::warn!("leak condition violated at t = {}: max gap {}", state.t, leak.max_gap());
        }
        let start = Instant::now();
        let coeffs = self.assemble(state, dt)?;
        let assembly_secs = start.elapsed().as_secs_f64();
        self.advance(state, &coeffs, dt)?;
        let max_dx = state
            .x
            .positions()
            .iter()
            .zip(state.x_prev.positions())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if max_dx > 0.25 * h {
            log::warn!("node moved {max_dx:e} > h/4 in one step at t = {}", state.t);
        }
        Ok(RomStepInfo {
            coeffs,
            assembly_secs,
            max_dx,
        })
    }

    /// The update of [`RomSolver::step`] with given coefficients.
    pub fn advance(&self, state: &mut RomState, coeffs: &RomCoefficients, dt: f64) -> Result<()> {
        let h = self.grid().h();
        let f = DVector::from_vec(self.model.evaluate(&state.x)?);
        let mut z = DVector::from_column_slice(&state.z);
        z += coeffs.rate(&z, &f) * dt;
        ensure_finite(z.as_slice(), state.t, "reduced state")?;
        let mut v: Vec<f64> = (&coeffs.m0 * &z * (h * h)).iter().copied().collect();
        if !self.background.is_none() {
            let vb = self.background.node_velocity(&state.b, state.step);
            v.iter_mut().zip(&vb).for_each(|(a, b)| *a += b);
        }
        state.z = z.as_slice().to_vec();
        state.x_prev = state.x.clone();
        state.x.advance(&v, dt);
        ensure_finite(state.x.positions(), state.t, "structure position")?;
        let b = SpreadOperator::assemble(self.grid(), &state.x, self.radius)?;
        state.b_prev = std::mem::replace(&mut state.b, b);
        state.t += dt;
        state.step += 1;
        Ok(())
    }

    /// `V_r = (h^2/rho) W(X) + 1/2 Xdot^T M0^{-1} Xdot` with `Xdot = h^2 M0 z`,
    /// evaluated as `(h^2/rho) W + 1/2 h^4 z^T M0 z`.
    pub fn lyapunov(&self, state: &RomState, coeffs: &RomCoefficients) -> f64 {
        let h2 = self.grid().h().powi(2);
        let z = DVector::from_column_slice(&state.z);
        h2 / self.params.rho * self.model.energy(&state.x) + 0.5 * h2 * h2 * z.dot(&(&coeffs.m0 * &z))
    }

    /// Exact time derivative of [`RomSolver::lyapunov`], `(mu/rho) h^4 z^T K1 z`.
    pub fn lyapunov_rate(&self, state: &RomState, coeffs: &RomCoefficients) -> f64 {
        let h2 = self.grid().h().powi(2);
        let z = DVector::from_column_slice(&state.z);
        self.params.nu() * h2 * h2 * z.dot(&(&coeffs.k1 * &z))
    }

    /// Fluid velocity carried by the reduced state, `Q B z`.
    pub fn reconstruct_velocity(&self, state: &RomState) -> Result<Vec<f64>> {
        self.solver.project(&state.b.spread(&state.z)?)
    }

    /// Structure velocity `h^2 B^T u1` from the background alone.
    pub fn background_node_velocity(&self, state: &RomState) -> Vec<f64> {
        self.background.node_velocity(&state.b, state.step)
    }

    pub fn background(&self) -> &BackgroundFlow {
        &self.background
    }
}

/// Free-function form of [`RomSolver::step`].
pub fn step_rom(solver: &RomSolver, mut state: RomState, dt: f64) -> Result<RomState> {
    solver.step(&mut state, dt)?;
    Ok(state)
}
