use nalgebra::DVector;

use crate::error::{check_len, Result};
use crate::lagrangian::{ForceModel, StructureState};
use crate::rom::RomCoefficients;

/// `V = 1/2 u^T u + W(X) / (h^2 rho)` for a divergence-free `u` (so `Qu = u`).
pub fn lyapunov_fom(u: &[f64], x: &StructureState, model: &ForceModel, h: f64, rho: f64) -> f64 {
    0.5 * u.iter().map(|v| v * v).sum::<f64>() + model.energy(x) / (h * h * rho)
}

/// `V_r = (h^2/rho) W(X) + 1/2 Xdot^T M0^{-1} Xdot`.
pub fn lyapunov_rom(
    x: &StructureState,
    xdot: &[f64],
    coeffs: &RomCoefficients,
    model: &ForceModel,
    h: f64,
    rho: f64,
) -> Result<f64> {
    check_len("lyapunov_rom velocity", coeffs.dim(), xdot.len())?;
    let v = DVector::from_column_slice(xdot);
    let w = coeffs.solve_m0(&v);
    Ok(h * h / rho * model.energy(x) + 0.5 * v.dot(&w))
}
