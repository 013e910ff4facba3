//! Transfer functions from structure force to structure velocity.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::eulerian::DenseOperators;
use crate::fom::FluidParams;
use crate::lagrangian::SpreadOperator;

use super::coefficients::RomCoefficients;

/// `phi(t) = (h^2/rho) B^T exp[(mu/rho) t Q G] Q B` on a dense small-grid oracle.
pub fn transfer_function_fom(
    dense: &DenseOperators,
    b: &SpreadOperator,
    t: f64,
    params: &FluidParams,
    h: f64,
) -> Result<DMatrix<f64>> {
    let bd = b.to_dense();
    let e = (&dense.q * &dense.g * (params.nu() * t)).exp();
    Ok(bd.transpose() * e * &dense.q * &bd * (h * h / params.rho))
}

/// `phi_red(t) = (h^2/rho) M0 exp[t M0^{-1} M1]`.
pub fn transfer_function_rom(coeffs: &RomCoefficients, t: f64, h: f64) -> DMatrix<f64> {
    let a = coeffs.solve_m0_mat(&coeffs.m1) * t;
    &coeffs.m0 * a.exp() * (h * h / coeffs.rho)
}
