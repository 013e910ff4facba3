//! Reduced coefficient matrices and the factorization of `M0`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::fom::FluidParams;

/// `M0 = B^T Q B`, `K1 = B^T Q G Q B`, `C = B_now^T Q B_prev` and
/// `M1 = (mu/rho) K1 - M0/dt + C/dt`; `M2 = M0 / rho` is implied.
///
/// `M0` is singular once nodes are packed closer than about `h/2`. A shift
/// `lambda I` can be added to both `M0` and `C`, which leaves `M1` unchanged
/// and keeps the reduced Lyapunov identity intact with the shifted `M0`.
#[derive(Clone, Debug)]
pub struct RomCoefficients {
    pub m0: DMatrix<f64>,
    pub k1: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub m1: DMatrix<f64>,
    pub rho: f64,
    /// Shift `lambda` added to the diagonals of `M0` and `C` (zero if none).
    pub regularization: f64,
    factor: Cholesky<f64, Dyn>,
}

fn closest_pair(positions: &[f64]) -> (usize, usize, f64) {
    let n = positions.len() / 2;
    let mut best = (0, 0, f64::INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let d = (positions[i] - positions[j]).hypot(positions[n + i] - positions[n + j]);
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    best
}

fn add_diagonal(m: &mut DMatrix<f64>, lambda: f64) {
    for k in 0..m.nrows().min(m.ncols()) {
        m[(k, k)] += lambda;
    }
}

impl RomCoefficients {
    /// Builds `M1` and factorizes `M0`.
    ///
    /// `shift` is relative to the mean diagonal of `M0`: `lambda = shift *
    /// trace(M0) / n`. With `shift = 0` a tiny `1e-10` relative shift is
    /// still applied if the Cholesky factorization fails. `positions`
    /// (stacked) only feed the error report when `M0` cannot be factorized.
    pub fn new(
        mut m0: DMatrix<f64>,
        k1: DMatrix<f64>,
        mut c: DMatrix<f64>,
        dt: f64,
        params: &FluidParams,
        positions: &[f64],
        shift: f64,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(Error::InvalidParameter(format!("M0 shift must be finite and non-negative, got {shift}")));
        }
        let nu = params.nu();
        let m1 = &k1 * nu + (&c - &m0) / dt;
        let n = m0.nrows();
        let mean_diag = m0.trace() / n.max(1) as f64;
        let mut regularization = shift * mean_diag;
        if regularization > 0.0 {
            add_diagonal(&mut m0, regularization);
            add_diagonal(&mut c, regularization);
        }
        let factor = match Cholesky::new(m0.clone()) {
            Some(f) => f,
            None => {
                let lambda = 1e-10 * mean_diag;
                let shifted = &m0 + DMatrix::identity(n, n) * lambda;
                match (lambda > 0.0).then(|| Cholesky::new(shifted)).flatten() {
                    Some(f) => {
                        log::debug!("M0 regularized with lambda = {lambda:e}");
                        add_diagonal(&mut m0, lambda);
                        add_diagonal(&mut c, lambda);
                        regularization += lambda;
                        f
                    }
                    None => {
                        let (i, j, distance) = closest_pair(positions);
                        return Err(Error::SingularReduced { i, j, distance });
                    }
                }
            }
        };
        Ok(RomCoefficients {
            m0,
            k1,
            c,
            m1,
            rho: params.rho,
            regularization,
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.m0.nrows()
    }

    /// `M2 = M0 / rho`.
    pub fn m2(&self) -> DMatrix<f64> {
        &self.m0 / self.rho
    }

    /// `M0^{-1} v` (regularized if needed).
    pub fn solve_m0(&self, v: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(v)
    }

    pub fn solve_m0_mat(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        self.factor.solve(v)
    }

    /// Reduced state derivative `M0^{-1} (M1 z + M2 F)`, using `M0^{-1} M2 = I / rho`.
    pub fn rate(&self, z: &DVector<f64>, f: &DVector<f64>) -> DVector<f64> {
        self.solve_m0(&(&self.m1 * z)) + f / self.rho
    }
}
