//! Pressure-Poisson factorization and the discrete projector
//! `Q = I - N (MN)^{-1} M`.
//!
//! `MN = M M^T` is the cell-centered 5-point Laplacian (with a sign flip). The
//! grid is periodic in x for both boundary kinds, so the factorization is a
//! Fourier diagonalization in x; in y it is a second Fourier diagonalization
//! (periodic) or one symmetric tridiagonal LU per x-wavenumber with Neumann
//! closure (channel). Both are computed once and reused for every solve. The
//! single constant-pressure nullspace is removed by mean-pinning the
//! right-hand side and the solution.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};

use super::grid::{BoundaryKind, StaggeredGrid};
use super::operators::{Operators, PressureField, VelocityField};

enum Factor {
    Periodic {
        fft_y: Arc<dyn Fft<f64>>,
        ifft_y: Arc<dyn Fft<f64>>,
        /// `1/lambda(kx, ky)`, zero on the nullspace mode; index `kx + nx*ky`.
        inv_eig: Vec<f64>,
    },
    Channel {
        /// Forward-elimination multipliers and inverse pivots per wavenumber,
        /// index `kx*ny + j`. The `kx = 0` slot is unused (handled by summation).
        upper: Vec<f64>,
        inv_pivot: Vec<f64>,
    },
}

/// Factorized pressure solve plus the stencils it was built from.
pub struct ProjectionSolver {
    grid: StaggeredGrid,
    ops: Operators,
    fft_x: Arc<dyn Fft<f64>>,
    ifft_x: Arc<dyn Fft<f64>>,
    factor: Factor,
}

impl std::fmt::Debug for ProjectionSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectionSolver").field("grid", &self.grid).finish_non_exhaustive()
    }
}

/// `4 sin^2(pi k / n) / h^2`, the eigenvalues of the 1D periodic second difference.
fn periodic_eig(k: usize, n: usize, h: f64) -> f64 {
    let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
    4.0 * s * s / (h * h)
}

impl ProjectionSolver {
    pub fn factorize(grid: &StaggeredGrid) -> Result<Self> {
        let (nx, ny, h) = (grid.nx(), grid.ny(), grid.h());
        let mut planner = FftPlanner::<f64>::new();
        let fft_x = planner.plan_fft_forward(nx);
        let ifft_x = planner.plan_fft_inverse(nx);
        let inv_h2 = 1.0 / (h * h);
        let factor = match grid.bc() {
            BoundaryKind::Periodic => {
                let mut inv_eig = vec![0.0; nx * ny];
                let mut zero_modes = 0;
                let scale = (0..nx)
                    .flat_map(|kx| (0..ny).map(move |ky| (kx, ky)))
                    .map(|(kx, ky)| periodic_eig(kx, nx, h) + periodic_eig(ky, ny, h))
                    .fold(0.0, f64::max);
                for ky in 0..ny {
                    for kx in 0..nx {
                        let lam = periodic_eig(kx, nx, h) + periodic_eig(ky, ny, h);
                        if lam <= 1e-12 * scale {
                            zero_modes += 1;
                        } else {
                            inv_eig[kx + nx * ky] = 1.0 / lam;
                        }
                    }
                }
                if zero_modes != 1 {
                    return Err(Error::SingularPoisson { zero_modes });
                }
                Factor::Periodic {
                    fft_y: planner.plan_fft_forward(ny),
                    ifft_y: planner.plan_fft_inverse(ny),
                    inv_eig,
                }
            }
            BoundaryKind::Channel => {
                let mut upper = vec![0.0; nx * ny];
                let mut inv_pivot = vec![0.0; nx * ny];
                for kx in 1..nx {
                    let lx = periodic_eig(kx, nx, h);
                    let base = kx * ny;
                    let mut prev_upper = 0.0;
                    for j in 0..ny {
                        let t_diag = if j == 0 || j == ny - 1 { 1.0 } else { 2.0 } * inv_h2;
                        let pivot = lx + t_diag - (-inv_h2) * prev_upper;
                        if pivot <= 0.0 {
                            return Err(Error::SingularPoisson { zero_modes: 2 });
                        }
                        inv_pivot[base + j] = 1.0 / pivot;
                        prev_upper = -inv_h2 / pivot;
                        upper[base + j] = prev_upper;
                    }
                }
                Factor::Channel { upper, inv_pivot }
            }
        };
        Ok(ProjectionSolver {
            grid: grid.clone(),
            ops: Operators::assemble(grid),
            fft_x,
            ifft_x,
            factor,
        })
    }

    pub fn grid(&self) -> &StaggeredGrid {
        &self.grid
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    /// Solves `MN p = rhs` for the mean-free `p`, after removing the mean of `rhs`.
    pub fn solve_pressure(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len("pressure right-hand side", self.grid.n_p(), rhs.len())?;
        let (nx, ny, h) = (self.grid.nx(), self.grid.ny(), self.grid.h());
        let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
        let mut buf: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v - mean, 0.0)).collect();
        // Rows are contiguous in x, so one call transforms every row.
        self.fft_x.process(&mut buf);
        match &self.factor {
            Factor::Periodic { fft_y, ifft_y, inv_eig } => {
                let mut col = vec![Complex64::new(0.0, 0.0); ny * nx];
                for j in 0..ny {
                    for i in 0..nx {
                        col[i * ny + j] = buf[i + nx * j];
                    }
                }
                fft_y.process(&mut col);
                for kx in 0..nx {
                    for ky in 0..ny {
                        col[kx * ny + ky] *= inv_eig[kx + nx * ky];
                    }
                }
                ifft_y.process(&mut col);
                let norm = 1.0 / ny as f64;
                for j in 0..ny {
                    for i in 0..nx {
                        buf[i + nx * j] = col[i * ny + j] * norm;
                    }
                }
            }
            Factor::Channel { upper, inv_pivot } => {
                let inv_h2 = 1.0 / (h * h);
                let mut col = vec![Complex64::new(0.0, 0.0); ny];
                // kx = 0: 1D Neumann problem, integrate the fluxes from the bottom wall.
                let mut acc = Complex64::new(0.0, 0.0);
                let mut p = Complex64::new(0.0, 0.0);
                col[0] = p;
                for j in 0..ny - 1 {
                    acc += buf[nx * j];
                    p -= acc / inv_h2;
                    col[j + 1] = p;
                }
                for j in 0..ny {
                    buf[nx * j] = col[j];
                }
                for kx in 1..nx {
                    let base = kx * ny;
                    // Forward sweep: y_j = (r_j + inv_h2 * y_{j-1}) / pivot_j
                    let mut prev = Complex64::new(0.0, 0.0);
                    for j in 0..ny {
                        let v = (buf[kx + nx * j] + prev * inv_h2) * inv_pivot[base + j];
                        col[j] = v;
                        prev = v;
                    }
                    // Back substitution: x_j = y_j - upper_j * x_{j+1}
                    for j in (0..ny - 1).rev() {
                        let next = col[j + 1];
                        col[j] -= next * upper[base + j];
                    }
                    for j in 0..ny {
                        buf[kx + nx * j] = col[j];
                    }
                }
            }
        }
        self.ifft_x.process(&mut buf);
        let norm = 1.0 / nx as f64;
        let mut out: Vec<f64> = buf.iter().map(|c| c.re * norm).collect();
        let mean = out.iter().sum::<f64>() / out.len() as f64;
        out.iter_mut().for_each(|v| *v -= mean);
        Ok(out)
    }

    /// `Q v = v - N (MN)^{-1} M v`, without forming `Q`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("project", self.grid.n_u(), v.len())?;
        let div = self.ops.m.mul_vec(v);
        let p = self.solve_pressure(&div)?;
        let grad = self.ops.n.mul_vec(&p);
        Ok(v.iter().zip(&grad).map(|(a, b)| a - b).collect())
    }

    /// Pressure of the semi-discrete system, `(MN)^{-1} (mu M G u + M f)`.
    pub fn recover_pressure(&self, u: &[f64], f: &[f64], mu: f64) -> Result<PressureField> {
        check_len("recover_pressure velocity", self.grid.n_u(), u.len())?;
        check_len("recover_pressure force", self.grid.n_u(), f.len())?;
        let gu = self.ops.g.mul_vec(u);
        let rhs: Vec<f64> = gu.iter().zip(f).map(|(g, f)| mu * g + f).collect();
        let rhs = self.ops.m.mul_vec(&rhs);
        Ok(PressureField(self.solve_pressure(&rhs)?))
    }
}

/// Free-function form of [`ProjectionSolver::factorize`].
pub fn projector_factorize(grid: &StaggeredGrid) -> Result<ProjectionSolver> {
    ProjectionSolver::factorize(grid)
}

/// Free-function form of [`ProjectionSolver::project`].
pub fn project(solver: &ProjectionSolver, v: &VelocityField) -> Result<VelocityField> {
    solver.project(v).map(VelocityField)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn inf_norm(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn solvers() -> Vec<ProjectionSolver> {
        [
            StaggeredGrid::new(8, 8, 0.5, BoundaryKind::Periodic).unwrap(),
            StaggeredGrid::new(12, 10, 0.25, BoundaryKind::Periodic).unwrap(),
            StaggeredGrid::new(8, 8, 0.5, BoundaryKind::Channel).unwrap(),
            StaggeredGrid::new(10, 7, 0.3, BoundaryKind::Channel).unwrap(),
        ]
        .iter()
        .map(|g| ProjectionSolver::factorize(g).unwrap())
        .collect()
    }

    #[test]
    fn poisson_solve_recovers_mean_free_pressure() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for s in solvers() {
            let mut q = random_vec(&mut rng, s.grid().n_p());
            let mean = q.iter().sum::<f64>() / q.len() as f64;
            q.iter_mut().for_each(|v| *v -= mean);
            let rhs = s.ops.m.mul_vec(&s.ops.n.mul_vec(&q));
            let p = s.solve_pressure(&rhs).unwrap();
            let err: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
            assert!(inf_norm(&err) < 1e-10, "{:?}: {}", s.grid().bc(), inf_norm(&err));
        }
    }

    #[test]
    fn constant_rhs_is_pure_nullspace() {
        for s in solvers() {
            let p = s.solve_pressure(&vec![3.0; s.grid().n_p()]).unwrap();
            assert!(inf_norm(&p) < 1e-12);
        }
    }

    #[test]
    fn projector_identities() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for s in solvers() {
            for _ in 0..5 {
                let v = random_vec(&mut rng, s.grid().n_u());
                let qv = s.project(&v).unwrap();
                let qqv = s.project(&qv).unwrap();
                let diff: Vec<f64> = qqv.iter().zip(&qv).map(|(a, b)| a - b).collect();
                assert!(inf_norm(&diff) < 1e-10);
                assert!(inf_norm(&s.ops.m.mul_vec(&qv)) < 1e-10);
                let p = random_vec(&mut rng, s.grid().n_p());
                assert!(inf_norm(&s.project(&s.ops.n.mul_vec(&p)).unwrap()) < 1e-10);
            }
        }
    }

    #[test]
    fn pressure_from_gradient_forcing() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for s in solvers() {
            let n_u = s.grid().n_u();
            let p = s.recover_pressure(&vec![0.0; n_u], &vec![0.0; n_u], 1.0).unwrap();
            assert!(inf_norm(&p) == 0.0);
            let mut q = random_vec(&mut rng, s.grid().n_p());
            let mean = q.iter().sum::<f64>() / q.len() as f64;
            q.iter_mut().for_each(|v| *v -= mean);
            let f = s.ops.n.mul_vec(&q);
            let p = s.recover_pressure(&vec![0.0; n_u], &f, 0.3).unwrap();
            let err: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
            assert!(inf_norm(&err) < 1e-10);
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        let s = &solvers()[0];
        assert!(s.project(&[1.0, 2.0]).is_err());
        assert!(s.solve_pressure(&[1.0]).is_err());
    }
}
