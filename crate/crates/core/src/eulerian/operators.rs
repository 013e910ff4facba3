use std::ops::{Deref, DerefMut};

use crate::error::{check_len, Result};
use crate::sparse::CsrMatrix;

use super::grid::{BoundaryKind, StaggeredGrid};

/// Discrete velocity (or body-force) field in the grid's face layout.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField(pub Vec<f64>);

/// Pressure at cell centers.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureField(pub Vec<f64>);

macro_rules! vec_newtype {
    ($t:ty) => {
        impl Deref for $t {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }
        impl DerefMut for $t {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }
        impl From<Vec<f64>> for $t {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }
    };
}
vec_newtype!(VelocityField);
vec_newtype!(PressureField);

impl VelocityField {
    pub fn zeros(grid: &StaggeredGrid) -> Self {
        VelocityField(vec![0.0; grid.n_u()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscreteOperator {
    /// Vector Laplacian `G` (n_u x n_u).
    Laplacian,
    /// Gradient-type operator `N = M^T` (n_u x n_p).
    Gradient,
    /// Divergence `M` (n_p x n_u).
    Divergence,
}

/// Assembled stencils of one grid.
///
/// `M` is the centered divergence. `N` is taken as `M^T` exactly, which is the
/// negative of the centered pressure gradient; the pressure unknown of the
/// semi-discrete system therefore carries the opposite sign of the physical
/// pressure while `Q = I - N (MN)^{-1} M` is unaffected.
#[derive(Clone, Debug)]
pub struct Operators {
    pub g: CsrMatrix,
    pub m: CsrMatrix,
    pub n: CsrMatrix,
}

impl Operators {
    pub fn assemble(grid: &StaggeredGrid) -> Self {
        let m = divergence(grid);
        let n = m.transpose();
        let g = laplacian(grid);
        Operators { g, m, n }
    }

    pub fn apply(&self, which: DiscreteOperator, field: &[f64]) -> Result<Vec<f64>> {
        let op = match which {
            DiscreteOperator::Laplacian => &self.g,
            DiscreteOperator::Gradient => &self.n,
            DiscreteOperator::Divergence => &self.m,
        };
        check_len("discrete operator input", op.ncols(), field.len())?;
        Ok(op.mul_vec(field))
    }
}

/// Convenience wrapper that assembles the stencils on the fly.
pub fn apply_discrete_operator(
    grid: &StaggeredGrid,
    which: DiscreteOperator,
    field: &[f64],
) -> Result<Vec<f64>> {
    Operators::assemble(grid).apply(which, field)
}

fn divergence(grid: &StaggeredGrid) -> CsrMatrix {
    let (nx, ny) = (grid.nx(), grid.ny());
    let inv_h = 1.0 / grid.h();
    let mut t = Vec::with_capacity(4 * grid.n_p());
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.cell(i, j);
            t.push((c, grid.x_face(grid.wrap_x(i as isize + 1), j), inv_h));
            t.push((c, grid.x_face(i, j), -inv_h));
            let top = match grid.bc() {
                BoundaryKind::Periodic => grid.y_face(i, (j + 1) % ny),
                BoundaryKind::Channel => grid.y_face(i, j + 1),
            };
            if let Some(f) = top {
                t.push((c, f, inv_h));
            }
            if let Some(f) = grid.y_face(i, j) {
                t.push((c, f, -inv_h));
            }
        }
    }
    CsrMatrix::from_triplets(grid.n_p(), grid.n_u(), t)
}

fn laplacian(grid: &StaggeredGrid) -> CsrMatrix {
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut t = Vec::with_capacity(5 * grid.n_u());

    // x-velocity rows: full rows j = 0..ny-1; channel walls reflect (u_ghost = -u).
    for j in 0..ny {
        for i in 0..nx {
            let row = grid.x_face(i as usize, j as usize);
            let mut diag = -4.0;
            t.push((row, grid.x_face(grid.wrap_x(i + 1), j as usize), inv_h2));
            t.push((row, grid.x_face(grid.wrap_x(i - 1), j as usize), inv_h2));
            for dj in [-1isize, 1] {
                match grid.wrap_y_cell(j + dj) {
                    Some(jj) => t.push((row, grid.x_face(i as usize, jj), inv_h2)),
                    None => diag -= 1.0,
                }
            }
            t.push((row, row, diag * inv_h2));
        }
    }

    // y-velocity rows: wall faces are fixed at zero and simply drop out.
    let (j_lo, j_hi) = match grid.bc() {
        BoundaryKind::Periodic => (0, ny),
        BoundaryKind::Channel => (1, ny),
    };
    for j in j_lo..j_hi {
        for i in 0..nx {
            let row = grid.y_face(i as usize, j as usize).expect("interior y-face");
            t.push((row, row, -4.0 * inv_h2));
            for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let ii = grid.wrap_x(i + di);
                let jj = match grid.bc() {
                    BoundaryKind::Periodic => (j + dj).rem_euclid(ny) as usize,
                    BoundaryKind::Channel => (j + dj) as usize,
                };
                if let Some(col) = grid.y_face(ii, jj) {
                    t.push((row, col, inv_h2));
                }
            }
        }
    }
    CsrMatrix::from_triplets(grid.n_u(), grid.n_u(), t)
}
