//! Direct coefficient assembly: one projection per column of `B` for
//! `Y = QB`, one more per column for `Z = QGY`, then sparse inner products.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::eulerian::ProjectionSolver;
use crate::exec::Execution;
use crate::fom::FluidParams;
use crate::lagrangian::SpreadOperator;

use super::coefficients::RomCoefficients;

pub(crate) fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Raw products `(B^T Q B, B^T Q G Q B, B_now^T Q B_prev)`, unsymmetrized.
pub fn direct_products(
    solver: &ProjectionSolver,
    b_now: &SpreadOperator,
    b_prev: &SpreadOperator,
    exec: Execution,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let n = b_now.n_cols();
    if b_prev.n_cols() != n || b_now.n_u() != solver.grid().n_u() {
        return Err(Error::Dimension {
            context: "reduced assembly",
            expected: n,
            got: b_prev.n_cols(),
        });
    }
    let g = &solver.operators().g;
    let cols = exec.try_map(n, |c| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let y = solver.project(&b_now.column_dense(c))?;
        let z = solver.project(&g.mul_vec(&y))?;
        let m0: Vec<f64> = (0..n).map(|i| b_now.column_dot(i, &y)).collect();
        let k1: Vec<f64> = (0..n).map(|i| b_now.column_dot(i, &z)).collect();
        // Row c of C: (Q B_now e_c)^T B_prev e_j.
        let c_row: Vec<f64> = (0..n).map(|j| b_prev.column_dot(j, &y)).collect();
        Ok((m0, k1, c_row))
    })?;
    let mut m0 = DMatrix::zeros(n, n);
    let mut k1 = DMatrix::zeros(n, n);
    let mut c = DMatrix::zeros(n, n);
    for (col, (a, b, r)) in cols.into_iter().enumerate() {
        m0.set_column(col, &nalgebra::DVector::from_vec(a));
        k1.set_column(col, &nalgebra::DVector::from_vec(b));
        c.set_row(col, &nalgebra::RowDVector::from_vec(r));
    }
    Ok((m0, k1, c))
}

/// Builds the reduced coefficients for the configurations behind `b_now`
/// and `b_prev`. If both were built from the same positions the two `1/dt`
/// terms of `M1` cancel exactly. `shift` as in [`RomCoefficients::new`].
pub fn assemble_rom_direct(
    solver: &ProjectionSolver,
    b_now: &SpreadOperator,
    b_prev: &SpreadOperator,
    dt: f64,
    params: &FluidParams,
    shift: f64,
    exec: Execution,
) -> Result<RomCoefficients> {
    let (mut m0, mut k1, c) = direct_products(solver, b_now, b_prev, exec)?;
    symmetrize(&mut m0);
    symmetrize(&mut k1);
    let c = if b_prev.reference() == b_now.reference() { m0.clone() } else { c };
    RomCoefficients::new(m0, k1, c, dt, params, b_now.reference(), shift)
}
