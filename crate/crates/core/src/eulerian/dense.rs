//! Dense materializations of the stencils for small-grid oracles.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::grid::StaggeredGrid;
use super::operators::Operators;

/// Largest `n_u` accepted by [`materialize_dense`].
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Debug)]
pub struct DenseOperators {
    pub g: DMatrix<f64>,
    pub n: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

/// Pseudo-inverse of a symmetric matrix, dropping eigenvalues below
/// `rel_tol * max|lambda|`.
pub fn symmetric_pinv(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let inv = eig
        .eigenvalues
        .map(|l| if l.abs() > rel_tol * scale { 1.0 / l } else { 0.0 });
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&inv) * v.transpose()
}

pub fn materialize_dense(grid: &StaggeredGrid) -> Result<DenseOperators> {
    if grid.n_u() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n_u: grid.n_u(),
            limit: DENSE_LIMIT,
        });
    }
    let ops = Operators::assemble(grid);
    let g = ops.g.to_dense();
    let n = ops.n.to_dense();
    let m = ops.m.to_dense();
    let mn = &m * &n;
    let q = DMatrix::identity(grid.n_u(), grid.n_u()) - &n * symmetric_pinv(&mn, 1e-10) * &m;
    Ok(DenseOperators { g, n, m, q })
}
