//! Reduced coefficients from kernel tables in `O(n_s^2)` lookups.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::exec::Execution;
use crate::fom::FluidParams;
use crate::rom::RomCoefficients;

use super::table::{Family, KernelTable};

const K0: [Family; 4] = [Family::K0xx, Family::K0xy, Family::K0yx, Family::K0yy];
const K01: [Family; 8] = Family::ALL;

fn delta(a: &[f64], i: usize, b: &[f64], j: usize) -> [f64; 2] {
    let (na, nb) = (a.len() / 2, b.len() / 2);
    [a[i] - b[j], a[na + i] - b[nb + j]]
}

/// `(M0, K1)` at the configuration `x` (stacked), symmetric by construction:
/// each node pair `I <= J` is evaluated once at `X_I - X_J` and mirrored.
pub fn interp_m0_k1(table: &KernelTable, x: &[f64], exec: Execution) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = x.len() / 2;
    let rows = exec.try_map(n, |i| -> Result<Vec<[f64; 8]>> {
        let mut out = Vec::with_capacity(n - i);
        let mut v = [0.0; 8];
        for j in i..n {
            table.eval_many(&K01, delta(x, i, x, j), &mut v)?;
            out.push(v);
        }
        Ok(out)
    })?;
    let mut m0 = DMatrix::zeros(2 * n, 2 * n);
    let mut k1 = DMatrix::zeros(2 * n, 2 * n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            for a in 0..2 {
                for b in 0..2 {
                    let (r, c) = (a * n + i, b * n + j);
                    let (k0, kk) = (v[2 * a + b], v[4 + 2 * a + b]);
                    m0[(r, c)] = k0;
                    m0[(c, r)] = k0;
                    k1[(r, c)] = kk;
                    k1[(c, r)] = kk;
                }
            }
            if i == j {
                // Cross-component entries of the diagonal block: average both orientations.
                let (xy, yx) = (v[1], v[2]);
                m0[(i, n + i)] = 0.5 * (xy + yx);
                m0[(n + i, i)] = 0.5 * (xy + yx);
                let (xy, yx) = (v[5], v[6]);
                k1[(i, n + i)] = 0.5 * (xy + yx);
                k1[(n + i, i)] = 0.5 * (xy + yx);
            }
        }
    }
    Ok((m0, k1))
}

/// `C = B(X_now)^T Q B(X_prev)` with entries `K0_ab(X_now,I - X_prev,J)`.
pub fn interp_cross(table: &KernelTable, x_now: &[f64], x_prev: &[f64], exec: Execution) -> Result<DMatrix<f64>> {
    let n = x_now.len() / 2;
    let rows = exec.try_map(n, |i| -> Result<Vec<[f64; 4]>> {
        let mut v = [0.0; 4];
        (0..n)
            .map(|j| {
                table.eval_many(&K0, delta(x_now, i, x_prev, j), &mut v)?;
                Ok(v)
            })
            .collect()
    })?;
    let mut c = DMatrix::zeros(2 * n, 2 * n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    c[(a * n + i, b * n + j)] = v[2 * a + b];
                }
            }
        }
    }
    Ok(c)
}

/// Table-based counterpart of [`crate::rom::assemble_rom_direct`].
pub fn assemble_rom_interp(
    table: &KernelTable,
    x_now: &[f64],
    x_prev: &[f64],
    dt: f64,
    params: &FluidParams,
    shift: f64,
    exec: Execution,
) -> Result<RomCoefficients> {
    let (m0, k1) = interp_m0_k1(table, x_now, exec)?;
    let c = if x_now == x_prev {
        m0.clone()
    } else {
        interp_cross(table, x_now, x_prev, exec)?
    };
    RomCoefficients::new(m0, k1, c, dt, params, x_now, shift)
}
