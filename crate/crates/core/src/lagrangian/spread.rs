//! The spread matrix `B` and its transpose (velocity interpolation).

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::eulerian::{BoundaryKind, StaggeredGrid};

use super::kernel::radial;
use super::structure::StructureState;

/// Sparse `n_u x 2n_s` matrix `[B1 0; 0 B2]` stored column-wise. Column `k < n_s`
/// holds the kernel of node `k` sampled at x-faces, column `n_s + k` the same
/// node sampled at y-faces.
#[derive(Clone, Debug, PartialEq)]
pub struct SpreadOperator {
    n_u: usize,
    n_s: usize,
    r: f64,
    colptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
    reference: Vec<f64>,
}

/// Appends the kernel weights of node `p` on one face family (every face
/// strictly inside distance `r`).
fn push_column(
    grid: &StaggeredGrid,
    p: [f64; 2],
    r: f64,
    component: usize,
    rows: &mut Vec<usize>,
    vals: &mut Vec<f64>,
) {
    let h = grid.h();
    let off = if component == 0 { [0.0, 0.5] } else { [0.5, 0.0] };
    let i_lo = ((p[0] - r) / h - off[0]).ceil() as isize;
    let i_hi = ((p[0] + r) / h - off[0]).floor() as isize;
    let j_lo = ((p[1] - r) / h - off[1]).ceil() as isize;
    let j_hi = ((p[1] + r) / h - off[1]).floor() as isize;
    let start = rows.len();
    for j in j_lo..=j_hi {
        let dy = (j as f64 + off[1]) * h - p[1];
        let jj = match grid.bc() {
            BoundaryKind::Periodic => j.rem_euclid(grid.ny() as isize) as usize,
            BoundaryKind::Channel => {
                if j < 0 || j > grid.ny() as isize {
                    continue;
                }
                j as usize
            }
        };
        for i in i_lo..=i_hi {
            let dx = (i as f64 + off[0]) * h - p[0];
            let w = radial(dx.hypot(dy), r);
            if w <= 0.0 {
                continue;
            }
            let ii = grid.wrap_x(i);
            let row = if component == 0 {
                (jj < grid.ny()).then(|| grid.x_face(ii, jj))
            } else {
                grid.y_face(ii, jj)
            };
            if let Some(row) = row {
                rows.push(row);
                vals.push(w);
            }
        }
    }
    // Periodic wrap on tiny grids can alias two offsets onto one face.
    let mut entries: Vec<(usize, f64)> = rows[start..].iter().copied().zip(vals[start..].iter().copied()).collect();
    entries.sort_by_key(|e| e.0);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (row, w) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == row => last.1 += w,
            _ => merged.push((row, w)),
        }
    }
    rows.truncate(start);
    vals.truncate(start);
    for (row, w) in merged {
        rows.push(row);
        vals.push(w);
    }
}

/// `out[f] = b^T fields[f]` for the kernel column `b` of a node at `p` on one
/// face family, without assembling the column.
pub(crate) fn kernel_dot(grid: &StaggeredGrid, p: [f64; 2], r: f64, component: usize, fields: &[&[f64]], out: &mut [f64]) {
    let h = grid.h();
    let nx = grid.nx();
    let off = if component == 0 { [0.0, 0.5] } else { [0.5, 0.0] };
    let i_lo = ((p[0] - r) / h - off[0]).ceil() as isize;
    let i_hi = ((p[0] + r) / h - off[0]).floor() as isize;
    let j_lo = ((p[1] - r) / h - off[1]).ceil() as isize;
    let j_hi = ((p[1] + r) / h - off[1]).floor() as isize;
    out.iter_mut().for_each(|o| *o = 0.0);
    for j in j_lo..=j_hi {
        let dy = (j as f64 + off[1]) * h - p[1];
        let base = match (grid.bc(), component) {
            (BoundaryKind::Periodic, 0) => nx * j.rem_euclid(grid.ny() as isize) as usize,
            (BoundaryKind::Periodic, _) => grid.n_ux() + nx * j.rem_euclid(grid.ny() as isize) as usize,
            (BoundaryKind::Channel, 0) if (0..grid.ny() as isize).contains(&j) => nx * j as usize,
            (BoundaryKind::Channel, 1) if (1..grid.ny() as isize).contains(&j) => grid.n_ux() + nx * (j as usize - 1),
            _ => continue,
        };
        for i in i_lo..=i_hi {
            let dx = (i as f64 + off[0]) * h - p[0];
            let w = radial(dx.hypot(dy), r);
            if w <= 0.0 {
                continue;
            }
            let row = base + grid.wrap_x(i);
            for (o, f) in out.iter_mut().zip(fields) {
                *o += w * f[row];
            }
        }
    }
}

impl SpreadOperator {
    /// Assembles `B` for the configuration `x` with kernel radius `r`.
    pub fn assemble(grid: &StaggeredGrid, x: &StructureState, r: f64) -> Result<Self> {
        Self::assemble_positions(grid, x.positions(), r)
    }

    /// As [`SpreadOperator::assemble`] from stacked coordinates `[x.., y..]`.
    pub fn assemble_positions(grid: &StaggeredGrid, pos: &[f64], r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("kernel radius must be positive, got {r}")));
        }
        let n_s = pos.len() / 2;
        if grid.bc() == BoundaryKind::Channel {
            for k in 0..n_s {
                let y = pos[n_s + k];
                if !(y >= r && y <= grid.ly() - r) {
                    return Err(Error::WallProximity { node: k, y, radius: r });
                }
            }
        }
        let mut colptr = Vec::with_capacity(2 * n_s + 1);
        colptr.push(0);
        let cap = 2 * n_s * 25;
        let mut rows = Vec::with_capacity(cap);
        let mut vals = Vec::with_capacity(cap);
        for component in 0..2 {
            for k in 0..n_s {
                let p = [pos[k], pos[n_s + k]];
                if !(p[0].is_finite() && p[1].is_finite()) {
                    return Err(Error::NonFinite {
                        t: f64::NAN,
                        what: "structure position",
                    });
                }
                push_column(grid, p, r, component, &mut rows, &mut vals);
                colptr.push(rows.len());
            }
        }
        Ok(SpreadOperator {
            n_u: grid.n_u(),
            n_s,
            r,
            colptr,
            rows,
            vals,
            reference: pos.to_vec(),
        })
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_nodes(&self) -> usize {
        self.n_s
    }

    /// Number of columns, `2 n_s`.
    pub fn n_cols(&self) -> usize {
        2 * self.n_s
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// Stacked node coordinates this operator was built from.
    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(row indices, values)` of column `c`, rows ascending.
    pub fn column(&self, c: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.colptr[c], self.colptr[c + 1]);
        (&self.rows[a..b], &self.vals[a..b])
    }

    /// Column `c` scattered into a dense vector of length `n_u`.
    pub fn column_dense(&self, c: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_u];
        let (rows, vals) = self.column(c);
        rows.iter().zip(vals).for_each(|(&r, &v)| out[r] = v);
        out
    }

    /// `<B e_c, v>`.
    pub fn column_dot(&self, c: usize, v: &[f64]) -> f64 {
        let (rows, vals) = self.column(c);
        rows.iter().zip(vals).map(|(&r, &w)| w * v[r]).sum()
    }

    /// `f = B F`.
    pub fn spread(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len("spread force", self.n_cols(), f.len())?;
        let mut out = vec![0.0; self.n_u];
        for (c, &fc) in f.iter().enumerate() {
            if fc == 0.0 {
                continue;
            }
            let (rows, vals) = self.column(c);
            rows.iter().zip(vals).for_each(|(&r, &w)| out[r] += w * fc);
        }
        Ok(out)
    }

    /// `B^T u`.
    pub fn transpose_mul(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("interpolate velocity", self.n_u, u.len())?;
        Ok((0..self.n_cols()).map(|c| self.column_dot(c, u)).collect())
    }

    /// Node velocities `h^2 B^T u`.
    pub fn interp(&self, u: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut v = self.transpose_mul(u)?;
        v.iter_mut().for_each(|x| *x *= h * h);
        Ok(v)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n_u, self.n_cols());
        for c in 0..self.n_cols() {
            let (rows, vals) = self.column(c);
            rows.iter().zip(vals).for_each(|(&r, &v)| d[(r, c)] = v);
        }
        d
    }
}

/// Free-function form of [`SpreadOperator::assemble`].
pub fn assemble_spread(grid: &StaggeredGrid, x: &StructureState, r: f64) -> Result<SpreadOperator> {
    SpreadOperator::assemble(grid, x, r)
}

/// Free-function form of [`SpreadOperator::spread`].
pub fn spread_force(b: &SpreadOperator, f: &[f64]) -> Result<Vec<f64>> {
    b.spread(f)
}

/// Free-function form of [`SpreadOperator::interp`].
pub fn interp_velocity(b: &SpreadOperator, u: &[f64], h: f64) -> Result<Vec<f64>> {
    b.interp(u, h)
}
