//! Regularized, radially symmetric delta kernel with compact support.

use std::f64::consts::PI;

/// Normalization `C_r = 10 / (3 pi r^2)` of the 2D kernel.
pub fn kernel_constant(r: f64) -> f64 {
    10.0 / (3.0 * PI * r * r)
}

/// `delta_r(x) = C_r [1 + |x|^2 (2|x| - 3r) / r^3]` for `|x| <= r`, zero outside.
pub fn delta_kernel(dx: [f64; 2], r: f64) -> f64 {
    let d = dx[0].hypot(dx[1]);
    radial(d, r)
}

#[inline]
pub(crate) fn radial(d: f64, r: f64) -> f64 {
    if d >= r {
        return 0.0;
    }
    kernel_constant(r) * (1.0 + d * d * (2.0 * d - 3.0 * r) / (r * r * r))
}
