use crate::error::{check_len, Error, Result};
use crate::lagrangian::StructureState;

use super::shape::signed_area;

/// Trapezoidal `\oint u . n ds` over a closed body from nodal velocities
/// (stacked like the structure), with the outward normal of the polygon.
pub fn mass_flux(velocity: &[f64], x: &StructureState, body: usize) -> Result<f64> {
    check_len("mass_flux velocity", x.positions().len(), velocity.len())?;
    let b = x.bodies()[body];
    if !b.closed {
        return Err(Error::Unsupported("mass flux through an open curve".into()));
    }
    let n = x.n_nodes();
    let sign = if signed_area(x, body) >= 0.0 { 1.0 } else { -1.0 };
    let mut flux = 0.0;
    for l in 0..b.len {
        let k = b.offset + l;
        let next = x.node(b.offset + (l + 1) % b.len);
        let prev = x.node(b.offset + (l + b.len - 1) % b.len);
        let normal = [0.5 * (next[1] - prev[1]), -0.5 * (next[0] - prev[0])];
        flux += velocity[k] * normal[0] + velocity[n + k] * normal[1];
    }
    Ok(sign * flux)
}
