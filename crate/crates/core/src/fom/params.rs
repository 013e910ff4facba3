use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Density and dynamic viscosity of the fluid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub rho: f64,
    pub mu: f64,
}

impl FluidParams {
    pub fn new(rho: f64, mu: f64) -> Result<Self> {
        let p = FluidParams { rho, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.mu > 0.0 && self.rho.is_finite() && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho and mu must be positive, got rho = {}, mu = {}",
                self.rho, self.mu
            )));
        }
        Ok(())
    }

    /// Kinematic viscosity `mu / rho`.
    pub fn nu(&self) -> f64 {
        self.mu / self.rho
    }

    pub fn reynolds(&self, velocity: f64, length: f64) -> f64 {
        self.rho * velocity * length / self.mu
    }

    /// Largest step accepted without a warning by the explicit viscous update,
    /// `0.2 rho h^2 / (4 mu)`.
    pub fn diffusive_dt_limit(&self, h: f64) -> f64 {
        0.2 * self.rho * h * h / (4.0 * self.mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive() {
        assert!(FluidParams::new(0.0, 1.0).is_err());
        assert!(FluidParams::new(1.0, -1.0).is_err());
        assert!(FluidParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn derived_quantities() {
        let p = FluidParams::new(2.0, 0.5).unwrap();
        assert_eq!(p.nu(), 0.25);
        assert_eq!(p.reynolds(1.0, 3.0), 12.0);
        assert!((p.diffusive_dt_limit(0.1) - 0.2 * 2.0 * 0.01 / 2.0).abs() < 1e-15);
    }
}
