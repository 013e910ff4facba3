//! Physical diagnostics and analytical baselines.

pub mod convergence;
pub mod flux;
pub mod jeffery;
pub mod lyapunov;
pub mod shape;

pub use convergence::convergence_order;
pub use flux::mass_flux;
pub use jeffery::{jeffery_angle, jeffery_period};
pub use lyapunov::{lyapunov_fom, lyapunov_rom};
pub use shape::{perimeter, principal_angle, shape_metrics, signed_area, AngleTracker, ShapeMetrics};
