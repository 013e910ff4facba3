//! Full-order model: the projected Stokes system advanced with forward Euler.

pub mod background;
pub mod params;
pub mod solver;

pub use background::{background_flow, BackgroundFlow, BackgroundKind};
pub use params::FluidParams;
pub use solver::{step_fom, FomSolver, FomState, StepInfo};
