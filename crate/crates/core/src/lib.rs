pub mod diagnostics;
pub mod error;
pub mod eulerian;
pub mod exec;
pub mod fom;
pub mod harness;
pub mod interp;
pub mod lagrangian;
pub mod rom;
pub mod sparse;

pub use error::{Error, Result};
