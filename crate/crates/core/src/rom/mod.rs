//! Petrov-Galerkin reduced-order model with trial space `QB` and test space `B`.

pub mod assembly;
pub mod coefficients;
pub mod solver;
pub mod transfer;

pub use assembly::{assemble_rom_direct, direct_products};
pub use coefficients::RomCoefficients;
pub use solver::{step_rom, Assembly, RomSolver, RomState, RomStepInfo};
pub use transfer::{transfer_function_fom, transfer_function_rom};
