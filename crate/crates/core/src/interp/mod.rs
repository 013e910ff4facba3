//! Displacement-indexed kernel tables and table-based reduced assembly.

pub mod assemble;
pub mod cache;
pub mod table;

pub use assemble::{assemble_rom_interp, interp_cross, interp_m0_k1};
pub use table::{default_extent, eval_table, sample_kernel_tables, samples_per_side, Family, KernelTable};
