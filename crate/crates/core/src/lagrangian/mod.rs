//! Lagrangian structures, the delta kernel, force spreading and force models.

pub mod forces;
pub mod kernel;
pub mod leak;
pub mod spread;
pub mod structure;

pub use forces::{evaluate_force_model, turning_angles, ForceModel, ForceTerm};
pub use kernel::{delta_kernel, kernel_constant};
pub use leak::{check_leak, max_node_gap, LeakStatus};
pub use spread::{assemble_spread, interp_velocity, spread_force, SpreadOperator};
pub use structure::{Body, StructureState};
