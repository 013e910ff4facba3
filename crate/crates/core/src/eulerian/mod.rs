//! Staggered-grid geometry, discrete operators and the incompressibility projector.

pub mod dense;
pub mod grid;
pub mod operators;
pub mod projection;

pub use dense::{materialize_dense, DenseOperators};
pub use grid::{BoundaryKind, StaggeredGrid};
pub use operators::{apply_discrete_operator, DiscreteOperator, Operators, PressureField, VelocityField};
pub use projection::{project, projector_factorize, ProjectionSolver};
