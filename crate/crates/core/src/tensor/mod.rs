//! Dense complex linear algebra over tensor products of labelled registers.
//!
//! Operators are stored with their registers in ascending id order unless a
//! caller explicitly reorders them with `permute_registers`, which is how
//! every operation across the Alice/Bob cut obtains an Alice-major layout.

mod eigen;
mod layout;
mod operator;
pub mod random;
mod vector;

pub use eigen::{eigenvalues, hermitian_part, min_eigenpair};
pub(crate) use eigen::min_eigen_raw;
pub use layout::{Bipartition, Party, Register, RegisterLayout};
pub(crate) use layout::flat_map;
pub use operator::{weighted_partial_trace, DenseOperator, MatrixDump};
pub use vector::{quadratic_form, PureVector};

/// Hermiticity of constructed operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Hermiticity accepted on input to eigensolvers and searches.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;
pub const SCHMIDT_TOL: f64 = 1e-10;
