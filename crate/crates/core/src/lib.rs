//! Numerical and exact-rational tooling for studying entanglement
//! distillability of the `αR⊗R + S⊗S` family of states on `d`-dimensional
//! registers.
//!
//! The crate is organised bottom up:
//!
//! * [`tensor`]: dense complex operators over ordered, party-labelled
//!   registers (Kronecker products, partial traces, partial transposes,
//!   register permutations, Schmidt values and Hermitian eigensolves).
//! * [`families`]: the projectors `P`, `Q`, `R`, `S`, `F`, the state families
//!   built from them and a name-keyed registry of those families.
//! * [`pq`]: exact rational algebra over tensor words of projector symbols,
//!   including the n-copy partial-transpose coefficient expansion.
//! * [`witness`]: Schmidt-rank-2 witness evaluation, interchangeable witness
//!   search strategies, the n-copy positivity bound and its ε threshold.
//! * [`protocol`]: the measure-and-filter distillation iteration, its
//!   restart-on-failure driver and final certification.

pub mod check;
pub mod error;
pub mod families;
pub mod pq;
pub mod protocol;
pub mod rational;
pub mod tensor;
pub mod witness;

pub use error::{Error, Result};
pub use nalgebra::Complex;

/// Complex scalar used by every dense operator.
pub type C64 = nalgebra::Complex<f64>;
