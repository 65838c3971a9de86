//! Exact rational algebra over tensor words of the pair projectors
//! `P, Q, R, S`.
//!
//! Each word position is a pair of registers; the partial transpose acts
//! on a word as the linear substitution of every symbol by its image under
//! the transposition relations, which keeps every coefficient exact.

mod coeffs;
mod structured;
mod symbol;

pub use coeffs::{
    mu_lambda, n_copy_pt_coeffs, rho_epsilon_words, CoefficientEntry, CoefficientMap, CoefficientCheck, MuLambda,
};
pub use structured::{StructuredOperator, Word, DEFAULT_DENSE_BUDGET, DEFAULT_TERM_BUDGET};
pub use symbol::{Alphabet, Symbol};
