//! Schmidt-rank-2 witnesses of the partial transpose.
//!
//! A unit vector `ψ` of Schmidt rank 2 with `⟨ψ|T_A(ρ)|ψ⟩ < 0` certifies
//! that `ρ` is 1-distillable. This module evaluates that quantity, searches
//! for such vectors with the strategies in [`search`], and provides the
//! exact n-copy lower bound together with the ε below which it stays
//! positive.

mod ansatz;
mod bound;
mod cut;
mod evaluate;
pub mod search;

pub use ansatz::SchmidtRank2Ansatz;
pub use bound::{epsilon_threshold, n_copy_bound, BoundParams};
pub use cut::{CutHermitian, DenseCut, LocalProductCut};
pub use evaluate::{canonical_phi, evaluate_witness, q_overlap_min, q_power_cut, search_rank2_min, transposed_form};
pub use search::{
    Alternating, CertificateVector, RandomSampling, SearchOptions, SearchRegistry, WitnessRecord, WitnessResult,
    WitnessSearch,
};
