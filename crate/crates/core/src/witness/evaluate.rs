use super::cut::{CutHermitian, DenseCut, LocalProductCut};
use super::search::{Alternating, SearchOptions, WitnessResult, WitnessSearch};
use crate::families::projector_set;
use crate::pq::{Symbol, DEFAULT_DENSE_BUDGET};
use crate::tensor::{quadratic_form, Bipartition, DenseOperator, Party, PureVector, RegisterLayout};
use crate::{Error, Result};

const UNIT_NORM_TOL: f64 = 1e-10;
const IMAGINARY_TOL: f64 = 1e-8;

/// `⟨ψ|T(ρ)|ψ⟩` with the transpose taken on `party`'s registers.
///
/// `ψ` must be a unit vector on the same registers as `ρ` (any order).
pub fn evaluate_witness(rho: &DenseOperator, psi: &PureVector, party: Party) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::NotUnitNorm(norm));
    }
    transposed_form(rho, psi, party)
}

/// Same quadratic form without the unit-norm requirement.
pub fn transposed_form(rho: &DenseOperator, psi: &PureVector, party: Party) -> Result<f64> {
    let psi = if psi.layout() == rho.layout() {
        psi.clone()
    } else {
        psi.permute_registers(&rho.layout().ids())
            .map_err(|_| Error::LayoutMismatch("vector and operator act on different registers".into()))?
    };
    if psi.layout() != rho.layout() {
        return Err(Error::LayoutMismatch("register dimensions differ".into()));
    }
    let value = quadratic_form(&rho.partial_transpose(party), &psi)?;
    if value.im.abs() > IMAGINARY_TOL {
        return Err(Error::ImaginaryResidue(value.im.abs()));
    }
    Ok(value.re)
}

/// `|φ⟩ = |1⟩₁|2⟩₂(|1⟩₃|1⟩₄ + |2⟩₃|2⟩₄)` on registers (1, 2, 3, 4),
/// unnormalised (`‖φ‖² = 2`).
pub fn canonical_phi(d: usize) -> Result<PureVector> {
    if d < 2 {
        return Err(Error::invalid(format!("d must be at least 2, got {d}")));
    }
    let layout = RegisterLayout::numbered(4, d);
    let first = PureVector::basis(layout.clone(), &[0, 1, 0, 0]);
    let second = PureVector::basis(layout, &[0, 1, 1, 1]);
    first.add(&second)
}

/// Runs the alternating search on a pre-transposed Hermitian operator cut
/// by register parties. `d_a` and `d_b` must match the cut.
pub fn search_rank2_min(
    m: &DenseOperator,
    d_a: usize,
    d_b: usize,
    opts: &SearchOptions,
) -> Result<WitnessResult> {
    let cut = DenseCut::by_party(m)?;
    if cut.alice_dim() != d_a || cut.bob_dim() != d_b {
        return Err(Error::LayoutMismatch(format!(
            "operator cut is {}x{}, expected {d_a}x{d_b}",
            cut.alice_dim(),
            cut.bob_dim()
        )));
    }
    Alternating.search(&cut, opts)
}

/// `Q^{⊗2n}` on the pairs `(1,2), (3,4), …, (4n−1, 4n)`, cut into odd
/// (Alice) and even (Bob) registers.
pub fn q_power_cut(d: usize, n: u32) -> Result<LocalProductCut> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let dimension = d.checked_pow(4 * n).unwrap_or(usize::MAX);
    if dimension > DEFAULT_DENSE_BUDGET {
        return Err(Error::DenseBudget {
            budget: DEFAULT_DENSE_BUDGET,
            dimension,
        });
    }
    let set = projector_set(d)?;
    let factors = (0..2 * n)
        .map(|k| set.on(Symbol::Q, 2 * k + 1, 2 * k + 2))
        .collect::<Result<Vec<_>>>()?;
    let layout = RegisterLayout::numbered(4 * n, d);
    LocalProductCut::new(&factors, &Bipartition::by_party(&layout))
}

/// Smallest `⟨ψ|Q^{⊗2n}|ψ⟩` found over unit Schmidt-rank-2 vectors.
pub fn q_overlap_min(d: usize, n: u32, opts: &SearchOptions) -> Result<WitnessResult> {
    let cut = q_power_cut(d, n)?;
    Alternating.search(&cut, opts)
}
