use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown register id {0}")]
    UnknownRegister(u32),
    #[error("duplicate register id {0}")]
    DuplicateRegister(u32),
    #[error("register {0} has dimension zero")]
    ZeroDimension(u32),
    #[error("ordering is not a permutation of the layout registers")]
    NotAPermutation,
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("vector is zero")]
    ZeroVector,
    #[error("vector is not unit norm (norm {0})")]
    NotUnitNorm(f64),
    #[error("imaginary residue {0:e} above tolerance")]
    ImaginaryResidue(f64),
    #[error("eigenvector residual {0:e} above tolerance")]
    EigenResidual(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("term budget of {budget} exceeded ({needed} terms required)")]
    TermBudget { budget: usize, needed: u128 },
    #[error("dense budget of {budget} exceeded (dimension {dimension})")]
    DenseBudget { budget: usize, dimension: usize },
    #[error("operator is not representable over the {0} alphabet")]
    NotRepresentable(&'static str),
    #[error("partial-transpose expansion mismatch: max deviation {0:e}")]
    ExpansionMismatch(f64),
    #[error("unknown {kind} '{name}' (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by a configured size budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::TermBudget { .. } | Error::DenseBudget { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
