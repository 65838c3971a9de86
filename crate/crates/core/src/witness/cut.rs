use nalgebra::DMatrix;

use crate::tensor::{flat_map, hermitian_part, Bipartition, DenseOperator, PureVector, RegisterLayout, HERMITIAN_INPUT_TOL};
use crate::{Error, Result, C64};

/// A Hermitian operator seen across an Alice/Bob cut, with basis states
/// ordered Alice-major: index `a · d_B + b`.
pub trait CutHermitian: Sync {
    fn alice_dim(&self) -> usize;

    fn bob_dim(&self) -> usize;

    fn dim(&self) -> usize {
        self.alice_dim() * self.bob_dim()
    }

    /// `M · X` for a block of column vectors.
    fn apply(&self, x: &DMatrix<C64>) -> DMatrix<C64>;

    /// Alice-major layout the columns of `apply` are expressed in.
    fn arranged_layout(&self) -> &RegisterLayout;

    /// Register order results should be reported in.
    fn report_ordering(&self) -> Vec<u32>;

    /// Converts an Alice-major amplitude vector into a reportable vector.
    fn to_vector(&self, amplitudes: nalgebra::DVector<C64>) -> Result<PureVector> {
        PureVector::new(amplitudes, self.arranged_layout().clone())?.permute_registers(&self.report_ordering())
    }
}

/// Dense operator permuted so Alice's registers come first.
#[derive(Clone, Debug)]
pub struct DenseCut {
    matrix: DMatrix<C64>,
    layout: RegisterLayout,
    report: Vec<u32>,
    d_a: usize,
    d_b: usize,
}

impl DenseCut {
    pub fn new(op: &DenseOperator, cut: &Bipartition) -> Result<Self> {
        let err = op.hermiticity_error();
        if err > HERMITIAN_INPUT_TOL {
            return Err(Error::NotHermitian(err));
        }
        let (d_a, d_b) = cut.side_dims(op.layout())?;
        let arranged = op.permute_registers(&cut.ordering())?;
        Ok(DenseCut {
            layout: arranged.layout().clone(),
            matrix: hermitian_part(arranged.matrix()),
            report: op.layout().ids(),
            d_a,
            d_b,
        })
    }

    /// Cut by register parties.
    pub fn by_party(op: &DenseOperator) -> Result<Self> {
        Self::new(op, &Bipartition::by_party(op.layout()))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

impl CutHermitian for DenseCut {
    fn alice_dim(&self) -> usize {
        self.d_a
    }

    fn bob_dim(&self) -> usize {
        self.d_b
    }

    fn apply(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        &self.matrix * x
    }

    fn arranged_layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn report_ordering(&self) -> Vec<u32> {
        self.report.clone()
    }
}

/// Tensor product of small Hermitian factors, each acting on its own set of
/// registers, applied without forming the full matrix.
#[derive(Clone, Debug)]
pub struct LocalProductCut {
    layout: RegisterLayout,
    report: Vec<u32>,
    factors: Vec<LocalFactor>,
    d_a: usize,
    d_b: usize,
}

#[derive(Clone, Debug)]
struct LocalFactor {
    matrix: DMatrix<C64>,
    /// Flat offsets of the factor's basis states in the arranged layout.
    local: Vec<usize>,
    /// Flat offsets of all basis states of the remaining registers.
    rest: Vec<usize>,
}

impl LocalProductCut {
    /// `factors` must act on disjoint registers that together cover the
    /// whole system.
    pub fn new(factors: &[DenseOperator], cut: &Bipartition) -> Result<Self> {
        let mut combined = RegisterLayout::new(Vec::new())?;
        for f in factors {
            let err = f.hermiticity_error();
            if err > HERMITIAN_INPUT_TOL {
                return Err(Error::NotHermitian(err));
            }
            combined = combined.concat(f.layout())?;
        }
        let (d_a, d_b) = cut.side_dims(&combined)?;
        let layout = combined.reordered(&cut.ordering())?;
        let strides = layout.strides();
        let mut local_factors = Vec::with_capacity(factors.len());
        for f in factors {
            let positions: Vec<usize> = f
                .layout()
                .ids()
                .iter()
                .map(|&id| layout.position(id))
                .collect::<Result<_>>()?;
            let local = flat_map(
                &f.layout().dims(),
                &positions.iter().map(|&p| strides[p]).collect::<Vec<_>>(),
            );
            let others: Vec<usize> = (0..layout.len()).filter(|p| !positions.contains(p)).collect();
            let rest = flat_map(
                &others.iter().map(|&p| layout.registers()[p].dim).collect::<Vec<_>>(),
                &others.iter().map(|&p| strides[p]).collect::<Vec<_>>(),
            );
            local_factors.push(LocalFactor {
                matrix: hermitian_part(f.matrix()),
                local,
                rest,
            });
        }
        Ok(LocalProductCut {
            report: combined.ascending().ids(),
            layout,
            factors: local_factors,
            d_a,
            d_b,
        })
    }

    /// Dense realisation, for cross-checks at small sizes.
    pub fn to_dense(&self) -> DMatrix<C64> {
        self.apply(&DMatrix::identity(self.dim(), self.dim()))
    }
}

impl CutHermitian for LocalProductCut {
    fn alice_dim(&self) -> usize {
        self.d_a
    }

    fn bob_dim(&self) -> usize {
        self.d_b
    }

    fn apply(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let mut current = x.clone();
        for f in &self.factors {
            let mut next = DMatrix::<C64>::zeros(current.nrows(), current.ncols());
            let k = f.local.len();
            for col in 0..current.ncols() {
                for &base in &f.rest {
                    for i in 0..k {
                        let mut acc = C64::new(0.0, 0.0);
                        for j in 0..k {
                            acc += f.matrix[(i, j)] * current[(base + f.local[j], col)];
                        }
                        next[(base + f.local[i], col)] = acc;
                    }
                }
            }
            current = next;
        }
        current
    }

    fn arranged_layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn report_ordering(&self) -> Vec<u32> {
        self.report.clone()
    }
}
