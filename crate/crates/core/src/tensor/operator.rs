use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::layout::{flat_map, Party, RegisterLayout};
use super::HERMITIAN_TOL;
use crate::{Error, Result, C64};

/// A square complex matrix acting on the registers of a [`RegisterLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
    layout: RegisterLayout,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<C64>, layout: RegisterLayout) -> Result<Self> {
        let dim = layout.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::LayoutMismatch(format!(
                "matrix is {}x{} but layout dimension is {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DenseOperator { matrix, layout })
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let dim = layout.total_dim();
        DenseOperator {
            matrix: DMatrix::identity(dim, dim),
            layout,
        }
    }

    pub fn zeros(layout: RegisterLayout) -> Self {
        let dim = layout.total_dim();
        DenseOperator {
            matrix: DMatrix::zeros(dim, dim),
            layout,
        }
    }

    /// Real diagonal operator on a single register with id 1.
    pub fn diagonal(values: &[f64]) -> Self {
        let layout = RegisterLayout::uniform(&[1], values.len()).expect("single register");
        let diag = nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| C64::new(v, 0.0)),
        );
        DenseOperator {
            matrix: DMatrix::from_diagonal(&diag),
            layout,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        DenseOperator {
            matrix: &self.matrix * C64::new(factor, 0.0),
            layout: self.layout.clone(),
        }
    }

    fn check_same_layout(&self, other: &DenseOperator) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.layout.ids(),
                other.layout.ids()
            )));
        }
        Ok(())
    }

    /// `a·self + b·other` on identical layouts.
    pub fn combine(&self, a: f64, other: &DenseOperator, b: f64) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(DenseOperator {
            matrix: &self.matrix * C64::new(a, 0.0) + &other.matrix * C64::new(b, 0.0),
            layout: self.layout.clone(),
        })
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(DenseOperator {
            matrix: &self.matrix * &other.matrix,
            layout: self.layout.clone(),
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |M - M†|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                err = err.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= HERMITIAN_TOL
    }

    /// Same matrix, registers renamed position by position.
    pub fn relabel(&self, ids: &[u32]) -> Result<Self> {
        Ok(DenseOperator {
            matrix: self.matrix.clone(),
            layout: self.layout.relabel(ids)?,
        })
    }

    /// Kronecker product. Register ids must be disjoint; the result is
    /// stored in ascending register-id order.
    pub fn tensor(&self, other: &DenseOperator) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let product = DenseOperator {
            matrix: self.matrix.kronecker(&other.matrix),
            layout,
        };
        product.canonical()
    }

    /// Reorders to ascending register ids if necessary.
    pub fn canonical(self) -> Result<Self> {
        if self.layout.is_ascending() {
            Ok(self)
        } else {
            let ordering = self.layout.ascending().ids();
            self.permute_registers(&ordering)
        }
    }

    /// Similarity transform by the permutation moving registers into
    /// `ordering`.
    pub fn permute_registers(&self, ordering: &[u32]) -> Result<Self> {
        let layout = self.layout.reordered(ordering)?;
        let map = self.layout.index_map_from(&layout)?;
        let n = self.dim();
        let matrix = DMatrix::from_fn(n, n, |i, j| self.matrix[(map[i], map[j])]);
        Ok(DenseOperator { matrix, layout })
    }

    /// Traces out the listed registers, keeping the rest in their current
    /// order.
    pub fn partial_trace(&self, traced: &[u32]) -> Result<Self> {
        let mut traced_pos = Vec::with_capacity(traced.len());
        for &id in traced {
            let pos = self.layout.position(id)?;
            if traced_pos.contains(&pos) {
                return Err(Error::DuplicateRegister(id));
            }
            traced_pos.push(pos);
        }
        let strides = self.layout.strides();
        let regs = self.layout.registers();
        let (kept, gone): (Vec<usize>, Vec<usize>) =
            (0..regs.len()).partition(|k| !traced_pos.contains(k));
        let kept_layout = RegisterLayout::new(kept.iter().map(|&k| regs[k]).collect())?;
        let kept_idx = flat_map(
            &kept.iter().map(|&k| regs[k].dim).collect::<Vec<_>>(),
            &kept.iter().map(|&k| strides[k]).collect::<Vec<_>>(),
        );
        let gone_idx = flat_map(
            &gone.iter().map(|&k| regs[k].dim).collect::<Vec<_>>(),
            &gone.iter().map(|&k| strides[k]).collect::<Vec<_>>(),
        );
        let m = kept_idx.len();
        let matrix = DMatrix::from_fn(m, m, |r, c| {
            gone_idx
                .iter()
                .map(|&t| self.matrix[(kept_idx[r] + t, kept_idx[c] + t)])
                .sum()
        });
        Ok(DenseOperator {
            matrix,
            layout: kept_layout,
        })
    }

    /// Transposes, in the standard basis, every register held by `party`.
    pub fn partial_transpose(&self, party: Party) -> Self {
        let strides = self.layout.strides();
        let regs = self.layout.registers();
        let (dims, tstrides): (Vec<usize>, Vec<usize>) = regs
            .iter()
            .zip(&strides)
            .filter(|(r, _)| r.party == party)
            .map(|(r, &s)| (r.dim, s))
            .unzip();
        let n = self.dim();
        // Component of each flat index carried by the transposed registers.
        let part: Vec<usize> = (0..n)
            .map(|i| {
                dims.iter()
                    .zip(&tstrides)
                    .map(|(&dim, &s)| (i / s) % dim * s)
                    .sum()
            })
            .collect();
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            let src_row = i - part[i] + part[j];
            let src_col = j - part[j] + part[i];
            self.matrix[(src_row, src_col)]
        });
        DenseOperator {
            matrix,
            layout: self.layout.clone(),
        }
    }

    pub fn to_dump(&self) -> MatrixDump {
        MatrixDump {
            schema: 1,
            layout: self.layout.clone(),
            dim: self.dim(),
            entries: (0..self.dim())
                .flat_map(|i| (0..self.dim()).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let z = self.matrix[(i, j)];
                    (z.re, z.im)
                })
                .collect(),
        }
    }

    pub fn from_dump(dump: &MatrixDump) -> Result<Self> {
        if dump.entries.len() != dump.dim * dump.dim {
            return Err(Error::LayoutMismatch(format!(
                "dump has {} entries for dimension {}",
                dump.entries.len(),
                dump.dim
            )));
        }
        let matrix = DMatrix::from_row_iterator(
            dump.dim,
            dump.dim,
            dump.entries.iter().map(|&(re, im)| C64::new(re, im)),
        );
        DenseOperator::new(matrix, dump.layout.clone())
    }
}

/// Row-major JSON dump of an operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDump {
    pub schema: u32,
    pub layout: RegisterLayout,
    pub dim: usize,
    pub entries: Vec<(f64, f64)>,
}

/// `tr_W[W · (F₁ ⊗ F₂ ⊗ …)]`: multiplies the product of `factors` by the
/// weight operator `W` on the registers it names and traces those registers
/// out, without materialising the full product.
///
/// The factors must act on disjoint registers and `W`'s registers must all
/// appear among them. The result lives on the remaining registers in
/// ascending id order.
pub fn weighted_partial_trace(weight: &DenseOperator, factors: &[&DenseOperator]) -> Result<DenseOperator> {
    let mut combined = RegisterLayout::new(Vec::new())?;
    for f in factors {
        combined = combined.concat(f.layout())?;
    }
    let weight_ids = weight.layout().ids();
    for &id in &weight_ids {
        combined.position(id)?;
    }
    let remaining = RegisterLayout::new(
        combined
            .ascending()
            .registers()
            .iter()
            .copied()
            .filter(|r| !weight_ids.contains(&r.id))
            .collect(),
    )?;

    // contribution[f][i]: flat index into factor f from the digits of a
    // basis index i of the sub-layout (weight or remaining).
    let contributions = |sub: &RegisterLayout| -> Vec<Vec<usize>> {
        factors
            .iter()
            .map(|f| {
                let strides = f.layout().strides();
                let sub_strides: Vec<usize> = sub
                    .registers()
                    .iter()
                    .map(|r| f.layout().position(r.id).map(|p| strides[p]).unwrap_or(0))
                    .collect();
                flat_map(&sub.dims(), &sub_strides)
            })
            .collect()
    };
    let from_weight = contributions(weight.layout());
    let from_rest = contributions(&remaining);

    let m = remaining.total_dim();
    let mut out = DMatrix::<C64>::zeros(m, m);
    let w = weight.matrix();
    for s in 0..weight.dim() {
        for s2 in 0..weight.dim() {
            let coeff = w[(s, s2)];
            if coeff.norm() == 0.0 {
                continue;
            }
            // (W X)[(s, r), (s, c)] summed over s, with X's row taken at s2.
            for r in 0..m {
                for c in 0..m {
                    let mut x = C64::new(1.0, 0.0);
                    for (k, f) in factors.iter().enumerate() {
                        let row = from_weight[k][s2] + from_rest[k][r];
                        let col = from_weight[k][s] + from_rest[k][c];
                        x *= f.matrix()[(row, col)];
                    }
                    out[(r, c)] += coeff * x;
                }
            }
        }
    }
    DenseOperator::new(out, remaining)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn op(n: usize, f: impl Fn(usize, usize) -> f64, ids: &[u32], d: usize) -> DenseOperator {
        DenseOperator::new(
            DMatrix::from_fn(n, n, |i, j| C64::new(f(i, j), 0.0)),
            RegisterLayout::uniform(ids, d).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let a = DenseOperator::identity(RegisterLayout::uniform(&[1], 2).unwrap());
        let b = a.relabel(&[2]).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.matrix(), &DMatrix::<C64>::identity(4, 4));
    }

    #[test]
    fn tensor_is_associative() {
        let a = op(2, |i, j| (i * 2 + j) as f64, &[1], 2);
        let b = op(3, |i, j| (i + 5 * j) as f64 - 1.0, &[2], 3);
        let c = op(2, |i, j| if i == j { 2.0 } else { -0.5 }, &[3], 2);
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn tensor_sorts_registers() {
        let a = op(2, |i, j| (i * 2 + j) as f64, &[3], 2);
        let b = op(2, |i, j| (i + 7 * j) as f64, &[1], 2);
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.layout().ids(), vec![1, 3]);
        assert_eq!(ab, b.tensor(&a).unwrap());
    }

    #[test]
    fn partial_trace_of_product_scales_partner() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, RegisterLayout::uniform(&[1, 2], 3).unwrap());
        let b = random_hermitian(&mut rng, RegisterLayout::uniform(&[5, 6], 3).unwrap());
        let ab = a.tensor(&b).unwrap();
        let reduced = ab.partial_trace(&[5, 6]).unwrap();
        let expected = a.scale(b.trace().re);
        assert!(reduced.max_abs_diff(&expected).unwrap() < 1e-12);
        let total = ab.partial_trace(&[1, 2, 5, 6]).unwrap();
        assert_eq!(total.dim(), 1);
        assert!((total.matrix()[(0, 0)] - ab.trace()).norm() < 1e-10);
    }

    #[test]
    fn partial_trace_unknown_register() {
        let a = DenseOperator::identity(RegisterLayout::numbered(2, 2));
        assert!(matches!(a.partial_trace(&[9]), Err(Error::UnknownRegister(9))));
    }

    #[test]
    fn partial_transpose_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = random_hermitian(&mut rng, RegisterLayout::numbered(2, 3));
            let t = m.partial_transpose(Party::Alice);
            assert!(t.hermiticity_error() <= 1e-12);
            assert!((t.trace() - m.trace()).norm() <= 1e-12);
            assert!(t.partial_transpose(Party::Alice).max_abs_diff(&m).unwrap() <= 1e-12);
        }
        let id = DenseOperator::identity(RegisterLayout::numbered(4, 2));
        assert_eq!(id.partial_transpose(Party::Alice), id);
    }

    #[test]
    fn full_transpose_when_both_parties() {
        let m = op(4, |i, j| (i * 4 + j) as f64, &[1, 2], 2);
        let t = m.partial_transpose(Party::Alice).partial_transpose(Party::Bob);
        assert_eq!(t.matrix(), &m.matrix().transpose());
    }

    #[test]
    fn permutation_round_trip_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_hermitian(&mut rng, RegisterLayout::numbered(3, 2));
        assert_eq!(m.permute_registers(&[1, 2, 3]).unwrap(), m);
        let p = m.permute_registers(&[3, 1, 2]).unwrap();
        assert_eq!(p.layout().ids(), vec![3, 1, 2]);
        assert_eq!(p.canonical().unwrap().max_abs_diff(&m).unwrap(), 0.0);
        assert!(matches!(
            m.permute_registers(&[1, 2]),
            Err(Error::NotAPermutation)
        ));
    }

    #[test]
    fn dump_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_hermitian(&mut rng, RegisterLayout::numbered(2, 2));
        let json = serde_json::to_string(&m.to_dump()).unwrap();
        let back = DenseOperator::from_dump(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn weighted_trace_matches_materialised_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_hermitian(&mut rng, RegisterLayout::numbered(2, 2));
        let b = random_hermitian(&mut rng, RegisterLayout::uniform(&[3, 4], 2).unwrap());
        let w = random_hermitian(&mut rng, RegisterLayout::uniform(&[1, 3], 2).unwrap());
        let fast = weighted_partial_trace(&w, &[&a, &b]).unwrap();

        let ab = a.tensor(&b).unwrap();
        let w_full = w
            .tensor(&DenseOperator::identity(RegisterLayout::uniform(&[2, 4], 2).unwrap()))
            .unwrap();
        let slow = w_full.mul(&ab).unwrap().partial_trace(&[1, 3]).unwrap();
        assert_eq!(fast.layout().ids(), vec![2, 4]);
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-12);
    }
}
