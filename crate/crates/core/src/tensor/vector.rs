use nalgebra::{DMatrix, DVector};

use super::layout::{Bipartition, RegisterLayout};
use super::operator::DenseOperator;
use super::SCHMIDT_TOL;
use crate::{Error, Result, C64};

/// State vector over a register layout. Never renormalised implicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct PureVector {
    amplitudes: DVector<C64>,
    layout: RegisterLayout,
}

impl PureVector {
    pub fn new(amplitudes: DVector<C64>, layout: RegisterLayout) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::LayoutMismatch(format!(
                "vector has length {} but layout dimension is {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        Ok(PureVector { amplitudes, layout })
    }

    /// Basis state with the given digits (0-based) on each register.
    pub fn basis(layout: RegisterLayout, digits: &[usize]) -> Self {
        let mut amplitudes = DVector::zeros(layout.total_dim());
        amplitudes[layout.index_of(digits)] = C64::new(1.0, 0.0);
        PureVector { amplitudes, layout }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: C64) -> Self {
        PureVector {
            amplitudes: &self.amplitudes * factor,
            layout: self.layout.clone(),
        }
    }

    pub fn add(&self, other: &PureVector) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("vector layouts differ".into()));
        }
        Ok(PureVector {
            amplitudes: &self.amplitudes + &other.amplitudes,
            layout: self.layout.clone(),
        })
    }

    /// Conjugate-linear in `self`.
    pub fn inner(&self, other: &PureVector) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("vector layouts differ".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &PureVector) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let v = PureVector {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            layout,
        };
        if v.layout.is_ascending() {
            Ok(v)
        } else {
            let ordering = v.layout.ascending().ids();
            v.permute_registers(&ordering)
        }
    }

    pub fn permute_registers(&self, ordering: &[u32]) -> Result<Self> {
        let layout = self.layout.reordered(ordering)?;
        let map = self.layout.index_map_from(&layout)?;
        let amplitudes = DVector::from_iterator(map.len(), map.iter().map(|&i| self.amplitudes[i]));
        Ok(PureVector { amplitudes, layout })
    }

    /// `|v⟩⟨v|`.
    pub fn projector(&self) -> DenseOperator {
        let matrix = &self.amplitudes * self.amplitudes.adjoint();
        DenseOperator::new(matrix, self.layout.clone()).expect("same layout")
    }

    /// Coefficient matrix with Alice's index on rows and Bob's on columns.
    pub fn cut_matrix(&self, cut: &Bipartition) -> Result<DMatrix<C64>> {
        let (d_a, d_b) = cut.side_dims(&self.layout)?;
        let arranged = self.permute_registers(&cut.ordering())?;
        Ok(DMatrix::from_row_iterator(d_a, d_b, arranged.amplitudes.iter().copied()))
    }

    /// Singular values of the coefficient matrix across `cut`, nonincreasing.
    pub fn schmidt_values(&self, cut: &Bipartition) -> Result<Vec<f64>> {
        if self.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        let m = self.cut_matrix(cut)?;
        let mut values: Vec<f64> = m.singular_values().iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    pub fn schmidt_rank(&self, cut: &Bipartition) -> Result<usize> {
        self.schmidt_rank_with_tol(cut, SCHMIDT_TOL)
    }

    pub fn schmidt_rank_with_tol(&self, cut: &Bipartition, tol: f64) -> Result<usize> {
        Ok(self
            .schmidt_values(cut)?
            .into_iter()
            .filter(|&s| s > tol)
            .count())
    }
}

/// `⟨v|M|v⟩` without any normalisation.
pub fn quadratic_form(m: &DenseOperator, v: &PureVector) -> Result<C64> {
    if m.layout() != v.layout() {
        return Err(Error::LayoutMismatch(format!(
            "operator on {:?}, vector on {:?}",
            m.layout().ids(),
            v.layout().ids()
        )));
    }
    Ok(v.amplitudes().dotc(&(m.matrix() * v.amplitudes())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random::random_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layout2(d: usize) -> RegisterLayout {
        RegisterLayout::numbered(2, d)
    }

    #[test]
    fn product_state_has_rank_one() {
        let v = PureVector::basis(layout2(3), &[0, 0]);
        let cut = Bipartition::by_party(v.layout());
        assert_eq!(v.schmidt_rank(&cut).unwrap(), 1);
    }

    #[test]
    fn zero_vector_rejected() {
        let v = PureVector::new(DVector::zeros(9), layout2(3)).unwrap();
        let cut = Bipartition::by_party(v.layout());
        assert!(matches!(v.schmidt_values(&cut), Err(Error::ZeroVector)));
    }

    #[test]
    fn schmidt_values_square_to_norm_and_are_cut_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v = random_vector(&mut rng, RegisterLayout::numbered(4, 2));
            let cut = Bipartition::by_party(v.layout());
            let s = v.schmidt_values(&cut).unwrap();
            let sum: f64 = s.iter().map(|x| x * x).sum();
            assert!((sum - v.norm().powi(2)).abs() < 1e-10);
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(
                v.schmidt_rank(&cut).unwrap(),
                v.schmidt_rank(&cut.swapped()).unwrap()
            );
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(PureVector::new(DVector::zeros(3), layout2(2)).is_err());
    }
}
