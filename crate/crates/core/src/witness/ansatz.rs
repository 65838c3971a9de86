use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// A vector of Schmidt rank at most two across an Alice/Bob cut, written
/// as `(U ⊗ I_B) c` with `U` a `d_A × 2` isometry and `c` a unit vector of
/// length `2 d_B` (index `k · d_B + b`).
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtRank2Ansatz {
    alice_isometry: DMatrix<C64>,
    coeffs: DVector<C64>,
}

impl SchmidtRank2Ansatz {
    pub fn new(alice_isometry: DMatrix<C64>, coeffs: DVector<C64>) -> Result<Self> {
        if alice_isometry.ncols() != 2 || alice_isometry.nrows() < 2 {
            return Err(Error::invalid(format!(
                "isometry must be d_A x 2 with d_A >= 2, got {}x{}",
                alice_isometry.nrows(),
                alice_isometry.ncols()
            )));
        }
        let gram = alice_isometry.adjoint() * &alice_isometry;
        let err = (gram - DMatrix::<C64>::identity(2, 2)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err > 1e-10 {
            return Err(Error::invalid(format!("isometry columns not orthonormal (error {err:e})")));
        }
        if !coeffs.len().is_multiple_of(2) {
            return Err(Error::invalid("coefficient vector length must be 2 d_B"));
        }
        let norm = coeffs.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitNorm(norm));
        }
        Ok(SchmidtRank2Ansatz { alice_isometry, coeffs })
    }

    pub fn alice_isometry(&self) -> &DMatrix<C64> {
        &self.alice_isometry
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    pub fn alice_dim(&self) -> usize {
        self.alice_isometry.nrows()
    }

    pub fn bob_dim(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// Alice-major amplitudes `ψ[a·d_B + b] = Σ_k U[a,k] c[k·d_B + b]`.
    pub fn vector(&self) -> DVector<C64> {
        embed(&self.alice_isometry, &self.coeffs)
    }
}

/// `(U ⊗ I_B)` as an explicit `(d_A d_B) × (2 d_B)` matrix.
pub(crate) fn lift(u: &DMatrix<C64>, d_b: usize) -> DMatrix<C64> {
    u.kronecker(&DMatrix::<C64>::identity(d_b, d_b))
}

pub(crate) fn embed(u: &DMatrix<C64>, c: &DVector<C64>) -> DVector<C64> {
    lift(u, c.len() / 2) * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random::{random_isometry, random_unit};
    use crate::tensor::{Bipartition, PureVector, RegisterLayout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn represented_vector_has_rank_at_most_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let layout = RegisterLayout::numbered(4, 3).reordered(&[1, 3, 2, 4]).unwrap();
        for _ in 0..20 {
            let ansatz = SchmidtRank2Ansatz::new(random_isometry(&mut rng, 9, 2), random_unit(&mut rng, 18)).unwrap();
            let v = PureVector::new(ansatz.vector(), layout.clone()).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-12);
            let cut = Bipartition { alice: vec![1, 3], bob: vec![2, 4] };
            assert!(v.schmidt_rank(&cut).unwrap() <= 2);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_isometry(&mut rng, 3, 2);
        assert!(SchmidtRank2Ansatz::new(u.clone(), random_unit(&mut rng, 6) * C64::new(2.0, 0.0)).is_err());
        assert!(SchmidtRank2Ansatz::new(u * C64::new(2.0, 0.0), random_unit(&mut rng, 6)).is_err());
    }
}
