use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::operator::DenseOperator;
use super::vector::PureVector;
use super::{EIGEN_RESIDUAL_TOL, HERMITIAN_INPUT_TOL};
use crate::{Error, Result, C64};

/// Hermitian part `(M + M†)/2` of a matrix.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Smallest eigenvalue and a unit eigenvector of a small Hermitian matrix.
/// The input is symmetrised first; no Hermiticity check.
pub(crate) fn min_eigen_raw(m: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let (k, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    (value, eig.eigenvectors.column(k).into_owned())
}

fn check_hermitian(m: &DenseOperator) -> Result<()> {
    let err = m.hermiticity_error();
    if err > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

/// All eigenvalues of a Hermitian operator in ascending order.
pub fn eigenvalues(m: &DenseOperator) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let mut values: Vec<f64> = SymmetricEigen::new(hermitian_part(m.matrix()))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Smallest eigenvalue with a unit eigenvector. Within a degenerate
/// eigenspace any vector may be returned.
pub fn min_eigenpair(m: &DenseOperator) -> Result<(f64, PureVector)> {
    check_hermitian(m)?;
    let (value, vector) = min_eigen_raw(m.matrix());
    let residual = (m.matrix() * &vector - &vector * C64::new(value, 0.0)).norm();
    if residual > EIGEN_RESIDUAL_TOL {
        return Err(Error::EigenResidual(residual));
    }
    Ok((value, PureVector::new(vector, m.layout().clone())?))
}
