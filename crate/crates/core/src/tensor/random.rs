//! Random draws used by tests and by the witness search restarts.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::layout::RegisterLayout;
use super::operator::DenseOperator;
use super::vector::PureVector;
use crate::C64;

/// Standard complex normal: real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed `rows × cols` isometry (orthonormal columns).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    orthonormalize(gaussian_matrix(rng, rows, cols))
}

/// Orthonormal columns spanning the same space, with the phase convention
/// that makes a QR-based draw Haar distributed.
pub fn orthonormalize(m: DMatrix<C64>) -> DMatrix<C64> {
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..q.ncols() {
        let diag = r[(k, k)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Uniformly random unit vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<C64> {
    let v = DVector::from_fn(len, |_, _| complex_normal(rng));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, layout: RegisterLayout) -> PureVector {
    let v = random_unit(rng, layout.total_dim());
    PureVector::new(v, layout).expect("length matches")
}

/// GUE-like Hermitian operator.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, layout: RegisterLayout) -> DenseOperator {
    let n = layout.total_dim();
    let g = gaussian_matrix(rng, n, n);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    DenseOperator::new(h, layout).expect("dimension matches")
}
