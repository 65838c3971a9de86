use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::pq::mu_lambda;
use crate::rational::{int, pow, ratio};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundParams {
    pub d: usize,
    pub n: u32,
    pub epsilon: BigRational,
}

impl BoundParams {
    pub fn new(d: usize, n: u32, epsilon: BigRational) -> Result<Self> {
        if d < 3 {
            return Err(Error::invalid(format!("d must be at least 3, got {d}")));
        }
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if epsilon.is_negative() {
            return Err(Error::invalid("epsilon must be nonnegative"));
        }
        Ok(BoundParams { d, n, epsilon })
    }
}

/// Lower bound `(λⁿ/4ⁿ)(1 − 2/d)^{2n} − εμ^{n−1}` on the n-copy witness
/// value of any unit Schmidt-rank-2 vector.
pub fn n_copy_bound(params: &BoundParams) -> Result<BigRational> {
    let ml = mu_lambda(params.d, &params.epsilon)?;
    let n = params.n;
    let overlap = int(1) - ratio(2, params.d as i64);
    let positive = pow(&ml.lambda, n) / pow(&int(4), n) * pow(&overlap, 2 * n);
    Ok(positive - &params.epsilon * pow(&ml.mu, n - 1))
}

/// Largest ε found by exact bisection with `B(d, n, ε) > 0` and
/// `B(d, n, ε + precision) ≤ 0`.
pub fn epsilon_threshold(d: usize, n: u32, precision: &BigRational) -> Result<BigRational> {
    if !precision.is_positive() {
        return Err(Error::invalid("precision must be positive"));
    }
    let bound = |eps: &BigRational| n_copy_bound(&BoundParams::new(d, n, eps.clone())?);
    let mut lo = BigRational::zero();
    if !bound(&lo)?.is_positive() {
        return Err(Error::invalid(format!("bound is not positive at epsilon = 0 for d={d}, n={n}")));
    }
    let mut hi = int(1);
    while bound(&hi)?.is_positive() {
        hi *= int(2);
    }
    while &hi - &lo > *precision {
        let mid = (&lo + &hi) / int(2);
        if bound(&mid)?.is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
