//! Exact n-copy expansion of the partial transpose of `ρ(ε)` over `{P, Q}`
//! words, and checks of the coefficient claims it is used for.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::structured::{StructuredOperator, Word};
use super::symbol::Symbol;
use crate::rational::{format_rational, int, pow};
use crate::{Error, Result};

/// The constants `μ = (d+1)² + (d+1+ε)(d−1)` and `λ = 1 + (d+1+ε)/(d−1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuLambda {
    pub mu: BigRational,
    pub lambda: BigRational,
}

pub fn mu_lambda(d: usize, epsilon: &BigRational) -> Result<MuLambda> {
    if d < 3 {
        return Err(Error::invalid(format!("d must be at least 3, got {d}")));
    }
    if epsilon.is_negative() {
        return Err(Error::invalid("epsilon must be nonnegative"));
    }
    let d = int(d as i64);
    let shifted = &d + int(1) + epsilon;
    Ok(MuLambda {
        mu: pow(&(&d + int(1)), 2) + &shifted * (&d - int(1)),
        lambda: int(1) + shifted / (d - int(1)),
    })
}

/// `ρ(ε)` as two-position words over `{R, S}`.
pub fn rho_epsilon_words(d: usize, epsilon: &BigRational) -> Result<StructuredOperator> {
    if d < 3 {
        return Err(Error::invalid(format!("d must be at least 3, got {d}")));
    }
    let di = int(d as i64);
    let beta = (&di + int(1) + epsilon) / (di - int(1));
    StructuredOperator::from_terms(
        d,
        [
            (Word(vec![Symbol::R, Symbol::R]), beta),
            (Word(vec![Symbol::S, Symbol::S]), int(1)),
        ],
    )
}

/// Coefficients `α(x)` of `(T_A ρ(ε))^{⊗n} = 4^{-n} Σ_x α(x) Π_x`, with
/// `Π_0 = P`, `Π_1 = Q`. Indexed by `x` read as a big-endian binary number
/// of `2n` bits.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMap {
    pub d: usize,
    pub epsilon: BigRational,
    pub n: u32,
    pub alpha: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub x: String,
    pub num: String,
    pub den: String,
}

impl CoefficientMap {
    pub fn bits(&self) -> usize {
        2 * self.n as usize
    }

    pub fn bitstring(&self, x: usize) -> String {
        format!("{:0width$b}", x, width = self.bits())
    }

    pub fn get(&self, bits: &str) -> Option<&BigRational> {
        usize::from_str_radix(bits, 2).ok().and_then(|x| self.alpha.get(x))
    }

    pub fn entries(&self) -> Vec<CoefficientEntry> {
        self.alpha
            .iter()
            .enumerate()
            .map(|(x, a)| CoefficientEntry {
                x: self.bitstring(x),
                num: a.numer().to_string(),
                den: a.denom().to_string(),
            })
            .collect()
    }

    pub fn from_entries(d: usize, epsilon: BigRational, entries: &[CoefficientEntry]) -> Result<Self> {
        let bits = entries.first().map(|e| e.x.len()).unwrap_or(0);
        if bits == 0 || !bits.is_multiple_of(2) || entries.len() != 1 << bits {
            return Err(Error::invalid("coefficient entries do not cover {0,1}^{2n}"));
        }
        let mut alpha = vec![BigRational::zero(); entries.len()];
        for e in entries {
            let x = usize::from_str_radix(&e.x, 2).map_err(|_| Error::invalid(format!("bad bitstring '{}'", e.x)))?;
            let num: BigInt = e.num.parse().map_err(|_| Error::invalid("bad numerator"))?;
            let den: BigInt = e.den.parse().map_err(|_| Error::invalid("bad denominator"))?;
            if den.is_zero() {
                return Err(Error::invalid("zero denominator"));
            }
            alpha[x] = BigRational::new(num, den);
        }
        Ok(CoefficientMap {
            d,
            epsilon,
            n: (bits / 2) as u32,
            alpha,
        })
    }

    /// Evaluates the coefficient claims exactly.
    pub fn check(&self) -> Result<CoefficientCheck> {
        let ml = mu_lambda(self.d, &self.epsilon)?;
        let all_p = 0;
        let all_q = self.alpha.len() - 1;
        let mu_n = pow(&ml.mu, self.n);
        let lambda_n = pow(&ml.lambda, self.n);
        let bound = &self.epsilon * pow(&ml.mu, self.n - 1);
        let mut check = CoefficientCheck {
            mu_corner: self.alpha[all_p] == mu_n,
            lambda_corner: self.alpha[all_q] == lambda_n,
            bound: format_rational(&bound),
            abs_bound_violations: 0,
            first_abs_violation: None,
            lower_bound_violations: 0,
            first_lower_violation: None,
            checked_words: 0,
        };
        for (x, a) in self.alpha.iter().enumerate() {
            if x == all_p || x == all_q {
                continue;
            }
            check.checked_words += 1;
            if a.abs() > bound {
                check.abs_bound_violations += 1;
                check
                    .first_abs_violation
                    .get_or_insert_with(|| (self.bitstring(x), format_rational(a)));
            }
            if *a < -bound.clone() {
                check.lower_bound_violations += 1;
                check
                    .first_lower_violation
                    .get_or_insert_with(|| (self.bitstring(x), format_rational(a)));
            }
        }
        Ok(check)
    }
}

/// Result of checking `α(0^{2n}) = μⁿ`, `α(1^{2n}) = λⁿ` and the bound
/// `εμ^{n−1}` on every other word, both as a two-sided bound on `|α(x)|`
/// and as the one-sided bound `α(x) ≥ −εμ^{n−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub mu_corner: bool,
    pub lambda_corner: bool,
    /// `εμ^{n−1}` as `p/q`.
    pub bound: String,
    pub checked_words: usize,
    pub abs_bound_violations: usize,
    pub first_abs_violation: Option<(String, String)>,
    pub lower_bound_violations: usize,
    pub first_lower_violation: Option<(String, String)>,
}

impl CoefficientCheck {
    pub fn corners_hold(&self) -> bool {
        self.mu_corner && self.lambda_corner
    }

    /// Corners plus `|α(x)| ≤ εμ^{n−1}`.
    pub fn abs_bound_holds(&self) -> bool {
        self.corners_hold() && self.abs_bound_violations == 0
    }

    /// Corners plus `α(x) ≥ −εμ^{n−1}`, the form the positivity bound
    /// actually needs: positive coefficients multiply positive
    /// semidefinite words and can only raise the expectation.
    pub fn lower_bound_holds(&self) -> bool {
        self.corners_hold() && self.lower_bound_violations == 0
    }
}

/// Computes the n-copy coefficient map through the structured algebra:
/// substitute the partial transpose into the `{R, S}` words of `ρ(ε)`,
/// take the n-th tensor power, and rescale by `4ⁿ`.
pub fn n_copy_pt_coeffs(d: usize, epsilon: &BigRational, n: u32, budget: usize) -> Result<CoefficientMap> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let needed = 4u128.checked_pow(n).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::TermBudget { budget, needed });
    }
    let single = rho_epsilon_words(d, epsilon)?.pt_substitute();
    let power = single.tensor_power(n, budget)?;
    let scale = pow(&int(4), n);
    let bits = 2 * n as usize;
    let mut alpha = vec![BigRational::zero(); 1 << bits];
    for (word, coeff) in power.terms() {
        let mut x = 0usize;
        for s in &word.0 {
            x <<= 1;
            match s {
                Symbol::P => {}
                Symbol::Q => x |= 1,
                other => {
                    return Err(Error::invalid(format!("unexpected symbol {other} in transposed expansion")));
                }
            }
        }
        alpha[x] = coeff * &scale;
    }
    Ok(CoefficientMap {
        d,
        epsilon: epsilon.clone(),
        n,
        alpha,
    })
}
