//! The iterated measure-and-filter distillation procedure.
//!
//! Registers `X₁…X₄` hold `α R₁₂⊗R₃₄ + S₁₂⊗S₃₄` and `X₅…X₈` hold a fresh
//! copy of `ρ(ε)`. Alice measures `(X₁, X₅)` and Bob `(X₂, X₆)` with
//! `{P, Q}`; on the double-`P` outcome the surviving registers hold the
//! same family with `α ← α(1 + ε/(d+1))`, on any other outcome everything
//! is discarded and the process restarts from two fresh copies. Once `α`
//! exceeds 3 the canonical rank-2 vector certifies 1-distillability.
//!
//! The simulation tracks only the scalar `α`; [`dense_filter_step`] realises
//! one step on explicit matrices for validation.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::families::{alpha_state, projector_set, rho_epsilon, RhoEpsilonParams};
use crate::pq::Symbol;
use crate::rational::{int, pow, serde_pq, to_f64};
use crate::tensor::{weighted_partial_trace, DenseOperator, Party, HERMITIAN_TOL};
use crate::witness::{canonical_phi, transposed_form};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub d: usize,
    #[serde(with = "serde_pq")]
    pub epsilon: BigRational,
    /// A run stops once `α` exceeds this value.
    #[serde(with = "serde_pq", default = "default_target")]
    pub target: BigRational,
    #[serde(default)]
    pub master_seed: u64,
    /// Cap on iterations per run.
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    #[serde(default = "default_true")]
    pub record_trajectory: bool,
}

fn default_target() -> BigRational {
    int(3)
}

fn default_max_rounds() -> u64 {
    1_000_000
}

fn default_true() -> bool {
    true
}

impl ProtocolConfig {
    pub fn new(d: usize, epsilon: BigRational, master_seed: u64) -> Result<Self> {
        let config = ProtocolConfig {
            d,
            epsilon,
            target: default_target(),
            master_seed,
            max_rounds: default_max_rounds(),
            record_trajectory: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return Err(Error::invalid(format!("d must be at least 3, got {}", self.d)));
        }
        if !self.epsilon.is_positive() {
            return Err(Error::invalid("epsilon must be strictly positive"));
        }
        if self.target < int(3) {
            return Err(Error::invalid("target must be at least 3"));
        }
        Ok(())
    }

    /// Reset value `(d+1+ε)/(d−1)`.
    pub fn beta(&self) -> BigRational {
        beta(self.d, &self.epsilon)
    }

    /// Per-success growth factor `1 + ε/(d+1)`.
    pub fn growth(&self) -> BigRational {
        growth(self.d, &self.epsilon)
    }
}

fn beta(d: usize, epsilon: &BigRational) -> BigRational {
    let d = int(d as i64);
    (&d + int(1) + epsilon) / (d - int(1))
}

fn growth(d: usize, epsilon: &BigRational) -> BigRational {
    int(1) + epsilon / int(d as i64 + 1)
}

/// Probability that both parties obtain `P` when `X₁…X₄` hold the `α`
/// state and `X₅…X₈` hold `ρ(ε)`, as the ratio of the post-measurement
/// trace to the product of input traces.
pub fn success_probability(alpha: f64, d: usize, epsilon: f64) -> f64 {
    let df = d as f64;
    let t_r = df * (df - 1.0) / 2.0;
    let t_s = df * (df + 1.0) / 2.0;
    let beta = (df + 1.0 + epsilon) / (df - 1.0);
    let grown = alpha * (1.0 + epsilon / (df + 1.0));
    let kept = (df + 1.0) / (2.0 * df) * (grown * t_r * t_r + t_s * t_s);
    kept / ((alpha * t_r * t_r + t_s * t_s) * (beta * t_r * t_r + t_s * t_s))
}

/// One filter step on explicit matrices: returns the unnormalised state of
/// `(X₃, X₄, X₇, X₈)` after the double-`P` outcome and the outcome
/// probability.
pub fn dense_filter_step(alpha: f64, d: usize, epsilon: &BigRational) -> Result<(DenseOperator, f64)> {
    let first = alpha_state(d, alpha)?;
    let second = rho_epsilon(&RhoEpsilonParams::new(d, epsilon.clone())?)?.relabel(&[5, 6, 7, 8])?;
    let set = projector_set(d)?;
    let filter = set.on(Symbol::P, 1, 5)?.tensor(&set.on(Symbol::P, 2, 6)?)?;
    let post = weighted_partial_trace(&filter, &[&first, &second])?;
    let probability = post.trace().re / (first.trace().re * second.trace().re);
    Ok((post, probability))
}

/// `tr((P₁₃⊗P₂₄)(X₁₂⊗Y₃₄))` for `(X, Y)` in `RR, RS, SR, SS` order.
pub fn filter_traces(d: usize) -> Result<[f64; 4]> {
    let set = projector_set(d)?;
    let filter = set.on(Symbol::P, 1, 3)?.tensor(&set.on(Symbol::P, 2, 4)?)?;
    let pairs = [(Symbol::R, Symbol::R), (Symbol::R, Symbol::S), (Symbol::S, Symbol::R), (Symbol::S, Symbol::S)];
    let mut out = [0.0; 4];
    for (slot, (x, y)) in out.iter_mut().zip(pairs) {
        let product = set.on(x, 1, 2)?.tensor(&set.on(y, 3, 4)?)?;
        // tr(AB) = Σ A_ij B_ji
        *slot = filter.matrix().component_mul(&product.matrix().transpose()).sum().re;
    }
    Ok(out)
}

/// Closed form of the post-measurement state,
/// `((d+1)/(2d)) (α(1+ε/(d+1)) R₃₄⊗R₇₈ + S₃₄⊗S₇₈)`.
pub fn filtered_state_closed_form(alpha: f64, d: usize, epsilon: f64) -> Result<DenseOperator> {
    let set = projector_set(d)?;
    let df = d as f64;
    let rr = set.on(Symbol::R, 3, 4)?.tensor(&set.on(Symbol::R, 7, 8)?)?;
    let ss = set.on(Symbol::S, 3, 4)?.tensor(&set.on(Symbol::S, 7, 8)?)?;
    let scale = (df + 1.0) / (2.0 * df);
    rr.combine(scale * alpha * (1.0 + epsilon / (df + 1.0)), &ss, scale)
}

/// Source of measurement outcomes.
pub trait OutcomeSampler {
    /// Returns true (success) with probability `p`.
    fn draw(&mut self, p: f64) -> bool;
}

/// Samples outcomes from any random generator.
pub struct RngSampler<R>(pub R);

impl<R: Rng> OutcomeSampler for RngSampler<R> {
    fn draw(&mut self, p: f64) -> bool {
        self.0.random::<f64>() < p
    }
}

/// Every measurement succeeds.
pub struct AlwaysSucceed;

impl OutcomeSampler for AlwaysSucceed {
    fn draw(&mut self, _p: f64) -> bool {
        true
    }
}

/// Generator for run `index` of a seeded batch.
pub fn run_sampler(master_seed: u64, index: u64) -> RngSampler<ChaCha20Rng> {
    RngSampler(crate::witness::search::restart_rng(master_seed, index as usize))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationOutcome {
    pub success: bool,
    pub alpha_before: f64,
    pub alpha_after: f64,
    pub p_success: f64,
}

/// One iteration from state `α`: success multiplies `α` by `1 + ε/(d+1)`,
/// failure resets it to `(d+1+ε)/(d−1)`.
pub fn iterate_once(alpha: f64, d: usize, epsilon: f64, sampler: &mut dyn OutcomeSampler) -> IterationOutcome {
    let df = d as f64;
    let p_success = success_probability(alpha, d, epsilon);
    let success = sampler.draw(p_success);
    let alpha_after = if success {
        alpha * (1.0 + epsilon / (df + 1.0))
    } else {
        (df + 1.0 + epsilon) / (df - 1.0)
    };
    IterationOutcome {
        success,
        alpha_before: alpha,
        alpha_after,
        p_success,
    }
}

/// Smallest `k ≥ 0` with `β (1 + ε/(d+1))^k > target`, exactly.
pub fn k_threshold(d: usize, epsilon: &BigRational, target: &BigRational) -> Result<u32> {
    if d < 3 {
        return Err(Error::invalid(format!("d must be at least 3, got {d}")));
    }
    if !epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be strictly positive"));
    }
    let factor = growth(d, epsilon);
    let mut value = beta(d, epsilon);
    let mut k = 0;
    while value <= *target {
        value *= &factor;
        k += 1;
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub run: u64,
    /// Iterations attempted.
    pub rounds: u64,
    pub restarts: u64,
    pub copies_consumed: u64,
    pub k_needed: u32,
    pub terminated: bool,
    pub final_alpha: f64,
    /// `⟨φ|T_A(·)|φ⟩` of the final state for the unnormalised canonical φ;
    /// present only for terminated runs.
    pub final_witness_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<IterationOutcome>,
}

/// Runs the restart-on-failure loop with outcomes from `sampler`.
///
/// Copy accounting: the initial fill of `X₁…X₄` costs one copy, every
/// iteration consumes a fresh copy in `X₅…X₈`, and every failure refills
/// `X₁…X₄` with one more.
pub fn simulate_run_with(config: &ProtocolConfig, run: u64, sampler: &mut dyn OutcomeSampler) -> Result<RunStats> {
    config.validate()?;
    let k = k_threshold(config.d, &config.epsilon, &config.target)?;
    let eps = to_f64(&config.epsilon);
    let growth = config.growth();
    let beta = config.beta();
    // α after s consecutive successes, computed exactly.
    let alphas: Vec<f64> = (0..=k).map(|s| to_f64(&(&beta * pow(&growth, s)))).collect();
    let probabilities: Vec<f64> = alphas.iter().map(|&a| success_probability(a, config.d, eps)).collect();

    let mut stats = RunStats {
        run,
        rounds: 0,
        restarts: 0,
        copies_consumed: 1,
        k_needed: k,
        terminated: false,
        final_alpha: alphas[0],
        final_witness_value: None,
        trajectory: Vec::new(),
    };
    let mut streak = 0usize;
    while streak < k as usize {
        if stats.rounds >= config.max_rounds {
            return Ok(stats);
        }
        stats.rounds += 1;
        stats.copies_consumed += 1;
        let p_success = probabilities[streak];
        let success = sampler.draw(p_success);
        let before = alphas[streak];
        if success {
            streak += 1;
        } else {
            streak = 0;
            stats.restarts += 1;
            stats.copies_consumed += 1;
        }
        if config.record_trajectory {
            stats.trajectory.push(IterationOutcome {
                success,
                alpha_before: before,
                alpha_after: alphas[streak],
                p_success,
            });
        }
        stats.final_alpha = alphas[streak];
    }
    stats.terminated = true;
    stats.final_witness_value = Some(certify_final(stats.final_alpha, config.d)?);
    Ok(stats)
}

/// Run `run` of the batch keyed by `config.master_seed`.
pub fn simulate_run(config: &ProtocolConfig, run: u64) -> Result<RunStats> {
    simulate_run_with(config, run, &mut run_sampler(config.master_seed, run))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopyStatistics {
    pub trials: u64,
    pub terminated: u64,
    /// Mean copies over terminated runs.
    pub mean: f64,
    pub standard_error: f64,
    /// Closed-form expectation for comparison.
    pub expected: f64,
}

/// Sample mean and standard error of copies consumed over `trials`
/// independent runs (run indices `0..trials`). Unterminated runs are
/// counted but excluded from the mean.
pub fn expected_copies(config: &ProtocolConfig, trials: u64) -> Result<(CopyStatistics, Vec<RunStats>)> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let mut quiet = config.clone();
    quiet.record_trajectory = false;
    let runs: Vec<RunStats> = (0..trials)
        .into_par_iter()
        .map(|i| simulate_run(&quiet, i))
        .collect::<Result<_>>()?;
    let copies: Vec<f64> = runs
        .iter()
        .filter(|r| r.terminated)
        .map(|r| r.copies_consumed as f64)
        .collect();
    let n = copies.len() as f64;
    let mean = if copies.is_empty() { f64::NAN } else { copies.iter().sum::<f64>() / n };
    let standard_error = if copies.len() < 2 {
        if copies.len() == 1 { 0.0 } else { f64::NAN }
    } else {
        let var = copies.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    Ok((
        CopyStatistics {
            trials,
            terminated: copies.len() as u64,
            mean,
            standard_error,
            expected: analytic_expected_copies(config)?,
        },
        runs,
    ))
}

/// Expected copies consumed by a run, from the streak chain with
/// per-position success probabilities `p_s`:
/// `E[iterations] = Σ_{j<k} Π_{i<j} p_i / Π_{i<k} p_i`,
/// `E[failures] = 1/Π p_i − 1`, and copies = 1 + iterations + failures.
pub fn analytic_expected_copies(config: &ProtocolConfig) -> Result<f64> {
    config.validate()?;
    let k = k_threshold(config.d, &config.epsilon, &config.target)?;
    let eps = to_f64(&config.epsilon);
    let beta = config.beta();
    let growth = config.growth();
    let mut prefix = 1.0;
    let mut numerator = 0.0;
    for s in 0..k {
        numerator += prefix;
        let alpha = (&beta * pow(&growth, s)).to_f64().unwrap_or(f64::INFINITY);
        prefix *= success_probability(alpha, config.d, eps);
    }
    Ok(numerator / prefix + 1.0 / prefix)
}

/// Checks the four-term expansion
/// `T_A(αR⊗R + S⊗S) = ((α+1)/4) I⊗I − ((α−1)d/4)(I⊗P + P⊗I) + ((α+1)d²/4) P⊗P`
/// densely and returns `⟨φ|T_A(αR⊗R + S⊗S)|φ⟩ = (3 − α)/2` for the
/// unnormalised canonical φ.
pub fn certify_final(alpha: f64, d: usize) -> Result<f64> {
    let state = alpha_state(d, alpha)?;
    let transposed = state.partial_transpose(Party::Alice);
    let set = projector_set(d)?;
    let id12 = set.identity();
    let id34 = id12.relabel(&[3, 4])?;
    let p34 = set.on(Symbol::P, 3, 4)?;
    let df = d as f64;
    let cross = -(alpha - 1.0) * df / 4.0;
    let expansion = id12
        .tensor(&id34)?
        .combine((alpha + 1.0) / 4.0, &id12.tensor(&p34)?, cross)?
        .combine(1.0, &set.p.tensor(&id34)?, cross)?
        .combine(1.0, &set.p.tensor(&p34)?, (alpha + 1.0) * df * df / 4.0)?;
    let deviation = transposed.max_abs_diff(&expansion)?;
    if deviation > HERMITIAN_TOL {
        return Err(Error::ExpansionMismatch(deviation));
    }
    transposed_form(&state, &canonical_phi(d)?, Party::Alice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn closed_form_probability_matches_dense_oracle() {
        let (post, p) = dense_filter_step(2.5, 3, &int(1)).unwrap();
        assert!((p - 19.0 / 1521.0).abs() < 1e-14);
        assert!((success_probability(2.5, 3, 1.0) - p).abs() < 1e-14);
        let expected = filtered_state_closed_form(2.5, 3, 1.0).unwrap();
        assert_eq!(post.layout().ids(), vec![3, 4, 7, 8]);
        assert!(post.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn filter_trace_values() {
        for d in 3..=5 {
            let df = d as f64;
            let values = filter_traces(d).unwrap();
            assert!((values[0] - (df - 1.0) / (2.0 * df)).abs() < 1e-14);
            assert!(values[1].abs() < 1e-14 && values[2].abs() < 1e-14);
            assert!((values[3] - (df + 1.0) / (2.0 * df)).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_oracle_at_random_parameters() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..20 {
            let alpha = rng.random_range(0.0..8.0);
            let eps = ratio(rng.random_range(1..40), rng.random_range(1..20));
            let (_, p) = dense_filter_step(alpha, 3, &eps).unwrap();
            assert!((success_probability(alpha, 3, to_f64(&eps)) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn probability_is_scale_free_and_bounded() {
        for alpha in [0.0, 0.3, 2.5, 3.1, 10.0] {
            let p = success_probability(alpha, 3, 0.5);
            assert!(p > 0.0 && p <= 1.0);
        }
        // The dense oracle with the first state rescaled gives the same ratio.
        let (post, p) = dense_filter_step(4.0, 3, &ratio(1, 3)).unwrap();
        let first = alpha_state(3, 4.0).unwrap().scale(7.5);
        let second = rho_epsilon(&RhoEpsilonParams::new(3, ratio(1, 3)).unwrap())
            .unwrap()
            .relabel(&[5, 6, 7, 8])
            .unwrap();
        let set = projector_set(3).unwrap();
        let filter = set.on(Symbol::P, 1, 5).unwrap().tensor(&set.on(Symbol::P, 2, 6).unwrap()).unwrap();
        let scaled = weighted_partial_trace(&filter, &[&first, &second]).unwrap();
        let q = scaled.trace().re / (first.trace().re * second.trace().re);
        assert!((p - q).abs() < 1e-14);
        assert!((scaled.trace().re - 7.5 * post.trace().re).abs() < 1e-10);
    }

    #[test]
    fn iterate_branches() {
        let ok = iterate_once(2.5, 3, 1.0, &mut AlwaysSucceed);
        assert!(ok.success);
        assert!((ok.alpha_after - 25.0 / 8.0).abs() < 1e-15);
        struct Never;
        impl OutcomeSampler for Never {
            fn draw(&mut self, _: f64) -> bool {
                false
            }
        }
        let fail = iterate_once(3.0, 3, 1.0, &mut Never);
        assert!(!fail.success);
        assert_eq!(fail.alpha_after, 2.5);
        let mut alpha = 2.5;
        for _ in 0..5 {
            alpha = iterate_once(alpha, 3, 1.0, &mut AlwaysSucceed).alpha_after;
        }
        assert!((alpha - 2.5 * 1.25f64.powi(5)).abs() < 1e-12);
    }

    #[test]
    fn k_threshold_examples() {
        assert_eq!(k_threshold(3, &int(1), &int(3)).unwrap(), 1);
        // (41/20)(41/40)^k crosses 3 between k = 15 and k = 16.
        assert_eq!(k_threshold(3, &ratio(1, 10), &int(3)).unwrap(), 16);
        let b = beta(3, &ratio(1, 10));
        let f = growth(3, &ratio(1, 10));
        assert!(&b * pow(&f, 15) <= int(3));
        assert!(&b * pow(&f, 16) > int(3));
        assert_eq!(k_threshold(3, &int(1), &int(2)).unwrap(), 0);
        assert!(k_threshold(3, &int(0), &int(3)).is_err());
    }

    #[test]
    fn forced_success_consumes_k_plus_one() {
        for eps in [int(1), ratio(1, 10), ratio(1, 2)] {
            let config = ProtocolConfig::new(3, eps.clone(), 0).unwrap();
            let stats = simulate_run_with(&config, 0, &mut AlwaysSucceed).unwrap();
            let k = k_threshold(3, &eps, &int(3)).unwrap();
            assert!(stats.terminated);
            assert_eq!(stats.copies_consumed, k as u64 + 1);
            assert!(stats.final_alpha > 3.0);
            assert!(stats.final_witness_value.unwrap() < 0.0);
        }
    }

    #[test]
    fn seeded_runs_are_reproducible_and_certified() {
        let config = ProtocolConfig::new(3, int(1), 7).unwrap();
        let a = simulate_run(&config, 0).unwrap();
        let b = simulate_run(&config, 0).unwrap();
        assert_eq!(a, b);
        assert!(a.terminated);
        assert_eq!(a.final_alpha, 25.0 / 8.0);
        assert!((a.final_witness_value.unwrap() + 1.0 / 16.0).abs() < 1e-12);
        assert_eq!(a.copies_consumed, 1 + a.rounds + a.restarts);
        assert_eq!(a.trajectory.len() as u64, a.rounds);
    }

    #[test]
    fn round_cap_leaves_run_unterminated() {
        let mut config = ProtocolConfig::new(3, ratio(1, 10), 1).unwrap();
        config.max_rounds = 50;
        let stats = simulate_run(&config, 0).unwrap();
        assert!(!stats.terminated);
        assert_eq!(stats.rounds, 50);
        assert!(stats.final_witness_value.is_none());
    }

    #[test]
    fn analytic_copies_for_single_success() {
        // k = 1: copies = 2N with N geometric of mean 1/p.
        let config = ProtocolConfig::new(3, int(1), 0).unwrap();
        let p = success_probability(2.5, 3, 1.0);
        assert!((analytic_expected_copies(&config).unwrap() - 2.0 / p).abs() < 1e-9);
        let mut easy = config.clone();
        easy.target = int(3);
        easy.epsilon = int(7);
        assert_eq!(k_threshold(3, &easy.epsilon, &easy.target).unwrap(), 0);
        assert_eq!(analytic_expected_copies(&easy).unwrap(), 1.0);
    }

    #[test]
    fn certify_examples() {
        assert!((certify_final(25.0 / 8.0, 3).unwrap() + 0.0625).abs() < 1e-12);
        assert!(certify_final(3.0, 3).unwrap().abs() < 1e-12);
        assert!((certify_final(5.0, 3).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_json_uses_rational_strings() {
        let config = ProtocolConfig::new(3, ratio(1, 10), 5).unwrap();
        let json = serde_json::to_value(&config).unwrap();
        assert_eq!(json["epsilon"], "1/10");
        assert_eq!(json["target"], "3");
        let back: ProtocolConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, config);
        let minimal: ProtocolConfig = serde_json::from_str(r#"{"d": 3, "epsilon": "1"}"#).unwrap();
        assert_eq!(minimal.max_rounds, 1_000_000);
        assert!(ProtocolConfig::new(3, int(0), 0).is_err());
    }
}
