//! Interchangeable strategies for minimising `⟨ψ|M|ψ⟩` over unit vectors
//! of Schmidt rank at most two.
//!
//! Every strategy returns an upper bound on the true minimum: a negative
//! value comes with its vector as a certificate, a nonnegative value is
//! only evidence.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ansatz::{embed, lift};
use super::cut::CutHermitian;
use crate::tensor::random::{orthonormalize, random_isometry, random_unit};
use crate::tensor::{min_eigen_raw, PureVector};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// A restart stops once an iteration improves the value by less.
    pub tol: f64,
    pub seed: u64,
    /// Start restart 0 from the isometry onto the first two Alice basis
    /// states, which contains the canonical certificate vector.
    pub seed_canonical: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 64,
            max_iters: 500,
            tol: 1e-12,
            seed: 0,
            seed_canonical: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessResult {
    pub method: String,
    pub best_value: f64,
    pub best_vector: PureVector,
    pub restarts_used: usize,
    /// True when every restart stopped on the improvement tolerance.
    pub converged: bool,
    /// Value trajectory of the restart that produced `best_value`.
    pub value_history: Vec<f64>,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
    pub seed: u64,
}

impl WitnessResult {
    /// The minimising vector when it certifies a negative value.
    pub fn certificate(&self) -> Option<&PureVector> {
        (self.best_value < 0.0).then_some(&self.best_vector)
    }

    pub fn record(&self) -> WitnessRecord {
        WitnessRecord {
            method: self.method.clone(),
            best_value: self.best_value,
            certificate: self.certificate().map(|v| CertificateVector {
                registers: v.layout().ids(),
                amplitudes: v.amplitudes().iter().map(|z| (z.re, z.im)).collect(),
            }),
            restarts: self.restarts_used,
            converged: self.converged,
            seed: self.seed,
        }
    }
}

/// JSON form of a [`WitnessResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub method: String,
    pub best_value: f64,
    pub certificate: Option<CertificateVector>,
    pub restarts: usize,
    pub converged: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateVector {
    pub registers: Vec<u32>,
    pub amplitudes: Vec<(f64, f64)>,
}

pub trait WitnessSearch: Send + Sync {
    fn name(&self) -> &'static str;

    fn search(&self, op: &dyn CutHermitian, opts: &SearchOptions) -> Result<WitnessResult>;
}

/// Per-restart generator: ChaCha20 keyed by the master seed, one stream per
/// restart.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

struct RestartOutcome {
    value: f64,
    vector: DVector<C64>,
    history: Vec<f64>,
    converged: bool,
}

fn validate(op: &dyn CutHermitian, opts: &SearchOptions) -> Result<()> {
    if op.alice_dim() < 2 || op.bob_dim() < 2 {
        return Err(Error::invalid("both sides of the cut need dimension at least 2"));
    }
    if opts.restarts == 0 {
        return Err(Error::invalid("at least one restart is required"));
    }
    Ok(())
}

fn merge(method: &str, op: &dyn CutHermitian, opts: &SearchOptions, outcomes: Vec<RestartOutcome>) -> Result<WitnessResult> {
    let restart_values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let converged = outcomes.iter().all(|o| o.converged);
    // First index wins ties, so the merge does not depend on scheduling.
    let best = outcomes
        .into_iter()
        .reduce(|best, o| if o.value < best.value { o } else { best })
        .expect("at least one restart");
    Ok(WitnessResult {
        method: method.to_string(),
        best_value: best.value,
        best_vector: op.to_vector(best.vector)?,
        restarts_used: restart_values.len(),
        converged,
        value_history: best.history,
        restart_values,
        seed: opts.seed,
    })
}

fn canonical_isometry(d_a: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d_a, 2, |a, k| if a == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Alternating minimisation. For a fixed Alice isometry `U` the best
/// coefficients are the lowest eigenvector of the compressed operator
/// `(U⊗I)† M (U⊗I)`; `U` is then moved along the negative Riemannian
/// gradient on the set of `d_A × 2` isometries, retracted by QR, with an
/// Armijo backtracking step.
pub struct Alternating;

struct Compressed {
    value: f64,
    coeffs: DVector<C64>,
    /// `M (U⊗I)`.
    applied: DMatrix<C64>,
}

fn compress(op: &dyn CutHermitian, u: &DMatrix<C64>) -> Compressed {
    let k = lift(u, op.bob_dim());
    let applied = op.apply(&k);
    let h = k.adjoint() * &applied;
    let (value, coeffs) = min_eigen_raw(&h);
    Compressed { value, coeffs, applied }
}

/// Riemannian gradient of `U ↦ ⟨ψ|M|ψ⟩` at fixed coefficients.
fn riemannian_gradient(op: &dyn CutHermitian, u: &DMatrix<C64>, state: &Compressed) -> DMatrix<C64> {
    let d_b = op.bob_dim();
    let m_psi = &state.applied * &state.coeffs;
    let m_psi = DMatrix::from_row_iterator(op.alice_dim(), d_b, m_psi.iter().copied());
    let c = DMatrix::from_row_iterator(2, d_b, state.coeffs.iter().copied());
    let g = m_psi * c.adjoint();
    let ug = u.adjoint() * &g;
    let sym = (&ug + ug.adjoint()) * C64::new(0.5, 0.0);
    g - u * sym
}

impl Alternating {
    fn run(&self, op: &dyn CutHermitian, mut u: DMatrix<C64>, opts: &SearchOptions) -> RestartOutcome {
        let mut state = compress(op, &u);
        let mut history = vec![state.value];
        let mut step = 1.0;
        let mut converged = false;
        for _ in 0..opts.max_iters {
            let xi = riemannian_gradient(op, &u, &state);
            let slope = xi.norm_squared();
            if slope < 1e-28 {
                converged = true;
                break;
            }
            let mut accepted = None;
            let mut t = step;
            for _ in 0..40 {
                let candidate = orthonormalize(&u - &xi * C64::new(t, 0.0));
                let next = compress(op, &candidate);
                if next.value <= state.value - 1e-4 * 2.0 * t * slope {
                    accepted = Some((candidate, next));
                    break;
                }
                t *= 0.5;
            }
            let Some((candidate, next)) = accepted else {
                converged = true;
                break;
            };
            let improvement = state.value - next.value;
            u = candidate;
            state = next;
            history.push(state.value);
            step = (2.0 * t).min(1e3);
            if improvement < opts.tol {
                converged = true;
                break;
            }
        }
        let vector = embed(&u, &state.coeffs);
        RestartOutcome {
            value: state.value,
            vector,
            history,
            converged,
        }
    }
}

impl WitnessSearch for Alternating {
    fn name(&self) -> &'static str {
        "alternating"
    }

    fn search(&self, op: &dyn CutHermitian, opts: &SearchOptions) -> Result<WitnessResult> {
        validate(op, opts)?;
        let d_a = op.alice_dim();
        let outcomes: Vec<RestartOutcome> = (0..opts.restarts)
            .into_par_iter()
            .map(|i| {
                let u = if i == 0 && opts.seed_canonical {
                    canonical_isometry(d_a)
                } else {
                    random_isometry(&mut restart_rng(opts.seed, i), d_a, 2)
                };
                self.run(op, u, opts)
            })
            .collect();
        merge(self.name(), op, opts, outcomes)
    }
}

/// Pure random sampling: each restart draws a Haar isometry and a uniform
/// unit coefficient vector and evaluates it once. Useful as an unbiased
/// sampling oracle rather than a minimiser.
pub struct RandomSampling;

impl WitnessSearch for RandomSampling {
    fn name(&self) -> &'static str {
        "random"
    }

    fn search(&self, op: &dyn CutHermitian, opts: &SearchOptions) -> Result<WitnessResult> {
        validate(op, opts)?;
        let (d_a, d_b) = (op.alice_dim(), op.bob_dim());
        let outcomes: Vec<RestartOutcome> = (0..opts.restarts)
            .into_par_iter()
            .map(|i| {
                let mut rng = restart_rng(opts.seed, i);
                let u = random_isometry(&mut rng, d_a, 2);
                let c = random_unit(&mut rng, 2 * d_b);
                let psi = embed(&u, &c);
                let column = DMatrix::from_column_slice(psi.len(), 1, psi.as_slice());
                let value = psi.dotc(&op.apply(&column).column(0)).re;
                RestartOutcome {
                    value,
                    vector: psi,
                    history: vec![value],
                    converged: true,
                }
            })
            .collect();
        merge(self.name(), op, opts, outcomes)
    }
}

/// Name-keyed registry of search strategies.
pub struct SearchRegistry {
    strategies: BTreeMap<&'static str, Box<dyn WitnessSearch>>,
}

impl SearchRegistry {
    pub fn empty() -> Self {
        SearchRegistry {
            strategies: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, strategy: Box<dyn WitnessSearch>) {
        self.strategies.insert(strategy.name(), strategy);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn WitnessSearch> {
        self.strategies
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "search method",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }
}

impl Default for SearchRegistry {
    fn default() -> Self {
        let mut registry = SearchRegistry::empty();
        registry.register(Box::new(Alternating));
        registry.register(Box::new(RandomSampling));
        registry
    }
}
