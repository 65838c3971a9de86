//! The projectors `P, Q, R, S, F` on a `d ⊗ d` pair and the state families
//! built from them.
//!
//! Basis states are 0-based internally: digit `k` stands for `|k+1⟩`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Signed;

use crate::check::{Check, CheckReport};
use crate::pq::{mu_lambda, Symbol};
use crate::rational::{format_rational, int, to_f64};
use crate::tensor::{DenseOperator, Party, PureVector, RegisterLayout, HERMITIAN_TOL};
use crate::{Error, Result, C64};

fn pair_layout(d: usize) -> RegisterLayout {
    RegisterLayout::numbered(2, d)
}

fn check_local_dim(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::invalid(format!("local dimension must be at least {min}, got {d}")));
    }
    Ok(())
}

/// `|Φ⟩ = d^{-1/2} Σᵢ |i⟩|i⟩` on registers (1, 2).
pub fn max_entangled(d: usize) -> Result<PureVector> {
    check_local_dim(d, 2)?;
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let v = DVector::from_fn(d * d, |k, _| if k / d == k % d { amp } else { C64::new(0.0, 0.0) });
    PureVector::new(v, pair_layout(d))
}

/// Swap `F = Σᵢⱼ |i⟩⟨j| ⊗ |j⟩⟨i|` on registers (1, 2).
pub fn swap_operator(d: usize) -> DenseOperator {
    let n = d * d;
    let m = DMatrix::from_fn(n, n, |row, col| {
        let (i, j) = (row / d, row % d);
        if col == j * d + i {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DenseOperator::new(m, pair_layout(d)).expect("d*d square")
}

/// The five operators on a `d ⊗ d` pair (registers 1, 2).
#[derive(Clone, Debug)]
pub struct ProjectorSet {
    pub d: usize,
    pub p: DenseOperator,
    pub q: DenseOperator,
    pub r: DenseOperator,
    pub s: DenseOperator,
    pub f: DenseOperator,
}

pub fn projector_set(d: usize) -> Result<ProjectorSet> {
    let p = max_entangled(d)?.projector();
    let id = DenseOperator::identity(pair_layout(d));
    let f = swap_operator(d);
    Ok(ProjectorSet {
        d,
        q: id.combine(1.0, &p, -1.0)?,
        r: id.combine(0.5, &f, -0.5)?,
        s: id.combine(0.5, &f, 0.5)?,
        p,
        f,
    })
}

impl ProjectorSet {
    pub fn get(&self, symbol: Symbol) -> &DenseOperator {
        match symbol {
            Symbol::P => &self.p,
            Symbol::Q => &self.q,
            Symbol::R => &self.r,
            Symbol::S => &self.s,
        }
    }

    /// The projector for `symbol` placed on the pair `(first, second)`.
    pub fn on(&self, symbol: Symbol, first: u32, second: u32) -> Result<DenseOperator> {
        self.get(symbol).relabel(&[first, second])
    }

    pub fn identity(&self) -> DenseOperator {
        DenseOperator::identity(pair_layout(self.d))
    }

    /// Idempotence, complementarity, orthogonality, `F² = I` and traces.
    pub fn invariant_report(&self) -> Result<CheckReport> {
        let d = self.d as f64;
        let id = self.identity();
        let zero = DenseOperator::zeros(pair_layout(self.d));
        let mut report = CheckReport::default();
        for (name, x) in [("P", &self.p), ("Q", &self.q), ("R", &self.r), ("S", &self.s)] {
            report.push(Check::new(format!("{name}^2 = {name}"), x.mul(x)?.max_abs_diff(x)?, HERMITIAN_TOL));
            report.push(Check::new(format!("{name} Hermitian"), x.hermiticity_error(), HERMITIAN_TOL));
        }
        report.push(Check::new("P + Q = I", self.p.combine(1.0, &self.q, 1.0)?.max_abs_diff(&id)?, HERMITIAN_TOL));
        report.push(Check::new("R + S = I", self.r.combine(1.0, &self.s, 1.0)?.max_abs_diff(&id)?, HERMITIAN_TOL));
        report.push(Check::new("PQ = 0", self.p.mul(&self.q)?.max_abs_diff(&zero)?, HERMITIAN_TOL));
        report.push(Check::new("RS = 0", self.r.mul(&self.s)?.max_abs_diff(&zero)?, HERMITIAN_TOL));
        report.push(Check::new("F^2 = I", self.f.mul(&self.f)?.max_abs_diff(&id)?, HERMITIAN_TOL));
        let traces = [
            ("tr P = 1", &self.p, 1.0),
            ("tr Q = d^2-1", &self.q, d * d - 1.0),
            ("tr R = d(d-1)/2", &self.r, d * (d - 1.0) / 2.0),
            ("tr S = d(d+1)/2", &self.s, d * (d + 1.0) / 2.0),
        ];
        for (name, x, expected) in traces {
            report.push(Check::new(name, (x.trace() - C64::new(expected, 0.0)).norm(), HERMITIAN_TOL));
        }
        Ok(report)
    }
}

/// Checks the four partial-transpose relations entrywise:
/// `T(P) = (−R+S)/d`, `T(Q) = ((d+1)R + (d−1)S)/d`,
/// `T(R) = (−(d−1)P + Q)/2`, `T(S) = ((d+1)P + Q)/2`.
pub fn verify_pt_relations(d: usize) -> Result<CheckReport> {
    let set = projector_set(d)?;
    let df = d as f64;
    let t = |x: &DenseOperator| x.partial_transpose(Party::Alice);
    let cases = [
        ("T(P) = (-R+S)/d", t(&set.p), set.r.combine(-1.0 / df, &set.s, 1.0 / df)?),
        ("T(Q) = ((d+1)R+(d-1)S)/d", t(&set.q), set.r.combine((df + 1.0) / df, &set.s, (df - 1.0) / df)?),
        ("T(R) = (-(d-1)P+Q)/2", t(&set.r), set.p.combine(-(df - 1.0) / 2.0, &set.q, 0.5)?),
        ("T(S) = ((d+1)P+Q)/2", t(&set.s), set.p.combine((df + 1.0) / 2.0, &set.q, 0.5)?),
    ];
    let mut report = CheckReport::default();
    for (name, lhs, rhs) in cases {
        report.push(Check::new(name, lhs.max_abs_diff(&rhs)?, HERMITIAN_TOL));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhoEpsilonParams {
    d: usize,
    epsilon: BigRational,
}

impl RhoEpsilonParams {
    pub fn new(d: usize, epsilon: BigRational) -> Result<Self> {
        check_local_dim(d, 3)?;
        if epsilon.is_negative() {
            return Err(Error::invalid(format!("epsilon must be nonnegative, got {}", format_rational(&epsilon))));
        }
        Ok(RhoEpsilonParams { d, epsilon })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn epsilon(&self) -> &BigRational {
        &self.epsilon
    }

    /// Weight `(d+1+ε)/(d−1)` of the `R⊗R` term.
    pub fn beta(&self) -> BigRational {
        let d = int(self.d as i64);
        (&d + int(1) + &self.epsilon) / (d - int(1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WernerParams {
    d: usize,
    alpha: f64,
}

impl WernerParams {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        check_local_dim(d, 2)?;
        check_alpha(alpha)?;
        Ok(WernerParams { d, alpha })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be finite and nonnegative, got {alpha}")));
    }
    Ok(())
}

/// `α R₁₂⊗R₃₄ + S₁₂⊗S₃₄` on registers (1, 2, 3, 4).
pub fn alpha_state(d: usize, alpha: f64) -> Result<DenseOperator> {
    check_local_dim(d, 2)?;
    check_alpha(alpha)?;
    let set = projector_set(d)?;
    let rr = set.r.tensor(&set.on(Symbol::R, 3, 4)?)?;
    let ss = set.s.tensor(&set.on(Symbol::S, 3, 4)?)?;
    rr.combine(alpha, &ss, 1.0)
}

/// `((d+1+ε)/(d−1)) R₁₂⊗R₃₄ + S₁₂⊗S₃₄`, unnormalised.
pub fn rho_epsilon(params: &RhoEpsilonParams) -> Result<DenseOperator> {
    alpha_state(params.d, to_f64(&params.beta()))
}

/// `S + αR` on one pair, unnormalised.
pub fn werner(params: &WernerParams) -> Result<DenseOperator> {
    let set = projector_set(params.d)?;
    set.s.combine(1.0, &set.r, params.alpha)
}

/// Right-hand side `(μ P⊗P − ε P⊗Q − ε Q⊗P + λ Q⊗Q)/4` of the closed form
/// of `T_A(ρ(ε))`, assembled densely on registers (1, 2, 3, 4).
pub fn rho_epsilon_pt_closed_form(params: &RhoEpsilonParams) -> Result<DenseOperator> {
    let ml = mu_lambda(params.d, params.epsilon())?;
    let set = projector_set(params.d)?;
    let word = |a: Symbol, b: Symbol| -> Result<DenseOperator> { set.get(a).tensor(&set.on(b, 3, 4)?) };
    let eps = to_f64(params.epsilon());
    let pp = word(Symbol::P, Symbol::P)?;
    let pq = word(Symbol::P, Symbol::Q)?;
    let qp = word(Symbol::Q, Symbol::P)?;
    let qq = word(Symbol::Q, Symbol::Q)?;
    pp.combine(to_f64(&ml.mu) / 4.0, &pq, -eps / 4.0)?
        .combine(1.0, &qp, -eps / 4.0)?
        .combine(1.0, &qq, to_f64(&ml.lambda) / 4.0)
}

/// Parameters accepted by any registered [`StateFamily`]; each family reads
/// the fields it needs.
#[derive(Clone, Debug, Default)]
pub struct FamilyParams {
    pub d: usize,
    pub alpha: Option<f64>,
    pub epsilon: Option<BigRational>,
}

impl FamilyParams {
    fn alpha(&self, family: &str) -> Result<f64> {
        self.alpha
            .ok_or_else(|| Error::invalid(format!("family '{family}' needs alpha")))
    }

    fn epsilon(&self, family: &str) -> Result<BigRational> {
        self.epsilon
            .clone()
            .ok_or_else(|| Error::invalid(format!("family '{family}' needs epsilon")))
    }
}

/// A named, parameterised family of (unnormalised) bipartite states.
pub trait StateFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Dimension of the built operator, so callers can enforce budgets
    /// before allocating.
    fn dimension(&self, params: &FamilyParams) -> usize;

    fn build(&self, params: &FamilyParams) -> Result<DenseOperator>;
}

pub struct Werner;

impl StateFamily for Werner {
    fn name(&self) -> &'static str {
        "werner"
    }

    fn description(&self) -> &'static str {
        "S + alpha R on one d x d pair"
    }

    fn dimension(&self, params: &FamilyParams) -> usize {
        params.d.pow(2)
    }

    fn build(&self, params: &FamilyParams) -> Result<DenseOperator> {
        werner(&WernerParams::new(params.d, params.alpha(self.name())?)?)
    }
}

pub struct RhoEpsilon;

impl StateFamily for RhoEpsilon {
    fn name(&self) -> &'static str {
        "rho"
    }

    fn description(&self) -> &'static str {
        "((d+1+eps)/(d-1)) R(x)R + S(x)S on two pairs"
    }

    fn dimension(&self, params: &FamilyParams) -> usize {
        params.d.pow(4)
    }

    fn build(&self, params: &FamilyParams) -> Result<DenseOperator> {
        rho_epsilon(&RhoEpsilonParams::new(params.d, params.epsilon(self.name())?)?)
    }
}

pub struct AlphaState;

impl StateFamily for AlphaState {
    fn name(&self) -> &'static str {
        "alpha-state"
    }

    fn description(&self) -> &'static str {
        "alpha R(x)R + S(x)S on two pairs"
    }

    fn dimension(&self, params: &FamilyParams) -> usize {
        params.d.pow(4)
    }

    fn build(&self, params: &FamilyParams) -> Result<DenseOperator> {
        alpha_state(params.d, params.alpha(self.name())?)
    }
}

/// Name-keyed registry of state families.
pub struct FamilyRegistry {
    families: BTreeMap<&'static str, Box<dyn StateFamily>>,
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        FamilyRegistry {
            families: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, family: Box<dyn StateFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn StateFamily> {
        self.families
            .get(name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "state family",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut registry = FamilyRegistry::empty();
        registry.register(Box::new(Werner));
        registry.register(Box::new(RhoEpsilon));
        registry.register(Box::new(AlphaState));
        registry
    }
}
