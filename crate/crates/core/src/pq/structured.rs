use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::symbol::{Alphabet, Basis, Symbol};
use crate::families::projector_set;
use crate::rational::{format_rational, to_f64};
use crate::tensor::DenseOperator;
use crate::{Error, Result};

/// Default cap on the number of terms an expansion may produce.
pub const DEFAULT_TERM_BUDGET: usize = 1 << 24; // 4^12
/// Default cap on the side length of a dense realisation.
pub const DEFAULT_DENSE_BUDGET: usize = 6561;

/// Tensor word: one projector symbol per pair-register.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn parse(s: &str) -> Result<Word> {
        if s.is_empty() {
            return Err(Error::invalid("empty word"));
        }
        Ok(Word(s.chars().map(Symbol::parse).collect::<Result<_>>()?))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Exact rational linear combination of tensor words on `width` pairs of
/// `d`-dimensional registers.
///
/// Zero coefficients are never stored, so two operators written over the
/// same words are equal exactly when their maps are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredOperator {
    d: usize,
    width: usize,
    terms: BTreeMap<Word, BigRational>,
}

/// Multiplies out per-position linear combinations into words.
fn expand<K: Ord + Clone>(
    scale: &BigRational,
    positions: impl Iterator<Item = Vec<(K, BigRational)>>,
) -> Vec<(Vec<K>, BigRational)> {
    let mut acc: Vec<(Vec<K>, BigRational)> = vec![(Vec::new(), scale.clone())];
    for options in positions {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for (prefix, coeff) in &acc {
            for (k, c) in &options {
                if c.is_zero() {
                    continue;
                }
                let mut word = prefix.clone();
                word.push(k.clone());
                next.push((word, coeff * c));
            }
        }
        acc = next;
    }
    acc
}

impl StructuredOperator {
    pub fn zero(d: usize, width: usize) -> Self {
        StructuredOperator {
            d,
            width,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Word, BigRational)>) -> Result<Self> {
        let mut terms = terms.into_iter().peekable();
        let width = match terms.peek() {
            Some((w, _)) => w.len(),
            None => return Err(Error::invalid("no terms given; use StructuredOperator::zero")),
        };
        let mut op = StructuredOperator::zero(d, width);
        for (word, coeff) in terms {
            op.add_term(word, coeff)?;
        }
        Ok(op)
    }

    pub fn single(d: usize, word: Word, coeff: BigRational) -> Result<Self> {
        Self::from_terms(d, [(word, coeff)])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn terms(&self) -> &BTreeMap<Word, BigRational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &Word) -> BigRational {
        self.terms.get(word).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, word: Word, coeff: BigRational) -> Result<()> {
        if word.is_empty() || word.len() != self.width {
            return Err(Error::invalid(format!(
                "word '{word}' has length {}, operator width is {}",
                word.len(),
                self.width
            )));
        }
        let entry = self.terms.entry(word).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
        Ok(())
    }

    fn check_compatible(&self, other: &StructuredOperator) -> Result<()> {
        if self.d != other.d || self.width != other.width {
            return Err(Error::invalid(format!(
                "incompatible operators: (d={}, width={}) vs (d={}, width={})",
                self.d, self.width, other.d, other.width
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &StructuredOperator) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        let mut out = StructuredOperator::zero(self.d, self.width);
        if !factor.is_zero() {
            out.terms = self.terms.iter().map(|(w, c)| (w.clone(), c * factor)).collect();
        }
        out
    }

    pub fn tensor(&self, other: &StructuredOperator) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::invalid("tensor of operators with different d"));
        }
        let mut out = StructuredOperator::zero(self.d, self.width + other.width);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.terms.insert(w1.concat(w2), c1 * c2);
            }
        }
        Ok(out)
    }

    /// `self^{⊗n}`; fails when the expansion could exceed `budget` terms.
    pub fn tensor_power(&self, n: u32, budget: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("tensor power needs n >= 1"));
        }
        let needed = (self.terms.len() as u128).checked_pow(n).unwrap_or(u128::MAX);
        if needed > budget as u128 {
            return Err(Error::TermBudget { budget, needed });
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// Applies the partial-transpose substitution to every position.
    pub fn pt_substitute(&self) -> Self {
        let mut out = StructuredOperator::zero(self.d, self.width);
        for (word, coeff) in &self.terms {
            let images = word.0.iter().map(|s| s.partial_transpose(self.d).to_vec());
            for (symbols, c) in expand(coeff, images) {
                out.add_term(Word(symbols), c).expect("width preserved");
            }
        }
        out
    }

    /// Exact trace from the per-symbol traces.
    pub fn trace(&self) -> BigRational {
        self.terms
            .iter()
            .map(|(w, c)| w.0.iter().fold(c.clone(), |acc, s| acc * s.trace(self.d)))
            .sum()
    }

    /// Coordinates over tensor words in the independent `{I, F, P}` basis.
    fn canonical(&self) -> BTreeMap<Vec<Basis>, BigRational> {
        let mut out: BTreeMap<Vec<Basis>, BigRational> = BTreeMap::new();
        for (word, coeff) in &self.terms {
            let coords = word.0.iter().map(|s| s.coordinates().to_vec());
            for (basis, c) in expand(coeff, coords) {
                *out.entry(basis).or_insert_with(BigRational::zero) += c;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Equality as operators, regardless of which alphabets the two sides
    /// are written in.
    pub fn equivalent(&self, other: &StructuredOperator) -> bool {
        self.d == other.d && self.width == other.width && self.canonical() == other.canonical()
    }

    /// Rewrites the operator over a single alphabet, failing when it does
    /// not lie in that alphabet's span.
    pub fn normalize_to(&self, alphabet: Alphabet) -> Result<Self> {
        let mut out = StructuredOperator::zero(self.d, self.width);
        for (basis, coeff) in self.canonical() {
            let options = basis
                .iter()
                .map(|&b| alphabet.express(b).ok_or(Error::NotRepresentable(alphabet.name())))
                .collect::<Result<Vec<_>>>()?;
            for (symbols, c) in expand(&coeff, options.into_iter()) {
                out.add_term(Word(symbols), c)?;
            }
        }
        Ok(out)
    }

    /// Dense realisation on registers `1..=2·width`, position `k` acting on
    /// the pair `(2k+1, 2k+2)`.
    pub fn to_dense(&self, budget: usize) -> Result<DenseOperator> {
        let dimension = self
            .d
            .checked_pow(2 * self.width as u32)
            .unwrap_or(usize::MAX);
        if dimension > budget {
            return Err(Error::DenseBudget { budget, dimension });
        }
        let set = projector_set(self.d)?;
        let layout = crate::tensor::RegisterLayout::numbered(2 * self.width as u32, self.d);
        let mut total = DenseOperator::zeros(layout);
        for (word, coeff) in &self.terms {
            let mut dense: Option<DenseOperator> = None;
            for (k, &s) in word.0.iter().enumerate() {
                let k = k as u32;
                let local = set.on(s, 2 * k + 1, 2 * k + 2)?;
                dense = Some(match dense {
                    None => local,
                    Some(acc) => acc.tensor(&local)?,
                });
            }
            let dense = dense.expect("nonempty word");
            total = total.combine(1.0, &dense, to_f64(coeff))?;
        }
        Ok(total)
    }
}

impl fmt::Display for StructuredOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "({}) {w}", format_rational(c))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::tensor::Party;

    fn word(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn rr_substitution_has_expected_pp_coefficient() {
        for d in 3..=5 {
            let rr = StructuredOperator::single(d, word("RR"), int(1)).unwrap();
            let t = rr.pt_substitute();
            let di = d as i64;
            assert_eq!(t.coefficient(&word("PP")), ratio((di - 1) * (di - 1), 4));
            assert_eq!(t.len(), 4);
        }
    }

    #[test]
    fn rr_substitution_matches_dense_partial_transpose() {
        let rr = StructuredOperator::single(3, word("RR"), int(1)).unwrap();
        let lhs = rr.pt_substitute().to_dense(DEFAULT_DENSE_BUDGET).unwrap();
        let rhs = rr.to_dense(DEFAULT_DENSE_BUDGET).unwrap().partial_transpose(Party::Alice);
        assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn substitution_is_an_involution() {
        let op = StructuredOperator::from_terms(
            4,
            [(word("PQS"), ratio(3, 7)), (word("RRQ"), int(-2)), (word("SPP"), ratio(1, 9))],
        )
        .unwrap();
        assert_eq!(op.pt_substitute().pt_substitute(), op);
    }

    #[test]
    fn binomial_tensor_square() {
        let (a, b) = (ratio(2, 3), ratio(-5, 4));
        let op = StructuredOperator::from_terms(3, [(word("P"), a.clone()), (word("Q"), b.clone())]).unwrap();
        let sq = op.tensor_power(2, DEFAULT_TERM_BUDGET).unwrap();
        assert_eq!(sq.coefficient(&word("PP")), &a * &a);
        assert_eq!(sq.coefficient(&word("PQ")), &a * &b);
        assert_eq!(sq.coefficient(&word("QP")), &a * &b);
        assert_eq!(sq.coefficient(&word("QQ")), &b * &b);
        assert_eq!(op.tensor_power(1, DEFAULT_TERM_BUDGET).unwrap(), op);
    }

    #[test]
    fn tensor_power_budget_is_enforced() {
        let op = StructuredOperator::from_terms(3, [(word("P"), int(1)), (word("Q"), int(1))]).unwrap();
        let err = op.tensor_power(5, 16).unwrap_err();
        assert!(matches!(err, Error::TermBudget { budget: 16, needed: 32 }));
        assert!(err.to_string().contains("budget of 16"));
    }

    #[test]
    fn trace_examples() {
        let pp = StructuredOperator::single(3, word("PP"), int(1)).unwrap();
        assert_eq!(pp.trace(), int(1));
        let rho0 = StructuredOperator::from_terms(3, [(word("RR"), int(2)), (word("SS"), int(1))]).unwrap();
        assert_eq!(rho0.trace(), int(54));
        assert_eq!(rho0.pt_substitute().trace(), int(54));
    }

    #[test]
    fn zero_operator_is_zero_matrix() {
        let z = StructuredOperator::zero(3, 2).to_dense(DEFAULT_DENSE_BUDGET).unwrap();
        assert_eq!(z.dim(), 81);
        assert!(z.matrix().iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn dense_budget_enforced() {
        let op = StructuredOperator::single(3, word("PPPPP"), int(1)).unwrap();
        assert!(matches!(op.to_dense(DEFAULT_DENSE_BUDGET), Err(Error::DenseBudget { .. })));
    }

    #[test]
    fn normalisation_between_alphabets() {
        // P + Q = I = R + S
        let pq = StructuredOperator::from_terms(3, [(word("P"), int(1)), (word("Q"), int(1))]).unwrap();
        let rs = pq.normalize_to(Alphabet::RS).unwrap();
        assert_eq!(rs, StructuredOperator::from_terms(3, [(word("R"), int(1)), (word("S"), int(1))]).unwrap());
        assert!(pq.equivalent(&rs));
        let p = StructuredOperator::single(3, word("P"), int(1)).unwrap();
        assert!(matches!(p.normalize_to(Alphabet::RS), Err(Error::NotRepresentable(_))));
        let mixed = StructuredOperator::single(3, word("PS"), int(2)).unwrap();
        assert!(mixed.normalize_to(Alphabet::PQ).is_err());
        let rs_word = StructuredOperator::single(3, word("RS"), int(1)).unwrap();
        assert_eq!(rs_word.normalize_to(Alphabet::RS).unwrap(), rs_word);
    }

    #[test]
    fn rejects_mismatched_widths() {
        let mut op = StructuredOperator::zero(3, 2);
        assert!(op.add_term(word("P"), int(1)).is_err());
        assert!(Word::parse("").is_err());
        assert!(Word::parse("PX").is_err());
    }
}
