use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::rational::{int, ratio};
use crate::{Error, Result};

/// One projector on a `d ⊗ d` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    P,
    Q,
    R,
    S,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::P, Symbol::Q, Symbol::R, Symbol::S];

    pub fn alphabet(self) -> Alphabet {
        match self {
            Symbol::P | Symbol::Q => Alphabet::PQ,
            Symbol::R | Symbol::S => Alphabet::RS,
        }
    }

    /// Trace of the projector: 1, d²−1, d(d−1)/2, d(d+1)/2.
    pub fn trace(self, d: usize) -> BigRational {
        let d = d as i64;
        match self {
            Symbol::P => int(1),
            Symbol::Q => int(d * d - 1),
            Symbol::R => ratio(d * (d - 1), 2),
            Symbol::S => ratio(d * (d + 1), 2),
        }
    }

    /// Partial transpose of the projector as a combination over the other
    /// alphabet.
    pub fn partial_transpose(self, d: usize) -> [(Symbol, BigRational); 2] {
        let d = d as i64;
        match self {
            Symbol::P => [(Symbol::R, ratio(-1, d)), (Symbol::S, ratio(1, d))],
            Symbol::Q => [(Symbol::R, ratio(d + 1, d)), (Symbol::S, ratio(d - 1, d))],
            Symbol::R => [(Symbol::P, ratio(-(d - 1), 2)), (Symbol::Q, ratio(1, 2))],
            Symbol::S => [(Symbol::P, ratio(d + 1, 2)), (Symbol::Q, ratio(1, 2))],
        }
    }

    /// Coordinates in the basis `{I, F, P}`.
    pub(crate) fn coordinates(self) -> [(Basis, BigRational); 2] {
        match self {
            Symbol::P => [(Basis::P, int(1)), (Basis::I, int(0))],
            Symbol::Q => [(Basis::I, int(1)), (Basis::P, int(-1))],
            Symbol::R => [(Basis::I, ratio(1, 2)), (Basis::F, ratio(-1, 2))],
            Symbol::S => [(Basis::I, ratio(1, 2)), (Basis::F, ratio(1, 2))],
        }
    }

    pub fn parse(c: char) -> Result<Symbol> {
        match c.to_ascii_uppercase() {
            'P' => Ok(Symbol::P),
            'Q' => Ok(Symbol::Q),
            'R' => Ok(Symbol::R),
            'S' => Ok(Symbol::S),
            _ => Err(Error::invalid(format!("unknown projector symbol '{c}'"))),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Symbol::P => 'P',
            Symbol::Q => 'Q',
            Symbol::R => 'R',
            Symbol::S => 'S',
        };
        write!(f, "{c}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alphabet {
    PQ,
    RS,
}

impl Alphabet {
    pub fn name(self) -> &'static str {
        match self {
            Alphabet::PQ => "{P,Q}",
            Alphabet::RS => "{R,S}",
        }
    }

    /// Expresses a `{I, F, P}` basis element over this alphabet, if possible.
    pub(crate) fn express(self, b: Basis) -> Option<Vec<(Symbol, BigRational)>> {
        match (self, b) {
            (Alphabet::PQ, Basis::I) => Some(vec![(Symbol::P, int(1)), (Symbol::Q, int(1))]),
            (Alphabet::PQ, Basis::P) => Some(vec![(Symbol::P, int(1))]),
            (Alphabet::PQ, Basis::F) => None,
            (Alphabet::RS, Basis::I) => Some(vec![(Symbol::R, int(1)), (Symbol::S, int(1))]),
            (Alphabet::RS, Basis::F) => Some(vec![(Symbol::R, int(-1)), (Symbol::S, int(1))]),
            (Alphabet::RS, Basis::P) => None,
        }
    }
}

/// Linearly independent basis `{I, F, P}` of the span of all four
/// projectors on one pair; used to compare operators written over
/// different alphabets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Basis {
    I,
    F,
    P,
}
