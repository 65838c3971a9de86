use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    /// Odd-numbered registers belong to Alice, even-numbered ones to Bob.
    pub fn of_register(id: u32) -> Party {
        if id % 2 == 1 {
            Party::Alice
        } else {
            Party::Bob
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub id: u32,
    pub dim: usize,
    pub party: Party,
}

impl Register {
    pub fn new(id: u32, dim: usize) -> Self {
        Register {
            id,
            dim,
            party: Party::of_register(id),
        }
    }
}

/// Ordered list of registers. The first register is the most significant
/// digit of a flat basis index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Register>", into = "Vec<Register>")]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl TryFrom<Vec<Register>> for RegisterLayout {
    type Error = Error;

    fn try_from(registers: Vec<Register>) -> Result<Self> {
        RegisterLayout::new(registers)
    }
}

impl From<RegisterLayout> for Vec<Register> {
    fn from(layout: RegisterLayout) -> Self {
        layout.registers
    }
}

impl RegisterLayout {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &registers {
            if !seen.insert(r.id) {
                return Err(Error::DuplicateRegister(r.id));
            }
            if r.dim == 0 {
                return Err(Error::ZeroDimension(r.id));
            }
        }
        Ok(RegisterLayout { registers })
    }

    /// Registers with the given ids, all of dimension `d`, parties by parity.
    pub fn uniform(ids: &[u32], d: usize) -> Result<Self> {
        Self::new(ids.iter().map(|&id| Register::new(id, d)).collect())
    }

    /// `count` registers numbered `1..=count`, each of dimension `d`.
    pub fn numbered(count: u32, d: usize) -> Self {
        Self::uniform(&(1..=count).collect::<Vec<_>>(), d).expect("ids are distinct")
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.registers.iter().map(|r| r.id).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn position(&self, id: u32) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.id == id)
            .ok_or(Error::UnknownRegister(id))
    }

    pub fn get(&self, id: u32) -> Result<&Register> {
        Ok(&self.registers[self.position(id)?])
    }

    /// Place value of each register in a flat index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.registers.len()];
        for k in (0..self.registers.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.registers[k + 1].dim;
        }
        strides
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.registers.len()];
        for (k, r) in self.registers.iter().enumerate().rev() {
            out[k] = index % r.dim;
            index /= r.dim;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.registers)
            .fold(0, |acc, (&digit, r)| acc * r.dim + digit)
    }

    pub fn is_ascending(&self) -> bool {
        self.registers.windows(2).all(|w| w[0].id < w[1].id)
    }

    pub fn ascending(&self) -> RegisterLayout {
        let mut registers = self.registers.clone();
        registers.sort_by_key(|r| r.id);
        RegisterLayout { registers }
    }

    /// Concatenation; ids must be disjoint.
    pub fn concat(&self, other: &RegisterLayout) -> Result<RegisterLayout> {
        let mut registers = self.registers.clone();
        registers.extend_from_slice(&other.registers);
        RegisterLayout::new(registers)
    }

    /// Same dimensions and parties rule, new ids (position by position).
    pub fn relabel(&self, ids: &[u32]) -> Result<RegisterLayout> {
        if ids.len() != self.registers.len() {
            return Err(Error::LayoutMismatch(format!(
                "relabel needs {} ids, got {}",
                self.registers.len(),
                ids.len()
            )));
        }
        RegisterLayout::new(
            self.registers
                .iter()
                .zip(ids)
                .map(|(r, &id)| Register::new(id, r.dim))
                .collect(),
        )
    }

    /// Layout reordered to `ordering`, which must be a permutation of the ids.
    pub fn reordered(&self, ordering: &[u32]) -> Result<RegisterLayout> {
        if ordering.len() != self.registers.len() {
            return Err(Error::NotAPermutation);
        }
        let mut used = vec![false; self.registers.len()];
        let mut registers = Vec::with_capacity(ordering.len());
        for &id in ordering {
            let pos = self.position(id).map_err(|_| Error::NotAPermutation)?;
            if std::mem::replace(&mut used[pos], true) {
                return Err(Error::NotAPermutation);
            }
            registers.push(self.registers[pos]);
        }
        Ok(RegisterLayout { registers })
    }

    /// For each flat index of `target` (a reordering of `self`), the flat
    /// index in `self` of the same basis state.
    pub(crate) fn index_map_from(&self, target: &RegisterLayout) -> Result<Vec<usize>> {
        let strides = self.strides();
        let target_strides: Vec<usize> = target
            .registers
            .iter()
            .map(|r| self.position(r.id).map(|p| strides[p]))
            .collect::<Result<_>>()?;
        Ok(flat_map(&target.dims(), &target_strides))
    }

    pub fn party_ids(&self, party: Party) -> Vec<u32> {
        self.registers
            .iter()
            .filter(|r| r.party == party)
            .map(|r| r.id)
            .collect()
    }
}

/// Enumerates all digit tuples over `dims` (row-major) and returns
/// `Σ digit_k · strides_k` for each.
pub(crate) fn flat_map(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (&dim, &stride) in dims.iter().zip(strides) {
        let mut next = Vec::with_capacity(out.len() * dim);
        for &base in &out {
            for digit in 0..dim {
                next.push(base + digit * stride);
            }
        }
        out = next;
    }
    out
}

/// A split of registers into Alice's and Bob's sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub alice: Vec<u32>,
    pub bob: Vec<u32>,
}

impl Bipartition {
    /// Splits the layout according to each register's party label.
    pub fn by_party(layout: &RegisterLayout) -> Self {
        Bipartition {
            alice: layout.party_ids(Party::Alice),
            bob: layout.party_ids(Party::Bob),
        }
    }

    pub fn swapped(&self) -> Self {
        Bipartition {
            alice: self.bob.clone(),
            bob: self.alice.clone(),
        }
    }

    pub fn ordering(&self) -> Vec<u32> {
        self.alice.iter().chain(&self.bob).copied().collect()
    }

    /// Checks the two sides partition the layout and returns `(d_A, d_B)`.
    pub fn side_dims(&self, layout: &RegisterLayout) -> Result<(usize, usize)> {
        let ordering = self.ordering();
        layout.reordered(&ordering)?;
        let dim = |ids: &[u32]| -> Result<usize> {
            ids.iter()
                .map(|&id| layout.get(id).map(|r| r.dim))
                .product()
        };
        Ok((dim(&self.alice)?, dim(&self.bob)?))
    }
}
