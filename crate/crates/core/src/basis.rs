//! Product-state basis for `q` p-excitations on a chain of `N` atoms.
//!
//! Atom indices are 0-based in the Rust API. Everything rendered for humans
//! or written to files goes through [`ExcitationBasis::label`] and uses the
//! 1-based `|1,2>` notation.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationBasis {
    n_atoms: usize,
    q: usize,
    states: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

/// Two basis states that differ by moving one excitation from `from` to `to`.
///
/// `i < j` always; the matrix element is the dipole-dipole coupling between
/// atoms `from` and `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hop {
    pub i: usize,
    pub j: usize,
    pub from: usize,
    pub to: usize,
}

impl ExcitationBasis {
    /// All sorted `q`-tuples of distinct atoms, in lexicographic order.
    ///
    /// Requires `1 <= q < n_atoms`.
    pub fn new(n_atoms: usize, q: usize) -> Result<Self> {
        if q == 0 || q >= n_atoms {
            return Err(invalid(format!(
                "need 1 <= q < n_atoms, got q = {q}, n_atoms = {n_atoms}"
            )));
        }
        Ok(Self::build(n_atoms, q))
    }

    /// Like [`ExcitationBasis::new`] but also accepts the fully excited case
    /// `q == n_atoms` (a single state). Used for sub-chains in the
    /// bi-exciton decomposition.
    pub(crate) fn with_full(n_atoms: usize, q: usize) -> Result<Self> {
        if q == 0 || q > n_atoms {
            return Err(invalid(format!(
                "need 1 <= q <= n_atoms, got q = {q}, n_atoms = {n_atoms}"
            )));
        }
        Ok(Self::build(n_atoms, q))
    }

    fn build(n_atoms: usize, q: usize) -> Self {
        let mut states = Vec::new();
        let mut current: Vec<usize> = (0..q).collect();
        loop {
            states.push(current.clone());
            // advance to the next combination in lexicographic order
            let mut pos = q;
            while pos > 0 && current[pos - 1] == n_atoms - q + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            current[pos - 1] += 1;
            for k in pos..q {
                current[k] = current[k - 1] + 1;
            }
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self {
            n_atoms,
            q,
            states,
            index,
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    /// Excited atoms of basis state `index` (0-based atoms).
    pub fn tuple_of(&self, index: usize) -> Option<&[usize]> {
        self.states.get(index).map(Vec::as_slice)
    }

    /// Basis index of a set of excited atoms. The tuple need not be sorted.
    pub fn index_of(&self, atoms: &[usize]) -> Option<usize> {
        let mut key = atoms.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    pub fn contains_atom(&self, index: usize, atom: usize) -> bool {
        self.states[index].contains(&atom)
    }

    /// `|1,2>`-style label with 1-based atom numbers.
    pub fn label(&self, index: usize) -> String {
        let mut out = String::from("|");
        for (k, a) in self.states[index].iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", a + 1);
        }
        out.push('>');
        out
    }

    /// Basis index of each state's image under the chain reflection
    /// `n -> N - 1 - n`.
    pub fn reflection(&self) -> Vec<usize> {
        self.states
            .iter()
            .map(|state| {
                let mirrored: Vec<usize> = state.iter().map(|&a| self.n_atoms - 1 - a).collect();
                self.index_of(&mirrored).expect("mirrored tuple is in the basis")
            })
            .collect()
    }

    /// Every pair of basis states connected by moving a single excitation.
    pub fn hops(&self) -> Vec<Hop> {
        let mut hops = Vec::new();
        for (i, state) in self.states.iter().enumerate() {
            for (slot, &from) in state.iter().enumerate() {
                for to in 0..self.n_atoms {
                    if state.contains(&to) {
                        continue;
                    }
                    let mut moved = state.clone();
                    moved[slot] = to;
                    let j = self.index_of(&moved).expect("moved tuple is in the basis");
                    if j > i {
                        hops.push(Hop { i, j, from, to });
                    }
                }
            }
        }
        hops
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
