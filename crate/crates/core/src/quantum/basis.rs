//! Pseudospin bases. A basis state is a bitmask with bit `i` set when atom
//! `i` is in the Rydberg state.
//!
//! States are ordered by excitation number, then by increasing bitmask value
//! within each sector. Within a sector this is colexicographic order of the
//! excited-atom sets, which gives a closed-form rank.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FULL_CAP: usize = 14;
pub const DEFAULT_STATE_CAP: usize = 5_000_000;
/// Bitmask width.
pub const MAX_ATOMS: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BasisMode {
    Full,
    Truncated { max_excitations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub mode: BasisMode,
    pub atom_count: usize,
    #[serde(default = "default_full_cap")]
    pub full_cap: usize,
    #[serde(default = "default_state_cap")]
    pub state_cap: usize,
}

fn default_full_cap() -> usize {
    DEFAULT_FULL_CAP
}

fn default_state_cap() -> usize {
    DEFAULT_STATE_CAP
}

impl BasisSpec {
    pub fn full(atom_count: usize) -> Self {
        Self {
            mode: BasisMode::Full,
            atom_count,
            full_cap: DEFAULT_FULL_CAP,
            state_cap: DEFAULT_STATE_CAP,
        }
    }

    pub fn truncated(atom_count: usize, max_excitations: usize) -> Self {
        Self {
            mode: BasisMode::Truncated { max_excitations },
            atom_count,
            full_cap: DEFAULT_FULL_CAP,
            state_cap: DEFAULT_STATE_CAP,
        }
    }

    /// Highest excitation number present in the basis.
    pub fn max_excitations(&self) -> usize {
        match self.mode {
            BasisMode::Full => self.atom_count,
            BasisMode::Truncated { max_excitations } => max_excitations,
        }
    }

    /// Number of basis states, without enumerating them.
    pub fn dimension(&self) -> u128 {
        (0..=self.max_excitations().min(self.atom_count))
            .map(|k| binomial_u128(self.atom_count, k))
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.atom_count;
        if n < 1 || n > MAX_ATOMS {
            return Err(Error::InvalidParameter(format!(
                "atom_count must be in 1..={MAX_ATOMS}, got {n}"
            )));
        }
        match self.mode {
            BasisMode::Full if n > self.full_cap => {
                return Err(Error::FullBasisCap {
                    atoms: n,
                    cap: self.full_cap,
                })
            }
            BasisMode::Truncated { max_excitations }
                if max_excitations < 1 || max_excitations > n =>
            {
                return Err(Error::InvalidParameter(format!(
                    "max_excitations must be in 1..={n}, got {max_excitations}"
                )))
            }
            _ => {}
        }
        let dim = self.dimension();
        if dim > self.state_cap as u128 {
            return Err(Error::BasisTooLarge {
                dim,
                cap: self.state_cap,
            });
        }
        Ok(())
    }
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Enumerated basis with O(N) index lookup.
#[derive(Debug, Clone)]
pub struct Basis {
    spec: BasisSpec,
    states: Vec<u64>,
    /// `sector_offsets[k]` is the index of the first state with `k`
    /// excitations; one extra trailing entry holds the dimension.
    sector_offsets: Vec<usize>,
    /// `binom[n][k]` for `n <= atom_count`.
    binom: Vec<Vec<usize>>,
}

impl Basis {
    pub fn new(spec: BasisSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.atom_count;
        let kmax = spec.max_excitations();
        let binom: Vec<Vec<usize>> = (0..=n)
            .map(|m| (0..=n).map(|k| binomial_u128(m, k) as usize).collect())
            .collect();
        let dim = spec.dimension() as usize;
        let mut states = Vec::with_capacity(dim);
        let mut sector_offsets = Vec::with_capacity(kmax + 2);
        for k in 0..=kmax {
            sector_offsets.push(states.len());
            push_sector(&mut states, n, k);
        }
        sector_offsets.push(states.len());
        debug_assert_eq!(states.len(), dim);
        Ok(Self {
            spec,
            states,
            sector_offsets,
            binom,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn atom_count(&self) -> usize {
        self.spec.atom_count
    }

    pub fn max_excitations(&self) -> usize {
        self.spec.max_excitations()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    /// Index range of the states with exactly `k` excitations.
    pub fn sector(&self, k: usize) -> std::ops::Range<usize> {
        self.sector_offsets[k]..self.sector_offsets[k + 1]
    }

    pub fn excitations(&self, index: usize) -> usize {
        self.states[index].count_ones() as usize
    }

    /// Position of `state` in the basis, or `None` if it lies outside.
    pub fn index_of(&self, state: u64) -> Option<usize> {
        let n = self.spec.atom_count;
        if n < 64 && state >> n != 0 {
            return None;
        }
        let k = state.count_ones() as usize;
        if k > self.max_excitations() {
            return None;
        }
        let mut rank = 0;
        let mut bits = state;
        let mut i = 1;
        while bits != 0 {
            let c = bits.trailing_zeros() as usize;
            rank += self.binom[c][i];
            bits &= bits - 1;
            i += 1;
        }
        Some(self.sector_offsets[k] + rank)
    }
}

/// All `k`-subsets of `n` bits in increasing numeric order (Gosper's hack).
fn push_sector(out: &mut Vec<u64>, n: usize, k: usize) {
    if k == 0 {
        out.push(0);
        return;
    }
    let limit = 1u64 << n;
    let mut s: u64 = (1u64 << k) - 1;
    while s < limit {
        out.push(s);
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
}
