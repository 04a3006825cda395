//! Set-of-ones view of a hash and MinHash signatures over the 64-element
//! universe of bit positions.

use std::fmt;

use num_rational::Ratio;

use super::phash::PHash64;
use crate::rng::{shuffle, stream_rng};

pub const NUM_PERM: usize = 128;
pub const UNIVERSE: usize = 64;
/// Value of every signature slot for the empty set.
pub const SENTINEL: u32 = u32::MAX;

/// Exact Jaccard similarity.
pub type Jaccard = Ratio<u32>;

/// Jaccard similarity a pair must strictly exceed to count as a duplicate.
pub fn duplicate_threshold() -> Jaccard {
    Ratio::new_raw(19, 20)
}

/// Positions of set bits of a 64-bit hash, stored as the bitmask itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct OnesSet(u64);

impl OnesSet {
    pub const EMPTY: OnesSet = OnesSet(0);

    pub fn from_mask(mask: u64) -> Self {
        OnesSet(mask)
    }

    /// Builds a set from positions, rejecting anything outside `[0, 63]`.
    pub fn from_positions<I: IntoIterator<Item = u32>>(positions: I) -> Result<Self, u32> {
        positions.into_iter().try_fold(OnesSet(0), |acc, p| {
            if p < UNIVERSE as u32 {
                Ok(OnesSet(acc.0 | (1u64 << p)))
            } else {
                Err(p)
            }
        })
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, pos: u32) -> bool {
        pos < 64 && self.0 >> pos & 1 == 1
    }

    /// Ascending positions.
    pub fn iter(self) -> impl Iterator<Item = u32> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let p = rest.trailing_zeros();
                rest &= rest - 1;
                Some(p)
            }
        })
    }

    pub fn positions(self) -> Vec<u32> {
        self.iter().collect()
    }
}

impl fmt::Display for OnesSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

pub fn ones_positions(hash: PHash64) -> OnesSet {
    OnesSet(hash.bits())
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets defined as identical (1).
pub fn jaccard(a: OnesSet, b: OnesSet) -> Jaccard {
    let union = (a.0 | b.0).count_ones();
    if union == 0 {
        return Ratio::from_integer(1);
    }
    Ratio::new((a.0 & b.0).count_ones(), union)
}

pub fn is_duplicate(j: Jaccard) -> bool {
    j > duplicate_threshold()
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MinHashSignature {
    minima: [u32; NUM_PERM],
    empty: bool,
}

impl MinHashSignature {
    pub fn minima(&self) -> &[u32; NUM_PERM] {
        &self.minima
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Fraction of agreeing slots, the MinHash estimate of Jaccard similarity.
    pub fn agreement(&self, other: &MinHashSignature) -> f64 {
        let same = self.minima.iter().zip(&other.minima).filter(|(a, b)| a == b).count();
        same as f64 / NUM_PERM as f64
    }
}

impl fmt::Debug for MinHashSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MinHashSignature")
            .field("empty", &self.empty)
            .field("minima", &&self.minima[..8])
            .finish_non_exhaustive()
    }
}

/// The 128 seeded bijections of `{0..63}`.
///
/// Permutation `k` is the identity shuffled by Fisher-Yates driven by ChaCha8
/// seeded with `seed` on stream `k`; see [`crate::rng::shuffle`].
#[derive(Clone)]
pub struct Permutations {
    seed: u64,
    tables: Box<[[u8; UNIVERSE]; NUM_PERM]>,
}

impl Permutations {
    pub fn new(seed: u64) -> Self {
        let mut tables = Box::new([[0u8; UNIVERSE]; NUM_PERM]);
        for (k, table) in tables.iter_mut().enumerate() {
            for (i, slot) in table.iter_mut().enumerate() {
                *slot = i as u8;
            }
            shuffle(table, &mut stream_rng(seed, k as u64));
        }
        Self { seed, tables }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn table(&self, k: usize) -> &[u8; UNIVERSE] {
        &self.tables[k]
    }

    pub fn signature(&self, set: OnesSet) -> MinHashSignature {
        if set.is_empty() {
            return MinHashSignature {
                minima: [SENTINEL; NUM_PERM],
                empty: true,
            };
        }
        let mut minima = [SENTINEL; NUM_PERM];
        for (slot, table) in minima.iter_mut().zip(self.tables.iter()) {
            *slot = set.iter().map(|e| u32::from(table[e as usize])).min().unwrap_or(SENTINEL);
        }
        MinHashSignature {
            minima,
            empty: false,
        }
    }
}

impl fmt::Debug for Permutations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Permutations").field("seed", &self.seed).finish_non_exhaustive()
    }
}

pub fn minhash_signature(set: OnesSet, seed: u64) -> MinHashSignature {
    Permutations::new(seed).signature(set)
}
