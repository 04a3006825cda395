//! Banded LSH index over MinHash signatures with exact Jaccard verification.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use super::minhash::{
    is_duplicate, jaccard, Jaccard, MinHashSignature, OnesSet, Permutations, NUM_PERM,
};
use super::DedupError;
use crate::binio::{self, FormatError};
use crate::rng::fnv1a64;

pub const DEFAULT_BANDS: usize = 32;
pub const DEFAULT_ROWS_PER_BAND: usize = 4;
pub const INDEX_MAGIC: &str = "KYDX1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LshConfig {
    pub seed: u64,
    pub bands: usize,
    pub rows_per_band: usize,
}

impl LshConfig {
    pub fn new(seed: u64, bands: usize, rows_per_band: usize) -> Result<Self, DedupError> {
        if bands == 0 || rows_per_band == 0 || bands * rows_per_band != NUM_PERM {
            return Err(DedupError::Config(format!(
                "bands ({bands}) x rows_per_band ({rows_per_band}) must equal {NUM_PERM}"
            )));
        }
        Ok(Self {
            seed,
            bands,
            rows_per_band,
        })
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            bands: DEFAULT_BANDS,
            rows_per_band: DEFAULT_ROWS_PER_BAND,
        }
    }
}

/// Verified candidate pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateVerdict {
    pub id_a: String,
    pub id_b: String,
    pub jaccard: Jaccard,
    pub is_duplicate: bool,
}

impl DuplicateVerdict {
    pub fn jaccard_f64(&self) -> f64 {
        *self.jaccard.numer() as f64 / *self.jaccard.denom() as f64
    }
}

/// Band key: FNV-1a over the little-endian bytes of the band's minima.
fn band_key(band: &[u32]) -> u64 {
    let mut bytes = [0u8; NUM_PERM * 4];
    for (chunk, v) in bytes.chunks_exact_mut(4).zip(band) {
        chunk.copy_from_slice(&v.to_le_bytes());
    }
    fnv1a64(&bytes[..band.len() * 4])
}

#[derive(Debug, Clone)]
pub struct LshIndex {
    config: LshConfig,
    perms: Permutations,
    ids: Vec<String>,
    sets: Vec<OnesSet>,
    signatures: Vec<MinHashSignature>,
    positions: HashMap<String, u32>,
    buckets: HashMap<(u16, u64), Vec<u32>>,
}

impl LshIndex {
    pub fn new(config: LshConfig) -> Result<Self, DedupError> {
        let config = LshConfig::new(config.seed, config.bands, config.rows_per_band)?;
        Ok(Self {
            perms: Permutations::new(config.seed),
            config,
            ids: Vec::new(),
            sets: Vec::new(),
            signatures: Vec::new(),
            positions: HashMap::new(),
            buckets: HashMap::new(),
        })
    }

    pub fn config(&self) -> LshConfig {
        self.config
    }

    pub fn permutations(&self) -> &Permutations {
        &self.perms
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Records in insertion order.
    pub fn records(&self) -> impl Iterator<Item = (&str, OnesSet, &MinHashSignature)> {
        self.ids
            .iter()
            .zip(&self.sets)
            .zip(&self.signatures)
            .map(|((id, set), sig)| (id.as_str(), *set, sig))
    }

    pub fn get(&self, id: &str) -> Option<(OnesSet, &MinHashSignature)> {
        self.positions
            .get(id)
            .map(|&p| (self.sets[p as usize], &self.signatures[p as usize]))
    }

    /// `(band, key)` for every band of a signature.
    pub fn band_keys(&self, sig: &MinHashSignature) -> Vec<(u16, u64)> {
        sig.minima()
            .chunks_exact(self.config.rows_per_band)
            .enumerate()
            .map(|(b, rows)| (b as u16, band_key(rows)))
            .collect()
    }

    /// Ids sharing the given bucket.
    pub fn bucket(&self, band: u16, key: u64) -> Vec<&str> {
        self.buckets
            .get(&(band, key))
            .map(|v| v.iter().map(|&p| self.ids[p as usize].as_str()).collect())
            .unwrap_or_default()
    }

    pub fn insert(&mut self, id: impl Into<String>, set: OnesSet) -> Result<(), DedupError> {
        let sig = self.perms.signature(set);
        self.insert_with_signature(id.into(), set, sig)
    }

    fn insert_with_signature(
        &mut self,
        id: String,
        set: OnesSet,
        sig: MinHashSignature,
    ) -> Result<(), DedupError> {
        if self.positions.contains_key(&id) {
            return Err(DedupError::DuplicateId(id));
        }
        let pos = u32::try_from(self.ids.len())
            .map_err(|_| DedupError::Config("index holds at most u32::MAX records".into()))?;
        for key in self.band_keys(&sig) {
            self.buckets.entry(key).or_default().push(pos);
        }
        self.positions.insert(id.clone(), pos);
        self.ids.push(id);
        self.sets.push(set);
        self.signatures.push(sig);
        Ok(())
    }

    fn check_seed(&self, seed: u64) -> Result<(), DedupError> {
        if seed != self.config.seed {
            return Err(DedupError::ConfigMismatch(format!(
                "index built with seed {}, queried with seed {seed}",
                self.config.seed
            )));
        }
        Ok(())
    }

    /// All indexed records sharing at least one bucket with `probe`, each
    /// verified by exact Jaccard. Sorted by descending Jaccard, then id.
    pub fn query(
        &self,
        probe_id: &str,
        probe: OnesSet,
        seed: u64,
    ) -> Result<Vec<DuplicateVerdict>, DedupError> {
        self.check_seed(seed)?;
        let sig = self.perms.signature(probe);
        let mut seen = HashSet::new();
        let mut verdicts = Vec::new();
        for key in self.band_keys(&sig) {
            let Some(members) = self.buckets.get(&key) else {
                continue;
            };
            for &p in members {
                if seen.insert(p) {
                    let j = jaccard(probe, self.sets[p as usize]);
                    verdicts.push(DuplicateVerdict {
                        id_a: probe_id.to_string(),
                        id_b: self.ids[p as usize].clone(),
                        jaccard: j,
                        is_duplicate: is_duplicate(j),
                    });
                }
            }
        }
        verdicts.sort_by(|a, b| b.jaccard.cmp(&a.jaccard).then_with(|| a.id_b.cmp(&b.id_b)));
        Ok(verdicts)
    }

    /// Only the verified duplicates among [`LshIndex::query`]'s candidates.
    pub fn query_duplicates(
        &self,
        probe_id: &str,
        probe: OnesSet,
        seed: u64,
    ) -> Result<Vec<DuplicateVerdict>, DedupError> {
        let mut v = self.query(probe_id, probe, seed)?;
        v.retain(|d| d.is_duplicate);
        Ok(v)
    }

    /// Serializes to the `KYDX1` container.
    ///
    /// Layout (little-endian): magic, `seed: u64`, `bands: u16`, `rows: u16`,
    /// `count: u64`, then per record `id_len: u16`, id bytes, the set as a
    /// `u64` bitmask and `128 x u32` minima.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), FormatError> {
        binio::write_all(w, INDEX_MAGIC.as_bytes())?;
        binio::write_all(w, &self.config.seed.to_le_bytes())?;
        binio::write_all(w, &(self.config.bands as u16).to_le_bytes())?;
        binio::write_all(w, &(self.config.rows_per_band as u16).to_le_bytes())?;
        binio::write_all(w, &(self.ids.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 + NUM_PERM * 4);
        for ((id, set), sig) in self.ids.iter().zip(&self.sets).zip(&self.signatures) {
            binio::write_str16(w, id)?;
            buf.clear();
            buf.extend_from_slice(&set.mask().to_le_bytes());
            for m in sig.minima() {
                buf.extend_from_slice(&m.to_le_bytes());
            }
            binio::write_all(w, &buf)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Reads a `KYDX1` container. Stored minima must match the signature
    /// recomputed from the stored bitmask and seed.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FormatError> {
        binio::expect_magic(r, INDEX_MAGIC)?;
        let seed = binio::read_u64(r, "seed")?;
        let bands = binio::read_u16(r, "bands")? as usize;
        let rows = binio::read_u16(r, "rows")? as usize;
        let count = binio::read_u64(r, "count")?;
        let config = LshConfig::new(seed, bands, rows).map_err(|e| FormatError::Invalid(e.to_string()))?;
        let mut index = LshIndex::new(config).map_err(|e| FormatError::Invalid(e.to_string()))?;
        for _ in 0..count {
            let id = binio::read_str16(r, "record id")?;
            let set = OnesSet::from_mask(binio::read_u64(r, "record bitmask")?);
            let sig = index.perms.signature(set);
            for (k, want) in sig.minima().iter().enumerate() {
                let got = binio::read_u32(r, "record minima")?;
                if got != *want {
                    return Err(FormatError::Invalid(format!(
                        "record {id:?}: stored minimum {k} is {got}, recomputed {want}"
                    )));
                }
            }
            index
                .insert_with_signature(id, set, sig)
                .map_err(|e| FormatError::Invalid(e.to_string()))?;
        }
        binio::expect_eof(r)?;
        Ok(index)
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self, FormatError> {
        Self::read_from(&mut bytes)
    }
}

pub fn build_lsh_index<I, S>(
    records: I,
    seed: u64,
    bands: usize,
    rows_per_band: usize,
) -> Result<LshIndex, DedupError>
where
    I: IntoIterator<Item = (S, OnesSet)>,
    S: Into<String>,
{
    let mut index = LshIndex::new(LshConfig::new(seed, bands, rows_per_band)?)?;
    for (id, set) in records {
        index.insert(id, set)?;
    }
    Ok(index)
}

pub fn query_candidates(
    index: &LshIndex,
    probe: OnesSet,
    seed: u64,
) -> Result<Vec<DuplicateVerdict>, DedupError> {
    index.query("", probe, seed)
}
