use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PackError;
use crate::binio::{self, FormatError};

pub const CURSOR_MAGIC: &str = "KYCR1";
const CURSOR_LEN: usize = 5 + 4 * 8 + 4;

/// Position of the next sample to yield. `shard_index` is a slot in the
/// epoch's shuffled shard order, `sample_offset` a slot in that shard's
/// shuffled sample order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResumeCursor {
    pub epoch: u64,
    pub shard_index: u64,
    pub sample_offset: u64,
    pub shuffle_seed: u64,
}

impl ResumeCursor {
    fn body(&self) -> [u8; CURSOR_LEN - 4] {
        let mut out = [0u8; CURSOR_LEN - 4];
        out[..5].copy_from_slice(CURSOR_MAGIC.as_bytes());
        for (i, v) in [self.epoch, self.shard_index, self.sample_offset, self.shuffle_seed].iter().enumerate() {
            out[5 + 8 * i..13 + 8 * i].copy_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// CRC-32 over the magic and the four fields.
    pub fn checksum(&self) -> u32 {
        crc32fast::hash(&self.body())
    }
}

/// Magic, four little-endian `u64` fields, trailing little-endian CRC-32.
pub fn save_cursor(cursor: &ResumeCursor) -> Vec<u8> {
    let mut out = cursor.body().to_vec();
    out.extend_from_slice(&cursor.checksum().to_le_bytes());
    out
}

pub fn load_cursor(bytes: &[u8]) -> Result<ResumeCursor, FormatError> {
    let mut r = bytes;
    binio::expect_magic(&mut r, CURSOR_MAGIC)?;
    let cursor = ResumeCursor {
        epoch: binio::read_u64(&mut r, "epoch")?,
        shard_index: binio::read_u64(&mut r, "shard_index")?,
        sample_offset: binio::read_u64(&mut r, "sample_offset")?,
        shuffle_seed: binio::read_u64(&mut r, "shuffle_seed")?,
    };
    let stored = binio::read_u32(&mut r, "checksum")?;
    binio::expect_eof(&mut r)?;
    let computed = cursor.checksum();
    if stored != computed {
        return Err(FormatError::Checksum { stored, computed });
    }
    Ok(cursor)
}

/// Writes to a sibling temporary file, syncs it, then renames over `path`.
pub fn save_cursor_file(path: &Path, cursor: &ResumeCursor) -> Result<(), PackError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&save_cursor(cursor))?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| PackError::Io(e.error))?;
    Ok(())
}

pub fn load_cursor_file(path: &Path) -> Result<ResumeCursor, PackError> {
    Ok(load_cursor(&std::fs::read(path)?)?)
}
