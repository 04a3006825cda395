use super::{PackError, ResumeCursor};
use crate::rng::{shuffle, stream_rng};

/// A sample yielded by [`ShardedStream`]: `index` is the sample's position in
/// its shard's stored order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamSample {
    pub epoch: u64,
    pub shard: usize,
    pub index: u64,
}

/// Endless epoch-by-epoch iteration over sharded data. Each epoch visits the
/// shards in a seeded order and each shard's samples in a seeded order, so the
/// whole stream is a pure function of the shard sizes and the seed.
#[derive(Debug, Clone)]
pub struct ShardedStream {
    shard_sizes: Vec<u64>,
    seed: u64,
    epoch: u64,
    slot: usize,
    offset: u64,
    shard_order: Vec<usize>,
    sample_order: Vec<u64>,
}

const SHARD_ORDER_STREAM: u64 = u32::MAX as u64;

fn epoch_stream(epoch: u64, lane: u64) -> u64 {
    (epoch << 32) | lane
}

impl ShardedStream {
    pub fn new(shard_sizes: Vec<u64>, seed: u64) -> Result<Self, PackError> {
        let mut s = Self::build(shard_sizes, &ResumeCursor { epoch: 0, shard_index: 0, sample_offset: 0, shuffle_seed: seed })?;
        s.settle();
        Ok(s)
    }

    /// Rebuilds the stream positioned exactly at `cursor`.
    pub fn resume(shard_sizes: Vec<u64>, cursor: &ResumeCursor) -> Result<Self, PackError> {
        let s = Self::build(shard_sizes, cursor)?;
        let size = s.shard_sizes[s.shard_order[s.slot]];
        if s.offset >= size {
            return Err(PackError::CursorBounds(format!(
                "sample_offset {} >= size {size} of shard {}",
                s.offset, s.shard_order[s.slot]
            )));
        }
        Ok(s)
    }

    fn build(shard_sizes: Vec<u64>, cursor: &ResumeCursor) -> Result<Self, PackError> {
        if shard_sizes.is_empty() || shard_sizes.iter().all(|&s| s == 0) {
            return Err(PackError::Config("stream needs at least one non-empty shard".into()));
        }
        if shard_sizes.len() as u64 >= SHARD_ORDER_STREAM {
            return Err(PackError::Config("too many shards".into()));
        }
        if cursor.epoch >= 1 << 32 {
            return Err(PackError::CursorBounds(format!("epoch {} exceeds 2^32 - 1", cursor.epoch)));
        }
        if cursor.shard_index >= shard_sizes.len() as u64 {
            return Err(PackError::CursorBounds(format!(
                "shard_index {} >= shard count {}",
                cursor.shard_index,
                shard_sizes.len()
            )));
        }
        let mut s = Self {
            shard_sizes,
            seed: cursor.shuffle_seed,
            epoch: cursor.epoch,
            slot: cursor.shard_index as usize,
            offset: cursor.sample_offset,
            shard_order: Vec::new(),
            sample_order: Vec::new(),
        };
        s.shard_order = s.order_for_epoch(s.epoch);
        s.sample_order = s.order_for_shard();
        Ok(s)
    }

    fn order_for_epoch(&self, epoch: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.shard_sizes.len()).collect();
        shuffle(&mut order, &mut stream_rng(self.seed, epoch_stream(epoch, SHARD_ORDER_STREAM)));
        order
    }

    fn order_for_shard(&self) -> Vec<u64> {
        let shard = self.shard_order[self.slot];
        let mut order: Vec<u64> = (0..self.shard_sizes[shard]).collect();
        shuffle(&mut order, &mut stream_rng(self.seed, epoch_stream(self.epoch, shard as u64)));
        order
    }

    /// Cursor for the next sample [`Iterator::next`] will return.
    pub fn cursor(&self) -> ResumeCursor {
        ResumeCursor {
            epoch: self.epoch,
            shard_index: self.slot as u64,
            sample_offset: self.offset,
            shuffle_seed: self.seed,
        }
    }

    pub fn shard_sizes(&self) -> &[u64] {
        &self.shard_sizes
    }

    /// Moves past exhausted or empty shards.
    fn settle(&mut self) {
        let before = (self.epoch, self.slot);
        while self.offset >= self.shard_sizes[self.shard_order[self.slot]] {
            self.offset = 0;
            self.slot += 1;
            if self.slot == self.shard_order.len() {
                self.slot = 0;
                self.epoch += 1;
                self.shard_order = self.order_for_epoch(self.epoch);
            }
        }
        if (self.epoch, self.slot) != before {
            self.sample_order = self.order_for_shard();
        }
    }
}

impl Iterator for ShardedStream {
    type Item = StreamSample;

    fn next(&mut self) -> Option<StreamSample> {
        let sample = StreamSample {
            epoch: self.epoch,
            shard: self.shard_order[self.slot],
            index: self.sample_order[self.offset as usize],
        };
        self.offset += 1;
        self.settle();
        Some(sample)
    }
}
