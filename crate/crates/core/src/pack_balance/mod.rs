//! Sequence packing, cost-balanced group assignment and the resumable
//! sample cursor.

mod balance;
mod cursor;
mod ffd;
mod stream;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binio::FormatError;
use crate::scalar::Scalar;

pub use balance::{balance_greedy, estimate_cost, CostMode, GroupAssignment};
pub use cursor::{load_cursor, load_cursor_file, save_cursor, save_cursor_file, ResumeCursor, CURSOR_MAGIC};
pub use ffd::{pack_ffd, PackBin, PackPlan};
pub use stream::{ShardedStream, StreamSample};

/// One unit of training work. `cost` is a FLOPs proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkItem<T> {
    pub id: String,
    pub tokens: u64,
    pub cost: T,
}

impl<T: Scalar> WorkItem<T> {
    pub fn new(id: impl Into<String>, tokens: u64, cost: T) -> Result<Self, PackError> {
        let item = Self { id: id.into(), tokens, cost };
        item.validate()?;
        Ok(item)
    }

    pub fn validate(&self) -> Result<(), PackError> {
        if self.tokens == 0 {
            return Err(PackError::InvalidItem { id: self.id.clone(), reason: "tokens must be >= 1".into() });
        }
        if !(self.cost.is_finite() && self.cost >= T::zero()) {
            return Err(PackError::InvalidItem {
                id: self.id.clone(),
                reason: format!("cost must be finite and >= 0, got {}", self.cost),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PackError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("item {id:?}: {reason}")]
    InvalidItem { id: String, reason: String },
    #[error("duplicate item id {0:?}")]
    DuplicateId(String),
    #[error("item {id:?} has {tokens} tokens, over bin capacity {capacity}")]
    Oversize { id: String, tokens: u64, capacity: u64 },
    #[error("cursor out of bounds: {0}")]
    CursorBounds(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("cursor file: {0}")]
    Io(#[from] std::io::Error),
}

fn validate_items<T: Scalar>(items: &[WorkItem<T>]) -> Result<(), PackError> {
    let mut seen = std::collections::HashSet::with_capacity(items.len());
    for item in items {
        item.validate()?;
        if !seen.insert(item.id.as_str()) {
            return Err(PackError::DuplicateId(item.id.clone()));
        }
    }
    Ok(())
}
