use serde::{Deserialize, Serialize};

use super::{validate_items, PackError, WorkItem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackBin {
    pub ids: Vec<String>,
    pub fill: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackPlan {
    pub bins: Vec<PackBin>,
    pub capacity: u64,
}

/// First-fit-decreasing by token count, ties by ascending id. Items are
/// never split across bins.
pub fn pack_ffd<T: Scalar>(items: &[WorkItem<T>], capacity: u64) -> Result<PackPlan, PackError> {
    if capacity == 0 {
        return Err(PackError::Config("capacity must be >= 1".into()));
    }
    validate_items(items)?;
    if let Some(big) = items.iter().find(|it| it.tokens > capacity) {
        return Err(PackError::Oversize { id: big.id.clone(), tokens: big.tokens, capacity });
    }
    let mut order: Vec<&WorkItem<T>> = items.iter().collect();
    order.sort_by(|a, b| b.tokens.cmp(&a.tokens).then_with(|| a.id.cmp(&b.id)));
    let mut bins: Vec<PackBin> = Vec::new();
    for item in order {
        match bins.iter_mut().find(|b| b.fill + item.tokens <= capacity) {
            Some(bin) => {
                bin.ids.push(item.id.clone());
                bin.fill += item.tokens;
            }
            None => bins.push(PackBin { ids: vec![item.id.clone()], fill: item.tokens }),
        }
    }
    Ok(PackPlan { bins, capacity })
}
