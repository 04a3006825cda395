use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{validate_items, PackError, WorkItem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    Linear,
    Quadratic,
}

/// `linear`: `tokens`. `quadratic`: `tokens + tokens^2 / ctx`. `ctx` is
/// ignored in linear mode.
pub fn estimate_cost<T: Scalar>(tokens: u64, mode: CostMode, ctx: u64) -> Result<T, PackError> {
    if tokens == 0 {
        return Err(PackError::Config("tokens must be >= 1".into()));
    }
    let t = T::lit(tokens as f64);
    match mode {
        CostMode::Linear => Ok(t),
        CostMode::Quadratic if ctx == 0 => Err(PackError::Config("quadratic cost needs ctx >= 1".into())),
        CostMode::Quadratic => Ok(t + t * t / T::lit(ctx as f64)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAssignment<T> {
    pub groups: usize,
    pub assignment: BTreeMap<String, usize>,
    pub loads: Vec<T>,
}

impl<T: Scalar> GroupAssignment<T> {
    pub fn makespan(&self) -> T {
        self.loads.iter().copied().fold(T::zero(), T::max)
    }

    /// Ids assigned to group `g`, ascending.
    pub fn members(&self, g: usize) -> Vec<&str> {
        self.assignment.iter().filter(|(_, &grp)| grp == g).map(|(id, _)| id.as_str()).collect()
    }
}

/// Longest-processing-time-first: items by descending cost (ties by
/// ascending id), each to the least-loaded group (ties to the lowest index).
pub fn balance_greedy<T: Scalar>(items: &[WorkItem<T>], m: usize) -> Result<GroupAssignment<T>, PackError> {
    if m == 0 {
        return Err(PackError::Config("group count must be >= 1".into()));
    }
    validate_items(items)?;
    let mut order: Vec<&WorkItem<T>> = items.iter().collect();
    order.sort_by(|a, b| b.cost.partial_cmp(&a.cost).expect("finite costs").then_with(|| a.id.cmp(&b.id)));
    let mut loads = vec![T::zero(); m];
    let mut assignment = BTreeMap::new();
    for item in order {
        let mut g = 0;
        for (i, &load) in loads.iter().enumerate().skip(1) {
            if load < loads[g] {
                g = i;
            }
        }
        loads[g] = loads[g] + item.cost;
        assignment.insert(item.id.clone(), g);
    }
    Ok(GroupAssignment { groups: m, assignment, loads })
}
