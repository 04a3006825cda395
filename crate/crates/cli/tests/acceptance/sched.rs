use kyc_core::pack_balance::{balance_greedy, pack_ffd, WorkItem};

use crate::Verdict;

const MAX_N: usize = 12;
const CAPACITIES: [u64; 4] = [9, 10, 11, 12];

/// Every non-increasing sequence over 1..=9 of length 1..=MAX_N.
fn multisets(out: &mut Vec<Vec<u64>>, cur: &mut Vec<u64>, max: u64) {
    if !cur.is_empty() {
        out.push(cur.clone());
    }
    if cur.len() == MAX_N {
        return;
    }
    for v in (1..=max).rev() {
        cur.push(v);
        multisets(out, cur, v);
        cur.pop();
    }
}

/// Exact minimum makespan by depth-first search over assignments.
fn opt_makespan(items: &[u64], m: usize, upper: u64, lower: u64) -> u64 {
    fn go(items: &[u64], i: usize, loads: &mut [u64], best: &mut u64, lower: u64) {
        if *best == lower {
            return;
        }
        if i == items.len() {
            *best = (*best).min(*loads.iter().max().unwrap());
            return;
        }
        for g in 0..loads.len() {
            if loads[..g].contains(&loads[g]) || loads[g] + items[i] >= *best {
                continue;
            }
            loads[g] += items[i];
            go(items, i + 1, loads, best, lower);
            loads[g] -= items[i];
        }
    }
    let mut best = upper;
    go(items, 0, &mut vec![0; m], &mut best, lower);
    best
}

/// Exact minimum bin count by depth-first search.
fn opt_bins(items: &[u64], cap: u64, upper: usize, lower: usize) -> usize {
    fn go(items: &[u64], i: usize, fills: &mut Vec<u64>, cap: u64, best: &mut usize, lower: usize) {
        if *best == lower {
            return;
        }
        if i == items.len() {
            *best = (*best).min(fills.len());
            return;
        }
        for b in 0..fills.len() {
            if fills[..b].contains(&fills[b]) || fills[b] + items[i] > cap {
                continue;
            }
            fills[b] += items[i];
            go(items, i + 1, fills, cap, best, lower);
            fills[b] -= items[i];
        }
        if fills.len() + 1 < *best {
            fills.push(items[i]);
            go(items, i + 1, fills, cap, best, lower);
            fills.pop();
        }
    }
    let mut best = upper;
    go(items, 0, &mut Vec::new(), cap, &mut best, lower);
    best
}

pub fn exhaustive_bounds() -> Verdict {
    let mut all = Vec::new();
    multisets(&mut all, &mut Vec::new(), 9);
    let (mut lpt_bad, mut ffd_bad, mut lpt_exact, mut ffd_exact) = (0usize, 0usize, 0usize, 0usize);
    let mut first_bad = None;
    for costs in &all {
        let items: Vec<WorkItem<f64>> = costs
            .iter()
            .enumerate()
            .map(|(i, &c)| WorkItem::new(format!("i{i:02}"), c, c as f64).unwrap())
            .collect();
        let sum: u64 = costs.iter().sum();
        for m in 2..=4u64 {
            let lpt = balance_greedy(&items, m as usize).unwrap().makespan() as u64;
            let lower = costs[0].max(sum.div_ceil(m));
            // 3m * LPT <= (4m - 1) * OPT, checked against a lower bound first
            let opt = if 3 * m * lpt <= (4 * m - 1) * lower {
                lower
            } else {
                lpt_exact += 1;
                opt_makespan(costs, m as usize, lpt, lower)
            };
            if 3 * m * lpt > (4 * m - 1) * opt {
                lpt_bad += 1;
                first_bad.get_or_insert(format!("LPT {costs:?} m={m}"));
            }
        }
        for cap in CAPACITIES {
            let bins = pack_ffd(&items, cap).unwrap().bins.len();
            let big = costs.iter().filter(|&&c| 2 * c > cap).count();
            let lower = (sum.div_ceil(cap) as usize).max(big);
            let opt = if 9 * bins <= 11 * lower + 9 {
                lower
            } else {
                ffd_exact += 1;
                opt_bins(costs, cap, bins, lower)
            };
            if 9 * bins > 11 * opt + 9 {
                ffd_bad += 1;
                first_bad.get_or_insert(format!("FFD {costs:?} cap={cap}"));
            }
        }
    }
    Verdict::new(
        lpt_bad == 0 && ffd_bad == 0,
        format!(
            "{} multisets x m in {{2,3,4}}: {lpt_bad} LPT violations ({lpt_exact} exact optima computed); x capacity in {CAPACITIES:?}: {ffd_bad} FFD violations ({ffd_exact} exact optima){}",
            all.len(),
            first_bad.map(|f| format!("; first {f}")).unwrap_or_default()
        ),
    )
}
