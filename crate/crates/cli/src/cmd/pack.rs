use std::collections::HashSet;
use std::path::Path;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use kyc_core::pack_balance::{
    balance_greedy, estimate_cost, load_cursor_file, pack_ffd, CostMode, ShardedStream, WorkItem,
};

use crate::diag::{emit_json, read_jsonl, Diagnostics};
use crate::{BalanceArgs, CostArgs, CostModeArg, CursorCmd, PackArgs};

#[derive(Debug, Deserialize)]
struct ItemLine {
    id: String,
    tokens: u64,
    cost: Option<f64>,
}

fn load_items(path: &Path, cost: &CostArgs, diag: &mut Diagnostics) -> Result<Vec<(usize, WorkItem<f64>)>> {
    let mode = match cost.cost_mode {
        CostModeArg::Linear => CostMode::Linear,
        CostModeArg::Quadratic => CostMode::Quadratic,
    };
    if mode == CostMode::Quadratic && cost.ctx == 0 {
        bail!("--cost-mode quadratic needs --ctx >= 1");
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for l in read_jsonl::<ItemLine>(path, diag)? {
        let ItemLine { id, tokens, cost: explicit } = l.value;
        if !seen.insert(id.clone()) {
            diag.report(path, l.line, Some(&id), "duplicate id");
            continue;
        }
        let c = match explicit {
            Some(c) => Ok(c),
            None => estimate_cost(tokens, mode, cost.ctx),
        };
        match c.and_then(|c| WorkItem::new(id.clone(), tokens, c)) {
            Ok(item) => out.push((l.line, item)),
            Err(e) => diag.report(path, l.line, Some(&id), e),
        }
    }
    Ok(out)
}

pub fn pack(args: &PackArgs) -> Result<usize> {
    if args.capacity == 0 {
        bail!("--capacity must be >= 1");
    }
    let mut diag = Diagnostics::default();
    let mut items = Vec::new();
    for (line, item) in load_items(&args.items, &args.cost, &mut diag)? {
        if item.tokens > args.capacity {
            diag.report(&args.items, line, Some(&item.id), format!("{} tokens exceed capacity {}", item.tokens, args.capacity));
        } else {
            items.push(item);
        }
    }
    let plan = pack_ffd(&items, args.capacity)?;
    emit_json(args.out.as_deref(), &plan)?;
    Ok(diag.count())
}

#[derive(Serialize)]
struct BalanceDoc<'a> {
    groups: usize,
    makespan: f64,
    loads: &'a [f64],
    assignment: &'a std::collections::BTreeMap<String, usize>,
}

pub fn balance(args: &BalanceArgs) -> Result<usize> {
    if args.groups == 0 {
        bail!("--groups must be >= 1");
    }
    let mut diag = Diagnostics::default();
    let items: Vec<WorkItem<f64>> = load_items(&args.items, &args.cost, &mut diag)?.into_iter().map(|(_, i)| i).collect();
    let a = balance_greedy(&items, args.groups)?;
    let doc = BalanceDoc { groups: a.groups, makespan: a.makespan(), loads: &a.loads, assignment: &a.assignment };
    emit_json(args.out.as_deref(), &doc)?;
    Ok(diag.count())
}

#[derive(Serialize)]
struct CursorDoc {
    epoch: u64,
    shard_index: u64,
    sample_offset: u64,
    shuffle_seed: u64,
    checksum: String,
}

pub fn cursor(cmd: &CursorCmd) -> Result<usize> {
    let mut diag = Diagnostics::default();
    let path = match cmd {
        CursorCmd::Inspect { path } | CursorCmd::Verify { path, .. } => path,
    };
    if !path.exists() {
        bail!("cannot open input {}", path.display());
    }
    let c = match load_cursor_file(path) {
        Ok(c) => c,
        Err(e) => {
            diag.report(path, 0, None, e);
            return Ok(diag.count());
        }
    };
    match cmd {
        CursorCmd::Inspect { .. } => emit_json(
            None,
            &CursorDoc {
                epoch: c.epoch,
                shard_index: c.shard_index,
                sample_offset: c.sample_offset,
                shuffle_seed: c.shuffle_seed,
                checksum: format!("{:#010x}", c.checksum()),
            },
        )?,
        CursorCmd::Verify { shards, .. } => {
            if !shards.is_empty() {
                if let Err(e) = ShardedStream::resume(shards.clone(), &c) {
                    diag.report(path, 0, None, e);
                    return Ok(diag.count());
                }
            }
            println!("ok");
        }
    }
    Ok(diag.count())
}
