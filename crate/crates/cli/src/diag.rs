use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Collects per-record data errors. Every diagnostic names the file, the
/// 1-based line (0 when the record has no line) and the record id if known.
#[derive(Debug, Default)]
pub struct Diagnostics {
    count: usize,
}

impl Diagnostics {
    pub fn report(&mut self, file: &Path, line: usize, id: Option<&str>, msg: impl Display) {
        match id {
            Some(id) => eprintln!("{}:{line}: {id}: {msg}", file.display()),
            None => eprintln!("{}:{line}: {msg}", file.display()),
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// A parsed JSONL line with its 1-based line number.
pub struct Line<T> {
    pub line: usize,
    pub value: T,
}

fn guess_id(raw: &str) -> Option<String> {
    let v: Value = serde_json::from_str(raw).ok()?;
    ["sample_id", "image_id", "id"].iter().find_map(|k| v.get(*k)?.as_str().map(str::to_string))
}

pub fn open_input(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("cannot open input {}", path.display()))
}

/// Reads every non-blank line of a JSONL file. Lines that fail to decode
/// are reported and skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path, diag: &mut Diagnostics) -> Result<Vec<Line<T>>> {
    let reader = BufReader::new(open_input(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(&line) {
            Ok(value) => out.push(Line { line: i + 1, value }),
            Err(e) => diag.report(path, i + 1, guess_id(&line).as_deref(), format!("malformed record: {e}")),
        }
    }
    Ok(out)
}

pub fn create_output(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("cannot create output {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, rows: impl IntoIterator<Item = &'a T>) -> Result<()> {
    let mut w = create_output(path)?;
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = create_output(path)?;
    w.write_all(bytes)?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// Pretty JSON document plus trailing newline, to `path` or stdout.
pub fn emit_json<T: Serialize>(out: Option<&Path>, doc: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(doc)?;
    bytes.push(b'\n');
    match out {
        Some(p) => write_bytes(p, &bytes),
        None => {
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

/// Relative paths inside a list file resolve against the list's directory.
pub fn resolve(list: &Path, entry: &str) -> PathBuf {
    let p = Path::new(entry);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        list.parent().unwrap_or(Path::new("")).join(p)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Shard {
    pub count: u64,
    pub index: u64,
}

impl Shard {
    pub fn new(count: u64, index: u64) -> Result<Self> {
        if count == 0 {
            bail!("--shard-count must be >= 1");
        }
        if index >= count {
            bail!("--shard-index {index} must be < --shard-count {count}");
        }
        Ok(Self { count, index })
    }

    pub fn owns(&self, key: &str) -> bool {
        kyc_core::rng::shard_of(key, self.count) == self.index
    }
}
