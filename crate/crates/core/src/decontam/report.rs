use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "train_source,benchmark,duplicates";
/// `train_source` value of the per-benchmark totals lines in CSV output.
pub const TOTAL_LABEL: &str = "TOTAL";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageRow {
    pub train_source: String,
    pub benchmark: String,
    pub duplicates: u64,
}

/// Flagged-sample counts keyed by `(train_source, benchmark)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LeakageReport {
    counts: BTreeMap<(String, String), u64>,
}

impl LeakageReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, train_source: &str, benchmark: &str, n: u64) {
        *self
            .counts
            .entry((train_source.to_string(), benchmark.to_string()))
            .or_default() += n;
    }

    pub fn count(&self, train_source: &str, benchmark: &str) -> u64 {
        self.counts
            .get(&(train_source.to_string(), benchmark.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Rows sorted by `(train_source, benchmark)`.
    pub fn rows(&self) -> Vec<LeakageRow> {
        self.counts
            .iter()
            .map(|((s, b), &n)| LeakageRow {
                train_source: s.clone(),
                benchmark: b.clone(),
                duplicates: n,
            })
            .collect()
    }

    /// Column sums per benchmark.
    pub fn totals(&self) -> BTreeMap<String, u64> {
        let mut t = BTreeMap::new();
        for ((_, b), &n) in &self.counts {
            *t.entry(b.clone()).or_default() += n;
        }
        t
    }

    /// Associative, commutative merge of shard-level reports.
    pub fn merge(&mut self, other: &LeakageReport) {
        for ((s, b), &n) in &other.counts {
            self.add(s, b, n);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Serialize)]
struct JsonReport {
    rows: Vec<LeakageRow>,
    totals: BTreeMap<String, u64>,
}

/// Deterministic serialization of a report.
///
/// CSV: header, one line per row, then one `TOTAL,<benchmark>,<sum>` line per
/// benchmark. JSON: `{"rows": [...], "totals": {...}}` followed by a newline.
pub fn emit_report(report: &LeakageReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let doc = JsonReport {
                rows: report.rows(),
                totals: report.totals(),
            };
            let mut out = serde_json::to_vec_pretty(&doc).expect("plain data serializes");
            out.push(b'\n');
            out
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
            for row in report.rows() {
                w.write_record([&row.train_source, &row.benchmark, &row.duplicates.to_string()])
                    .expect("in-memory write");
            }
            for (bench, n) in report.totals() {
                w.write_record([TOTAL_LABEL, &bench, &n.to_string()]).expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
    }
}
