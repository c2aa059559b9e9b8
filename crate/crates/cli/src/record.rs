//! Run records and the versioned CSV they are stored in.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use pcp_core::bnp::SolveStats;

pub const SCHEMA: u32 = 1;

pub const HEADER: [&str; 15] = [
    "instance_name",
    "V",
    "E",
    "N",
    "obj",
    "gap_percent",
    "t_total_s",
    "t_rmp_s",
    "t_pricing_s",
    "n_p",
    "n_c",
    "n_n",
    "backend",
    "seed",
    "status",
];

/// Status written for runs that did not produce statistics.
pub const STATUS_ERROR: &str = "error";

/// One solve, as stored in a CSV row. Empty cells read back as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance_name: String,
    pub vertices: Option<usize>,
    pub edges: Option<usize>,
    pub vehicles: Option<usize>,
    pub obj: Option<u32>,
    pub gap_percent: Option<f64>,
    pub t_total_s: Option<f64>,
    pub t_rmp_s: Option<f64>,
    pub t_pricing_s: Option<f64>,
    pub n_pricing: Option<usize>,
    pub n_columns: Option<usize>,
    pub n_nodes: Option<usize>,
    pub backend: String,
    pub seed: u64,
    pub status: String,
}

/// Instance dimensions needed for a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    pub vertices: usize,
    pub edges: usize,
    pub vehicles: usize,
}

impl RunRecord {
    pub fn from_stats(name: &str, dims: Dimensions, stats: &SolveStats, backend: &str, seed: u64) -> Self {
        RunRecord {
            instance_name: name.to_string(),
            vertices: Some(dims.vertices),
            edges: Some(dims.edges),
            vehicles: Some(dims.vehicles),
            obj: stats.obj,
            gap_percent: Some(round_to(stats.gap_percent, 2)),
            t_total_s: Some(round_to(stats.t_total.as_secs_f64(), 3)),
            t_rmp_s: Some(round_to(stats.t_rmp.as_secs_f64(), 3)),
            t_pricing_s: Some(round_to(stats.t_pricing.as_secs_f64(), 3)),
            n_pricing: Some(stats.n_pricing()),
            n_columns: Some(stats.n_columns),
            n_nodes: Some(stats.n_nodes),
            backend: backend.to_string(),
            seed,
            status: stats.status.as_str().to_string(),
        }
    }

    pub fn failed(name: &str, dims: Option<Dimensions>, backend: &str, seed: u64) -> Self {
        RunRecord {
            instance_name: name.to_string(),
            vertices: dims.map(|d| d.vertices),
            edges: dims.map(|d| d.edges),
            vehicles: dims.map(|d| d.vehicles),
            obj: None,
            gap_percent: None,
            t_total_s: None,
            t_rmp_s: None,
            t_pricing_s: None,
            n_pricing: None,
            n_columns: None,
            n_nodes: None,
            backend: backend.to_string(),
            seed,
            status: STATUS_ERROR.to_string(),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.status == STATUS_ERROR
    }

    pub fn to_row(&self) -> Vec<String> {
        vec![
            self.instance_name.clone(),
            opt(self.vertices),
            opt(self.edges),
            opt(self.vehicles),
            opt(self.obj),
            self.gap_percent.map_or_else(String::new, |g| format!("{g:.2}")),
            secs(self.t_total_s),
            secs(self.t_rmp_s),
            secs(self.t_pricing_s),
            opt(self.n_pricing),
            opt(self.n_columns),
            opt(self.n_nodes),
            self.backend.clone(),
            self.seed.to_string(),
            self.status.clone(),
        ]
    }

    pub fn from_row(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != HEADER.len() {
            bail!("expected {} fields, got {}", HEADER.len(), row.len());
        }
        let rec = RunRecord {
            instance_name: row[0].to_string(),
            vertices: cell(row, 1)?,
            edges: cell(row, 2)?,
            vehicles: cell(row, 3)?,
            obj: cell(row, 4)?,
            gap_percent: cell(row, 5)?,
            t_total_s: cell(row, 6)?,
            t_rmp_s: cell(row, 7)?,
            t_pricing_s: cell(row, 8)?,
            n_pricing: cell(row, 9)?,
            n_columns: cell(row, 10)?,
            n_nodes: cell(row, 11)?,
            backend: row[12].to_string(),
            seed: cell(row, 13)?.context("empty seed")?,
            status: row[14].to_string(),
        };
        if rec.backend.is_empty() || rec.status.is_empty() {
            bail!("empty backend or status");
        }
        if !rec.is_failed() && (rec.vertices.is_none() || rec.gap_percent.is_none() || rec.t_total_s.is_none()) {
            bail!("missing V, gap_percent or t_total_s");
        }
        Ok(rec)
    }
}

fn round_to(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn secs(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.3}"))
}

fn cell<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<Option<T>> {
    let s = row[i].trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| anyhow::anyhow!("bad {} value {s:?}", HEADER[i]))
}

/// Appends rows to a CSV, flushing after each one so an interrupted run
/// leaves every completed row on disk.
pub struct CsvSink {
    writer: csv::Writer<File>,
}

impl CsvSink {
    /// Starts a fresh file.
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Self::start(file)
    }

    /// Appends to `path`, writing the schema and header lines when the file
    /// is new or empty. An existing file must carry the same schema.
    pub fn append(path: &Path) -> Result<Self> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        if !fresh {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let mut lines = BufReader::new(file).lines();
            check_schema(lines.next().transpose()?.as_deref())?;
            let header = lines.next().transpose()?.unwrap_or_default();
            if header.trim_end() != HEADER.join(",") {
                bail!("{}: header does not match the run record columns", path.display());
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        if fresh {
            Self::start(file)
        } else {
            Ok(CsvSink {
                writer: csv::WriterBuilder::new().has_headers(false).from_writer(file),
            })
        }
    }

    fn start(mut file: File) -> Result<Self> {
        writeln!(file, "schema={SCHEMA}")?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        writer.write_record(HEADER)?;
        writer.flush()?;
        Ok(CsvSink { writer })
    }

    pub fn write(&mut self, rec: &RunRecord) -> Result<()> {
        self.writer.write_record(rec.to_row())?;
        self.writer.flush()?;
        Ok(())
    }
}

fn check_schema(line: Option<&str>) -> Result<()> {
    let line = line.map(str::trim).unwrap_or("");
    let Some(version) = line.strip_prefix("schema=") else {
        bail!("missing schema line, found {line:?}");
    };
    match version.trim().parse::<u32>() {
        Ok(SCHEMA) => Ok(()),
        _ => bail!("unsupported CSV schema {:?} (expected {SCHEMA})", version),
    }
}

/// Reads a run CSV. Malformed rows are skipped with a warning; a missing or
/// unknown schema line is an error.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (first, rest) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    check_schema(Some(first)).with_context(|| path.display().to_string())?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(rest.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER) {
        bail!("{}: header does not match the run record columns", path.display());
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        // schema line, header, then data rows
        let line = i + 3;
        match row.map_err(anyhow::Error::from).and_then(|r| RunRecord::from_row(&r)) {
            Ok(rec) => out.push(rec),
            Err(e) => log::warn!("{}:{line}: skipping malformed row: {e}", path.display()),
        }
    }
    Ok(out)
}

/// Means over the successful runs of one (V, backend) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub failed: usize,
    pub mean_gap: Option<f64>,
    pub mean_t_total: Option<f64>,
}

/// Groups records by (V, backend). Failed runs without a known size are
/// grouped under V = 0.
pub fn aggregate(records: &[RunRecord]) -> BTreeMap<(usize, String), Aggregate> {
    let mut sums: BTreeMap<(usize, String), (usize, usize, f64, f64)> = BTreeMap::new();
    for r in records {
        let entry = sums
            .entry((r.vertices.unwrap_or(0), r.backend.clone()))
            .or_insert((0, 0, 0.0, 0.0));
        match (r.gap_percent, r.t_total_s) {
            (Some(g), Some(t)) if !r.is_failed() => {
                entry.0 += 1;
                entry.2 += g;
                entry.3 += t;
            }
            _ => entry.1 += 1,
        }
    }
    sums.into_iter()
        .map(|(key, (runs, failed, gap, t))| {
            let mean = |s: f64| (runs > 0).then(|| s / runs as f64);
            let agg = Aggregate {
                runs,
                failed,
                mean_gap: mean(gap),
                mean_t_total: mean(t),
            };
            (key, agg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    use pcp_core::bnp::SolveStatus;

    fn stats() -> SolveStats {
        SolveStats {
            obj: Some(14),
            gap_percent: 0.0,
            lower_bound: Some(14),
            root_bound: Some(12.5),
            t_total: Duration::from_micros(1_234_567),
            t_rmp: Duration::from_micros(400_400),
            t_pricing: Duration::from_micros(7_000),
            n_pricing_heuristic: 3,
            n_pricing_exact: 2,
            n_columns: 40,
            n_nodes: 5,
            status: SolveStatus::Optimal,
            lp_audit: None,
        }
    }

    fn dims() -> Dimensions {
        Dimensions {
            vertices: 10,
            edges: 7,
            vehicles: 5,
        }
    }

    #[test]
    fn rows_round_trip() {
        let rec = RunRecord::from_stats("v10c5k2s1", dims(), &stats(), "bsb", 3);
        let row = rec.to_row();
        assert_eq!(row[6], "1.235");
        assert_eq!(row[8], "0.007");
        assert_eq!(row[9], "5");
        let back = RunRecord::from_row(&csv::StringRecord::from(row)).unwrap();
        assert_eq!(back, rec);

        let failed = RunRecord::failed("x", None, "exact", 0);
        let back = RunRecord::from_row(&csv::StringRecord::from(failed.to_row())).unwrap();
        assert_eq!(back, failed);
    }

    #[test]
    fn rows_missing_measurements_are_rejected() {
        let mut row = RunRecord::from_stats("a", dims(), &stats(), "exact", 0).to_row();
        row[5] = String::new();
        assert!(RunRecord::from_row(&csv::StringRecord::from(row.clone())).is_err());
        row[5] = "zero".into();
        assert!(RunRecord::from_row(&csv::StringRecord::from(row)).is_err());
        assert!(RunRecord::from_row(&csv::StringRecord::from(vec!["a", "b"])).is_err());
    }

    #[test]
    fn schema_line_is_checked() {
        assert!(check_schema(Some("schema=1")).is_ok());
        assert!(check_schema(Some("schema=2")).is_err());
        assert!(check_schema(Some("instance_name,V")).is_err());
        assert!(check_schema(None).is_err());
    }

    #[test]
    fn aggregate_separates_failures() {
        let mut a = RunRecord::from_stats("a", dims(), &stats(), "exact", 0);
        a.gap_percent = Some(10.0);
        a.t_total_s = Some(1.0);
        let mut b = a.clone();
        b.gap_percent = Some(20.0);
        b.t_total_s = Some(3.0);
        let c = RunRecord::failed("c", Some(dims()), "exact", 0);
        let d = RunRecord::failed("d", None, "bsb", 0);
        let agg = aggregate(&[a, b, c, d]);
        let exact = &agg[&(10, "exact".to_string())];
        assert_eq!((exact.runs, exact.failed), (2, 1));
        assert_eq!(exact.mean_gap, Some(15.0));
        assert_eq!(exact.mean_t_total, Some(2.0));
        let bsb = &agg[&(0, "bsb".to_string())];
        assert_eq!((bsb.runs, bsb.failed, bsb.mean_gap), (0, 1, None));
    }
}
