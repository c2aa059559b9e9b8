use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use crate::record::{aggregate, read_records, Aggregate};
use crate::{CliError, CliResult};

pub const GAP_FILE: &str = "gap_vs_v.tsv";
pub const TIME_FILE: &str = "ttotal_vs_v.tsv";

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Long-format TSV: one row per (backend, V) point, grouped by backend and
/// sorted by V within each series.
pub fn series(points: &[((usize, String), Aggregate)], column: &str, value: fn(&Aggregate) -> Option<f64>) -> String {
    let mut rows: Vec<(&str, usize, f64, usize)> = points
        .iter()
        .filter_map(|((v, backend), agg)| value(agg).map(|x| (backend.as_str(), *v, x, agg.runs)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)));
    let mut out = format!("backend\tV\t{column}\truns\n");
    for (backend, v, x, runs) in rows {
        let _ = writeln!(out, "{backend}\t{v}\t{x:.6}\t{runs}");
    }
    out
}

pub fn run(args: &ReportArgs) -> CliResult<()> {
    let records = read_records(&args.csv).map_err(CliError::usage)?;
    let skipped = records.iter().filter(|r| r.is_failed()).count();
    if skipped > 0 {
        log::warn!("{skipped} failed runs left out of the series");
    }
    let points: Vec<_> = aggregate(&records).into_iter().filter(|(_, a)| a.runs > 0).collect();
    std::fs::create_dir_all(&args.out_dir).map_err(CliError::internal)?;
    let gap = series(&points, "mean_gap_percent", |a| a.mean_gap);
    let time = series(&points, "mean_t_total_s", |a| a.mean_t_total);
    for (name, body) in [(GAP_FILE, gap), (TIME_FILE, time)] {
        let path = args.out_dir.join(name);
        std::fs::write(&path, body).map_err(CliError::internal)?;
        println!("{}", path.display());
    }
    Ok(())
}
