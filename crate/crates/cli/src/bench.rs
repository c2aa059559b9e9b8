use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::anyhow;
use clap::Args;
use pcp_core::pricing::Backend;

use crate::record::{aggregate, CsvSink, RunRecord};
use crate::solve::{dimensions, load, solve_instance};
use crate::{CliError, CliResult, SolverArgs};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Lines of `<instance-path> <backend> <seed>`; `#` starts a comment.
    #[arg(long)]
    manifest: PathBuf,
    /// Output CSV, replaced if present.
    #[arg(long)]
    csv: PathBuf,
    /// Solves running at once.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub instance: PathBuf,
    pub backend: Backend,
    pub seed: u64,
}

/// Parses a manifest. Relative paths are taken from `base`.
pub fn parse_manifest(text: &str, base: &Path) -> anyhow::Result<Vec<Run>> {
    let mut runs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [path, backend, seed] = fields[..] else {
            return Err(anyhow!("line {}: expected `<instance> <backend> <seed>`", i + 1));
        };
        let backend = backend.parse::<Backend>().map_err(|e| anyhow!("line {}: {e}", i + 1))?;
        let seed = seed.parse().map_err(|_| anyhow!("line {}: bad seed {seed:?}", i + 1))?;
        runs.push(Run {
            instance: base.join(path),
            backend,
            seed,
        });
    }
    Ok(runs)
}

fn execute(run: &Run, args: &SolverArgs) -> RunRecord {
    let name = run
        .instance
        .file_stem()
        .map_or_else(|| run.instance.display().to_string(), |s| s.to_string_lossy().into_owned());
    let inst = match load(&run.instance) {
        Ok(inst) => inst,
        Err(e) => {
            report_failure(&name, &e);
            return RunRecord::failed(&name, None, run.backend.as_str(), run.seed);
        }
    };
    let solved = args
        .build(Some(run.backend), Some(run.seed))
        .and_then(|cfg| solve_instance(&inst, &cfg));
    match solved {
        Ok((_, rec)) => rec,
        Err(e) => {
            report_failure(&name, &e);
            RunRecord::failed(&inst.name(), Some(dimensions(&inst)), run.backend.as_str(), run.seed)
        }
    }
}

fn report_failure(name: &str, e: &CliError) {
    match e {
        CliError::Usage(e) | CliError::Internal(e) => log::warn!("{name}: run failed: {e:#}"),
        CliError::Infeasible => log::warn!("{name}: infeasible"),
    }
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    if args.jobs == 0 {
        return Err(CliError::usage(anyhow!("--jobs must be positive")));
    }
    // surface config mistakes before any solve
    args.solver.build(None, None)?;
    let text = std::fs::read_to_string(&args.manifest)
        .map_err(|e| CliError::usage(anyhow!("reading {}: {e}", args.manifest.display())))?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let runs = parse_manifest(&text, base).map_err(|e| CliError::usage(e.context(args.manifest.display().to_string())))?;

    let sink = Mutex::new(CsvSink::create(&args.csv).map_err(CliError::usage)?);
    let records = Mutex::new(Vec::with_capacity(runs.len()));
    let next = AtomicUsize::new(0);
    let write_error = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.min(runs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(run) = runs.get(i) else { break };
                let rec = execute(run, &args.solver);
                if let Err(e) = sink.lock().unwrap().write(&rec) {
                    write_error.lock().unwrap().get_or_insert(e);
                }
                records.lock().unwrap().push((i, rec));
            });
        }
    });
    if let Some(e) = write_error.into_inner().unwrap() {
        return Err(CliError::internal(e));
    }
    let mut records = records.into_inner().unwrap();
    records.sort_by_key(|(i, _)| *i);
    let records: Vec<RunRecord> = records.into_iter().map(|(_, r)| r).collect();

    println!("{:>6} {:<8} {:>5} {:>7} {:>10} {:>12}", "V", "backend", "runs", "failed", "mean_gap", "mean_t_total");
    for ((v, backend), agg) in aggregate(&records) {
        let fmt = |x: Option<f64>, digits: usize| x.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"));
        println!(
            "{v:>6} {backend:<8} {:>5} {:>7} {:>10} {:>12}",
            agg.runs,
            agg.failed,
            fmt(agg.mean_gap, 2),
            fmt(agg.mean_t_total, 3)
        );
    }
    let failed = records.iter().filter(|r| r.is_failed()).count();
    if failed > 0 {
        log::warn!("{failed} of {} runs failed", records.len());
    }
    Ok(())
}
