use std::path::{Path, PathBuf};

use clap::Args;
use pcp_core::bnp::{self, SolveOutcome, SolveStatus};
use pcp_core::config::SolverConfig;
use pcp_core::graph::build_conflict_graph;
use pcp_core::instance::{read_instance, Instance};
use pcp_core::pricing::Backend;

use crate::record::{CsvSink, Dimensions, RunRecord};
use crate::{CliError, CliResult, SolverArgs};

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Pricing backend: exact, bsb or simcim.
    #[arg(long)]
    pricing: Option<Backend>,
    /// Seed of the heuristic pricers.
    #[arg(long)]
    seed: Option<u64>,
    /// Append the run record to this CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

pub fn dimensions(inst: &Instance) -> Dimensions {
    Dimensions {
        vertices: inst.num_vertices(),
        edges: build_conflict_graph(inst).num_edges(),
        vehicles: inst.num_vehicles(),
    }
}

pub fn load(path: &Path) -> CliResult<Instance> {
    read_instance(path).map_err(|e| CliError::usage(anyhow::anyhow!("{}: {e}", path.display())))
}

/// Runs the solver and builds the matching record.
pub fn solve_instance(inst: &Instance, cfg: &SolverConfig) -> CliResult<(SolveOutcome, RunRecord)> {
    let out = bnp::solve(inst, cfg).map_err(CliError::internal)?;
    let rec = RunRecord::from_stats(
        &inst.name(),
        dimensions(inst),
        &out.stats,
        cfg.pricing.backend.as_str(),
        cfg.qaia.seed,
    );
    Ok((out, rec))
}

pub fn run(args: &SolveArgs) -> CliResult<()> {
    let cfg = args.solver.build(args.pricing, args.seed)?;
    let inst = load(&args.instance)?;
    let mut sink = args.csv.as_deref().map(CsvSink::append).transpose().map_err(CliError::usage)?;
    let (out, rec) = match solve_instance(&inst, &cfg) {
        Ok(done) => done,
        Err(e) => {
            if let Some(sink) = &mut sink {
                let failed =
                    RunRecord::failed(&inst.name(), Some(dimensions(&inst)), cfg.pricing.backend.as_str(), cfg.qaia.seed);
                sink.write(&failed).map_err(CliError::internal)?;
            }
            return Err(e);
        }
    };
    print_table(&inst, &out, &rec);
    if let Some(sink) = &mut sink {
        sink.write(&rec).map_err(CliError::internal)?;
    }
    match out.stats.status {
        SolveStatus::Infeasible => Err(CliError::Infeasible),
        _ => Ok(()),
    }
}

fn print_table(inst: &Instance, out: &SolveOutcome, rec: &RunRecord) {
    let s = &out.stats;
    let dash = || "-".to_string();
    let rows = [
        ("instance", rec.instance_name.clone()),
        ("V / E / N", format!("{} / {} / {}", inst.num_vertices(), rec.edges.unwrap_or(0), inst.num_vehicles())),
        ("piles", inst.piles.to_string()),
        ("backend", rec.backend.clone()),
        ("seed", rec.seed.to_string()),
        ("status", s.status.to_string()),
        ("obj", s.obj.map_or_else(dash, |o| o.to_string())),
        ("gap %", format!("{:.2}", s.gap_percent)),
        ("lower bound", s.lower_bound.map_or_else(dash, |b| b.to_string())),
        ("root bound", s.root_bound.map_or_else(dash, |b| format!("{b:.4}"))),
        ("t_total s", format!("{:.3}", s.t_total.as_secs_f64())),
        ("t_rmp s", format!("{:.3}", s.t_rmp.as_secs_f64())),
        ("t_pricing s", format!("{:.3}", s.t_pricing.as_secs_f64())),
        (
            "n_p",
            format!("{} (heuristic {}, exact {})", s.n_pricing(), s.n_pricing_heuristic, s.n_pricing_exact),
        ),
        ("n_c", s.n_columns.to_string()),
        ("n_n", s.n_nodes.to_string()),
    ];
    for (k, v) in rows {
        println!("{k:<12} {v}");
    }
    if let Some(inc) = &out.incumbent {
        println!("schedule");
        for (vehicle, (&v, &pile)) in inc.selection.iter().zip(&inc.piles).enumerate() {
            let iv = &inst.vertices[v];
            println!("  vehicle {vehicle:<4} pile {pile:<3} [{}, {})", iv.start, iv.completion);
        }
    }
}
