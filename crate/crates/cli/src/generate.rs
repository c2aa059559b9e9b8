use std::path::PathBuf;

use clap::Args;
use pcp_core::instance::{generate, write_instance, DEFAULT_DURATION, DEFAULT_HORIZON};
use pcp_core::pricing::Backend;

use crate::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Total number of candidate intervals.
    #[arg(long)]
    vertices: usize,
    /// Candidate intervals per vehicle.
    #[arg(long)]
    k: usize,
    /// Number of charging piles.
    #[arg(long)]
    piles: usize,
    /// Comma-separated instance seeds.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: u32,
    #[arg(long, default_value_t = DEFAULT_DURATION)]
    duration: u32,
    /// Backends listed in the printed manifest lines.
    #[arg(long, value_delimiter = ',', default_value = "exact")]
    backends: Vec<Backend>,
    /// Overwrite existing files.
    #[arg(long)]
    force: bool,
}

/// Writes the instances and prints one `<path> <backend> 0` manifest line per
/// file and backend. Nothing is written if any target exists without `--force`.
pub fn run(args: &GenerateArgs) -> CliResult<()> {
    if args.piles == 0 {
        return Err(CliError::usage(anyhow::anyhow!("--piles must be positive")));
    }
    let mut instances = Vec::with_capacity(args.seeds.len());
    for &seed in &args.seeds {
        let inst = generate(args.vertices, args.k, args.piles, seed, args.horizon, args.duration)
            .map_err(CliError::usage)?;
        let path = args.out_dir.join(inst.file_name());
        if path.exists() && !args.force {
            return Err(CliError::usage(anyhow::anyhow!(
                "{} exists (use --force to overwrite)",
                path.display()
            )));
        }
        instances.push((path, inst));
    }
    std::fs::create_dir_all(&args.out_dir).map_err(CliError::internal)?;
    for (path, inst) in &instances {
        write_instance(inst, path).map_err(CliError::internal)?;
        for b in &args.backends {
            println!("{} {b} 0", path.display());
        }
    }
    Ok(())
}
