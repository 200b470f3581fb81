use std::path::PathBuf;

use annealsched::instance::Setup;
use annealsched::solvers::SolverKind;
use annealsched::topology::TopologySpec;
use clap::{Args, Parser, Subcommand};

use crate::bench::KSpec;

#[derive(Debug, Parser)]
#[command(name = "annealsched", version, about = "Job-shop scheduling on emulated annealing hardware")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated instance as JSON.
    Generate(GenerateArgs),
    /// Solve one instance file and print the report as JSON.
    Solve(SolveArgs),
    /// Sweep sizes, solvers, topologies and seeds.
    Bench(BenchArgs),
    /// Print `n_v n_q` of an instance's model.
    Metrics(MetricsArgs),
    /// Embed an instance's model and print the qubit count.
    Embed(EmbedArgs),
    /// Exact optimal makespan, optionally checking a solve report.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "1")]
    pub setup: Setup,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub p: u32,
    #[arg(long, default_value_t = 2)]
    pub t_window: u32,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value = "chimera:16,16,4")]
    pub topology: TopologySpec,
    #[arg(long, default_value_t = 900.0)]
    pub time_limit: f64,
    /// Sweeps per sampler call; makes the run reproducible and ignores the time limit.
    #[arg(long)]
    pub deterministic_budget: Option<usize>,
    /// IHQPU partition threshold in model variables.
    #[arg(long)]
    pub threshold: Option<usize>,
    /// Largest number of jobs per IHQPU loop.
    #[arg(long)]
    pub subset_cap: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub t_window: u32,
    #[arg(long, default_value_t = 10)]
    pub reads: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "hqpu")]
    pub solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write the result as a one-row CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "1")]
    pub setup: Setup,
    /// Sizes: `2..6` (inclusive) or a comma list.
    #[arg(long)]
    pub n: String,
    /// Eligible machines per operation, or `n`.
    #[arg(long, default_value = "1")]
    pub k: KSpec,
    #[arg(long, default_value_t = 1)]
    pub p: u32,
    /// Comma-separated solver names.
    #[arg(long, default_value = "cqpu,hqpu,ihqpu")]
    pub solvers: String,
    /// Repeatable.
    #[arg(long = "topology", default_value = "chimera:16,16,4")]
    pub topologies: Vec<TopologySpec>,
    #[arg(long, default_value_t = 900.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub deterministic_budget: Option<usize>,
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub t_window: u32,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds per configuration.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV path; the summary, plot data and crossover report go next to it.
    /// Without it the CSV goes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub t_window: u32,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "chimera:16,16,4")]
    pub topology: TopologySpec,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub t_window: u32,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
    /// Latest completion time searched; defaults to the instance horizon.
    #[arg(long)]
    pub horizon_cap: Option<u32>,
    /// Solve report (as printed by `solve`) whose schedule is verified.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `a..b` (inclusive) or `a,b,c`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid size list '{s}'");
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

/// Parses a comma list of solver names; an empty list is an error.
pub fn parse_solvers(s: &str) -> Result<Vec<SolverKind>, String> {
    let names: Vec<&str> = s.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if names.is_empty() {
        return Err("empty solver list".into());
    }
    names.into_iter().map(|v| v.parse().map_err(|e: annealsched::solvers::SolveError| e.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("2..6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_sizes("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_sizes("3, 5").unwrap(), vec![3, 5]);
        assert!(parse_sizes("6..2").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn solver_lists() {
        assert_eq!(parse_solvers("cqpu,HQPU").unwrap(), vec![SolverKind::Cqpu, SolverKind::Hqpu]);
        assert!(parse_solvers("").is_err());
        assert!(parse_solvers(" , ").is_err());
        assert!(parse_solvers("qpu").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
