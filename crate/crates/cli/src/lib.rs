//! Benchmark harness around the `annealsched` library: instance generation,
//! single solves, parameter sweeps and the Markdown, plot-data and crossover
//! summaries derived from a sweep.

pub mod args;
pub mod bench;
pub mod commands;

pub use bench::{crossover_reports, run_bench, BenchPlan, BenchRow, CrossoverReport};
pub use commands::{cmd_embed, cmd_generate, cmd_metrics, cmd_oracle, cmd_solve, exit_code, InstanceInfo};

/// Exit code of a solve that found a schedule.
pub const EXIT_SOLVED: i32 = 0;
/// Exit code for usage, I/O and parse errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit code of a solve that hit its time limit holding a feasible schedule.
pub const EXIT_TIMED_OUT: i32 = 2;
/// Exit code when no feasible schedule (or no embedding) was found.
pub const EXIT_INFEASIBLE: i32 = 3;
