use std::path::Path;

use anyhow::{Context, Result};
use annealsched::instance::{generate_instance, save_instance, Setup};
use annealsched::oracle::{optimal_makespan, verify_schedule, Diagnostic};
use annealsched::qubo::{build_bqm, build_variable_table, PenaltyWeights};
use annealsched::solvers::{solve, SolveReport, SolverConfig, Status};
use annealsched::topology::{find_embedding_with, EmbedOptions, EmbeddingFailure, Topology};
use annealsched::{Bqm, FjsspInstance, Schedule, SetupParams};

use crate::bench::BenchRow;
use crate::{EXIT_INFEASIBLE, EXIT_SOLVED, EXIT_TIMED_OUT};

/// Generator parameters recovered from an instance, for report rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceInfo {
    /// `1`, `2`, `3`, or `custom` when no setup reproduces the instance.
    pub setup: String,
    pub n: usize,
    pub k: usize,
    pub p: u32,
    pub horizon: u32,
}

impl InstanceInfo {
    pub fn from_params(params: &SetupParams, instance: &FjsspInstance) -> Self {
        Self { setup: params.setup.to_string(), n: params.n, k: params.k, p: params.p, horizon: instance.horizon }
    }

    /// Infers the setup by regenerating candidates and comparing.
    pub fn infer(instance: &FjsspInstance) -> Self {
        let ops = instance.jobs.iter().flat_map(|j| &j.operations);
        let k = ops.clone().map(|o| o.eligible.len()).max().unwrap_or(0);
        let p = ops.map(|o| o.max_time()).max().unwrap_or(0);
        let n = instance.jobs.len();
        let setup = [Setup::S1, Setup::S2, Setup::S3]
            .into_iter()
            .find(|&setup| {
                let params = SetupParams { setup, n, k, p, t_window: p + 1 };
                generate_instance(&params).is_ok_and(|g| &g == instance)
            })
            .map_or_else(|| "custom".to_string(), |s| s.to_string());
        Self { setup, n, k, p, horizon: instance.horizon }
    }
}

/// Generates an instance and writes it to `out` when given.
pub fn cmd_generate(params: &SetupParams, out: Option<&Path>) -> Result<FjsspInstance> {
    let instance = generate_instance(params)?;
    if let Some(path) = out {
        save_instance(path, &instance)?;
    }
    Ok(instance)
}

fn model(instance: &FjsspInstance, t_window: u32) -> Result<Bqm> {
    let table = build_variable_table(instance, t_window)?;
    Ok(build_bqm(instance, &table, &PenaltyWeights::default_for(instance.operation_count(), t_window)))
}

/// `(n_v, n_q)` of the instance's model.
pub fn cmd_metrics(instance: &FjsspInstance, t_window: u32) -> Result<(usize, usize)> {
    Ok(model(instance, t_window)?.count_interactions())
}

/// Qubits used by an embedding of the model, or why none was found.
pub fn cmd_embed(
    instance: &FjsspInstance,
    topology: &Topology,
    seed: u64,
    t_window: u32,
) -> Result<Result<usize, EmbeddingFailure>> {
    let bqm = model(instance, t_window)?;
    let opts = EmbedOptions { seed, ..EmbedOptions::default() };
    Ok(find_embedding_with(bqm.num_variables(), &bqm.interaction_edges(), topology, &opts).map(|e| e.qubit_count()))
}

/// Optimal makespan, plus the violations of `schedule` when one is given.
pub fn cmd_oracle(instance: &FjsspInstance, horizon_cap: u32, schedule: Option<&Schedule>) -> Result<(u32, Option<Vec<Diagnostic>>)> {
    let best = optimal_makespan(instance, horizon_cap).context("exact search failed")?;
    Ok((best, schedule.map(|s| verify_schedule(instance, s))))
}

pub fn cmd_solve(instance: &FjsspInstance, info: &InstanceInfo, config: &SolverConfig) -> Result<(SolveReport, BenchRow)> {
    let report = solve(instance, config)?;
    let row = BenchRow::from_report(info, config, &report);
    Ok((report, row))
}

/// Process exit code for a finished solve.
pub fn exit_code(report: &SolveReport) -> i32 {
    match (report.status, report.feasible()) {
        (Status::Solved, true) => EXIT_SOLVED,
        (Status::TimedOut, true) => EXIT_TIMED_OUT,
        _ => EXIT_INFEASIBLE,
    }
}
