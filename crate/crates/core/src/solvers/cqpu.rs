use std::time::Instant;

use crate::instance::FjsspInstance;
use crate::qubo::{from_ising, Bqm};
use crate::samplers::{Sampler, SamplerParams, SimulatedQuantumAnnealing, TabuSearch};
use crate::topology::{default_chain_strength, embed_bqm, find_embedding_with, unembed, EmbedOptions, EmbeddingFailure, Topology, DEFAULT_EMBEDDING_TRIES};

use super::{check_sample, compile, Solver, SolveError, SolveReport, SolverConfig, SolverKind, Status};

/// Sweeps per annealing call when no deterministic budget is given.
pub(crate) const DEFAULT_SWEEPS: usize = 1000;

/// Direct solve: the whole model is embedded and annealed in one call.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cqpu;

impl Solver for Cqpu {
    fn kind(&self) -> SolverKind {
        SolverKind::Cqpu
    }

    fn solve(&self, instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
        solve_cqpu(instance, config)
    }
}

/// Logical samples from one hardware annealing call.
pub(crate) struct HardwareRun {
    pub samples: Vec<Vec<bool>>,
    pub n_e: usize,
}

/// Embeds `bqm`, anneals the chained physical problem with SQA and maps
/// every read back by majority vote.
pub(crate) fn anneal_on_hardware(
    bqm: &Bqm,
    topology: &Topology,
    embed: &EmbedOptions,
    sweeps: usize,
    reads: usize,
) -> Result<HardwareRun, EmbeddingFailure> {
    let seed = embed.seed;
    let embedding = find_embedding_with(bqm.num_variables(), &bqm.interaction_edges(), topology, embed)?;
    let problem = embed_bqm(bqm, &embedding, topology, default_chain_strength(bqm)).expect("validated embedding covers every variable");
    let physical = from_ising(&problem.ising);
    let mut params = SamplerParams::new(seed, reads, sweeps);
    params.sqa = Some(SimulatedQuantumAnnealing::default_params(&physical));
    let set = SimulatedQuantumAnnealing.sample(&physical, &params).expect("embedded model is nonempty and parameters are valid");
    let samples = set
        .samples
        .iter()
        .enumerate()
        .map(|(r, s)| {
            let logical = unembed(&s.bits, &embedding, bqm);
            polish(bqm, logical, seed.wrapping_add(r as u64))
        })
        .collect();
    Ok(HardwareRun { samples, n_e: embedding.qubit_count() })
}

/// Short tabu descent from an unembedded read, the logical analogue of
/// annealer postprocessing. Recovers the small objective differences that
/// the freeze-out of the physical chains leaves unresolved.
pub(crate) fn polish(bqm: &Bqm, sample: Vec<bool>, seed: u64) -> Vec<bool> {
    let mut params = SamplerParams::new(seed, 1, 4 * bqm.num_variables() + 100);
    let start_energy = bqm.energy_unchecked(&sample);
    params.initial_state = Some(sample.clone());
    let set = TabuSearch.sample(bqm, &params).expect("sample length matches the model");
    match set.best() {
        Some(b) if b.energy < start_energy => b.bits.clone(),
        _ => sample,
    }
}

/// Builds the model, embeds it on `config.topology` and anneals it. An
/// embedding failure yields status `EmbeddingInfeasible` and no schedule.
pub fn solve_cqpu(instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
    config.expect_kind(SolverKind::Cqpu)?;
    let started = Instant::now();
    let deadline = config.deadline(started);
    let model = compile(instance, config)?;
    let (n_v, n_q) = model.bqm.count_interactions();
    let sweeps = config.deterministic_budget.unwrap_or(DEFAULT_SWEEPS);
    let mut report = SolveReport {
        config: config.echo(),
        elapsed: 0.0,
        best_energy: f64::INFINITY,
        schedule: None,
        violations: Vec::new(),
        makespan: None,
        n_v,
        n_q,
        n_e: None,
        status: Status::Solved,
        loop_trace: Vec::new(),
        rounds: 1,
    };
    // With a wall-clock limit, embedding keeps retrying until the deadline.
    let embed = EmbedOptions {
        seed: config.seed,
        effort: config.embedding_effort,
        tries: if deadline.is_some() { usize::MAX } else { DEFAULT_EMBEDDING_TRIES },
        deadline,
    };
    // More variables than qubits cannot embed; no point retrying.
    let run = if n_v > config.topology.num_nodes() {
        None
    } else {
        anneal_on_hardware(&model.bqm, &config.topology, &embed, sweeps, config.reads).ok()
    };
    match run {
        None => report.status = Status::EmbeddingInfeasible,
        Some(run) => {
            report.n_e = Some(run.n_e);
            let mut best: Option<(bool, f64, Vec<bool>)> = None;
            for s in run.samples {
                let feasible = check_sample(instance, &model.table, &s).is_ok();
                let energy = model.bqm.energy_unchecked(&s);
                if best.as_ref().map_or(true, |(f, e, _)| (!feasible, energy) < (!*f, *e)) {
                    best = Some((feasible, energy, s));
                }
            }
            let (_, energy, sample) = best.expect("at least one read");
            report.best_energy = energy;
            match check_sample(instance, &model.table, &sample) {
                Ok(schedule) => {
                    report.makespan = Some(schedule.makespan);
                    report.schedule = Some(schedule);
                }
                Err(diags) => report.violations = diags,
            }
            if deadline.is_some_and(|d| Instant::now() > d) {
                report.status = Status::TimedOut;
            }
        }
    }
    report.elapsed = started.elapsed().as_secs_f64();
    Ok(report)
}
