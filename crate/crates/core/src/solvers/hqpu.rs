use std::thread;
use std::time::Instant;

use crate::instance::FjsspInstance;
use crate::qubo::Bqm;
use crate::samplers::{LocalFields, Sampler, SamplerParams, SimulatedAnnealing, TabuSearch};
use crate::topology::{EmbedOptions, Topology};

use super::cqpu::{anneal_on_hardware, DEFAULT_SWEEPS};
use super::{check_sample, clamp_subproblem, compile, derive_seed, Solver, SolveError, SolveReport, SolverConfig, SolverKind, Status};

/// Rounds without improvement after which the portfolio stops.
pub const STALL_ROUNDS: usize = 10;

/// Largest subproblem handed to the annealing worker.
pub const MAX_SUBPROBLEM: usize = 64;

/// Round cap under a deterministic budget.
pub const MAX_BUDGET_ROUNDS: usize = 50;

/// Parallel portfolio: simulated annealing, tabu search and an annealed
/// subproblem worker share an incumbent through a coordinator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hqpu;

impl Solver for Hqpu {
    fn kind(&self) -> SolverKind {
        SolverKind::Hqpu
    }

    fn solve(&self, instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
        solve_hqpu(instance, config)
    }
}

/// Outcome of [`hqpu_minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct HqpuRun {
    pub best: Vec<bool>,
    pub energy: f64,
    pub feasible: bool,
    pub rounds: usize,
    /// Incumbent energy after every round.
    pub trajectory: Vec<f64>,
    /// Largest subproblem embedding used, if any.
    pub n_e: Option<usize>,
    pub timed_out: bool,
}

/// State the subproblem worker carries from round to round.
#[derive(Debug, Clone, Copy)]
struct SubproblemSize(usize);

/// Variables of the subproblem: the `m` with the smallest single-flip
/// energy change against `incumbent` (most promising flips first).
fn rank_variables(lf: &LocalFields, incumbent: &[bool], m: usize) -> Vec<usize> {
    let fields = lf.fields(incumbent);
    let mut order: Vec<(f64, usize)> = (0..incumbent.len()).map(|v| (LocalFields::delta(incumbent, &fields, v), v)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut top: Vec<usize> = order.into_iter().take(m).map(|(_, v)| v).collect();
    top.sort_unstable();
    top
}

/// One round of the subproblem worker: shrink the subproblem until it
/// embeds, anneal it on the hardware graph and splice the best read into
/// the incumbent.
#[allow(clippy::too_many_arguments)]
fn subproblem_round(
    bqm: &Bqm,
    lf: &LocalFields,
    incumbent: &[bool],
    size: SubproblemSize,
    topology: &Topology,
    seed: u64,
    effort: usize,
    sweeps: usize,
    reads: usize,
    deadline: Option<Instant>,
) -> (SubproblemSize, Option<(Vec<bool>, usize)>) {
    let mut m = size.0;
    while m > 0 {
        let free = rank_variables(lf, incumbent, m);
        let fixed: Vec<(usize, bool)> = {
            let mut is_free = vec![false; incumbent.len()];
            for &v in &free {
                is_free[v] = true;
            }
            (0..incumbent.len()).filter(|&v| !is_free[v]).map(|v| (v, incumbent[v])).collect()
        };
        let sub = clamp_subproblem(bqm, &fixed, &free).expect("free and fixed partition the variables");
        let embed = EmbedOptions { seed, effort, deadline, ..EmbedOptions::default() };
        match anneal_on_hardware(&sub, topology, &embed, sweeps, reads) {
            Ok(run) => {
                let part = run
                    .samples
                    .into_iter()
                    .min_by(|a, b| sub.energy_unchecked(a).total_cmp(&sub.energy_unchecked(b)))
                    .expect("at least one read");
                let mut merged = incumbent.to_vec();
                for (k, &v) in free.iter().enumerate() {
                    merged[v] = part[k];
                }
                return (SubproblemSize(m), Some((merged, run.n_e)));
            }
            Err(_) => {
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    return (SubproblemSize(m), None);
                }
                m /= 2;
            }
        }
    }
    (SubproblemSize(0), None)
}

/// Minimizes `bqm` with the portfolio. `feasible` classifies samples; the
/// incumbent prefers feasible samples over infeasible ones regardless of
/// energy and otherwise changes only on strictly lower energy.
///
/// Every sampler call runs the deterministic budget's sweep count (1000
/// without one). The run stops after [`STALL_ROUNDS`] rounds without
/// improvement, at the time limit in wall-clock mode, or once the budget's
/// [`MAX_BUDGET_ROUNDS`] rounds are spent in deterministic mode, where the
/// result is reproducible.
pub fn hqpu_minimize(bqm: &Bqm, feasible: &(dyn Fn(&[bool]) -> bool + Sync), config: &SolverConfig) -> HqpuRun {
    let started = Instant::now();
    let deadline = config.deadline(started);
    let n = bqm.num_variables();
    let (round_sweeps, max_rounds) = match config.deterministic_budget {
        Some(b) => (b, MAX_BUDGET_ROUNDS),
        None => (DEFAULT_SWEEPS, usize::MAX),
    };
    let mut best = vec![false; n];
    let mut best_energy = bqm.energy_unchecked(&best);
    let mut best_feasible = feasible(&best);
    let mut run = HqpuRun { best: Vec::new(), energy: 0.0, feasible: false, rounds: 0, trajectory: Vec::new(), n_e: None, timed_out: false };
    if n == 0 {
        return HqpuRun { best, energy: best_energy, feasible: best_feasible, ..run };
    }
    let lf = LocalFields::new(bqm);
    let mut size = SubproblemSize(n.min(MAX_SUBPROBLEM).min(config.topology.num_nodes() / 2).max(1));
    let mut stall = 0;
    let tol = 1e-12 * (1.0 + best_energy.abs());

    while run.rounds < max_rounds && stall < STALL_ROUNDS {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            run.timed_out = true;
            break;
        }
        let round = run.rounds;
        let incumbent = best.clone();
        let (sa, tabu, qa) = thread::scope(|s| {
            let sa = s.spawn(|| {
                let mut p = SamplerParams::new(derive_seed(config.seed, round, 0), config.reads, round_sweeps);
                p.initial_state = Some(incumbent.clone());
                SimulatedAnnealing.sample(bqm, &p).ok().and_then(|set| set.best().map(|b| b.bits.clone()))
            });
            let tabu = s.spawn(|| {
                let mut p = SamplerParams::new(derive_seed(config.seed, round, 1), 2, round_sweeps);
                p.initial_state = Some(incumbent.clone());
                TabuSearch.sample(bqm, &p).ok().and_then(|set| set.best().map(|b| b.bits.clone()))
            });
            let qa = s.spawn(|| {
                if size.0 == 0 {
                    return (size, None);
                }
                subproblem_round(
                    bqm,
                    &lf,
                    &incumbent,
                    size,
                    &config.topology,
                    derive_seed(config.seed, round, 2),
                    config.embedding_effort,
                    round_sweeps,
                    config.reads,
                    deadline,
                )
            });
            (sa.join().expect("SA worker"), tabu.join().expect("tabu worker"), qa.join().expect("subproblem worker"))
        });
        let (next_size, qa) = qa;
        size = next_size;
        let mut improved = false;
        let qa_sample = qa.map(|(sample, n_e)| {
            run.n_e = Some(run.n_e.map_or(n_e, |m| m.max(n_e)));
            sample
        });
        // Fixed merge order keeps the incumbent trajectory reproducible.
        for candidate in [sa, tabu, qa_sample].into_iter().flatten() {
            let e = bqm.energy_unchecked(&candidate);
            let f = feasible(&candidate);
            let better = (f && !best_feasible) || (f == best_feasible && e < best_energy - tol);
            if better {
                best = candidate;
                best_energy = e;
                best_feasible = f;
                improved = true;
            }
        }
        run.rounds += 1;
        run.trajectory.push(best_energy);
        stall = if improved { 0 } else { stall + 1 };
    }
    HqpuRun { best, energy: best_energy, feasible: best_feasible, ..run }
}

/// Portfolio solve of the whole instance.
pub fn solve_hqpu(instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
    config.expect_kind(SolverKind::Hqpu)?;
    hqpu_report(instance, config)
}

pub(crate) fn hqpu_report(instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
    let started = Instant::now();
    let model = compile(instance, config)?;
    let (n_v, n_q) = model.bqm.count_interactions();
    let table = &model.table;
    let run = hqpu_minimize(&model.bqm, &|x: &[bool]| check_sample(instance, table, x).is_ok(), config);
    let (schedule, violations) = match check_sample(instance, table, &run.best) {
        Ok(s) => (Some(s), Vec::new()),
        Err(d) => (None, d),
    };
    Ok(SolveReport {
        config: config.echo(),
        elapsed: started.elapsed().as_secs_f64(),
        best_energy: run.energy,
        makespan: schedule.as_ref().map(|s| s.makespan),
        schedule,
        violations,
        n_v,
        n_q,
        n_e: run.n_e,
        status: if run.timed_out { Status::TimedOut } else { Status::Solved },
        loop_trace: Vec::new(),
        rounds: run.rounds,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::instance::{generate_instance, SetupParams};
    use crate::oracle::verify_schedule;
    use crate::topology::chimera;

    fn config(seed: u64, budget: usize) -> SolverConfig {
        let mut c = SolverConfig::new(SolverKind::Hqpu, Arc::new(chimera(4, 4, 4).unwrap()));
        c.seed = seed;
        c.deterministic_budget = Some(budget);
        c
    }

    #[test]
    fn single_variable_after_one_round() {
        let bqm = Bqm::from_terms(vec![-1.0], [], 0.0);
        let run = hqpu_minimize(&bqm, &|_: &[bool]| true, &config(0, 100));
        assert_eq!(run.best, vec![true]);
        assert_eq!(run.energy, -1.0);
        assert_eq!(run.trajectory[0], -1.0);
    }

    #[test]
    fn small_s1_is_optimal_and_reproducible() {
        let inst = generate_instance(&SetupParams::s1(3, 2)).unwrap();
        let c = config(4, 2000);
        let a = solve_hqpu(&inst, &c).unwrap();
        assert_eq!(a.makespan, Some(3));
        assert!(verify_schedule(&inst, a.schedule.as_ref().unwrap()).is_empty());
        let b = solve_hqpu(&inst, &c).unwrap();
        assert!(a.same_outcome(&b));
    }

    #[test]
    fn subproblem_worker_idles_without_capacity() {
        // A one-qubit graph cannot host the two-variable coupled subproblem
        // but does host a single variable.
        let bqm = Bqm::from_terms(vec![1.0, 1.0], [((0, 1), -3.0)], 0.0);
        let mut c = config(1, 300);
        c.topology = Arc::new(Topology::from_edges("one", 1, []));
        let run = hqpu_minimize(&bqm, &|_: &[bool]| true, &c);
        assert_eq!(run.best, vec![true, true]);
        assert_eq!(run.n_e, Some(1));
    }

    #[test]
    fn rank_prefers_improving_flips() {
        let bqm = Bqm::from_terms(vec![1.0, -2.0, 0.5], [], 0.0);
        let lf = LocalFields::new(&bqm);
        assert_eq!(rank_variables(&lf, &[false, false, false], 1), vec![1]);
        assert_eq!(rank_variables(&lf, &[false, false, false], 2), vec![1, 2]);
    }
}
