use std::time::Instant;

use crate::instance::FjsspInstance;
use crate::oracle::{verify_schedule, Diagnostic};
use crate::qubo::{build_bqm_with, decode, objectives, QuboError, Schedule, ScheduledOp, VariableTable, WindowPlan};

use super::hqpu::{hqpu_minimize, hqpu_report};
use super::{bottleneck_factors, compile, derive_seed, LoopRecord, Solver, SolveError, SolveReport, SolverConfig, SolverKind, Status};

/// Iterative decomposition: jobs are taken in bottleneck order, a subset
/// at a time, and each subset is solved by the portfolio around the
/// machine time already committed by earlier loops.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ihqpu;

impl Solver for Ihqpu {
    fn kind(&self) -> SolverKind {
        SolverKind::Ihqpu
    }

    fn solve(&self, instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
        solve_ihqpu(instance, config)
    }
}

/// Busy intervals `[start, finish)` of every machine.
#[derive(Debug, Clone, Default)]
struct Occupancy {
    busy: Vec<Vec<(u32, u32)>>,
}

impl Occupancy {
    fn new(machines: usize) -> Self {
        Self { busy: vec![Vec::new(); machines] }
    }

    fn is_free(&self, machine: usize, start: u32, len: u32) -> bool {
        self.busy[machine].iter().all(|&(s, f)| start + len <= s || start >= f)
    }

    /// Earliest `t >= from` at which the operation fits on some eligible machine.
    fn earliest_fit(&self, instance: &FjsspInstance, job: usize, op: usize, from: u32) -> u32 {
        let eligible = &instance.jobs[job].operations[op].eligible;
        let mut candidates = vec![from];
        for e in eligible {
            candidates.extend(self.busy[e.machine].iter().map(|&(_, f)| f).filter(|&f| f > from));
        }
        candidates.sort_unstable();
        candidates
            .into_iter()
            .find(|&t| eligible.iter().any(|e| self.is_free(e.machine, t, e.time)))
            .expect("the latest finish time is always free")
    }

    fn commit(&mut self, op: &ScheduledOp) {
        self.busy[op.machine].push((op.start, op.finish));
    }
}

/// Sub-model table for `jobs` around `occupied`: every window starts at the
/// earliest time its operation fits, variables colliding with committed
/// intervals are dropped, and a window left empty grows by `T_r` until one
/// survives. Returns the table and the number of extended windows.
fn sub_table(instance: &FjsspInstance, jobs: &[usize], occupied: &Occupancy, t_window: u32) -> (VariableTable, usize) {
    let mut plan = Vec::new();
    for &job in jobs {
        let mut ready = 0;
        for op in 0..instance.jobs[job].operations.len() {
            let base = occupied.earliest_fit(instance, job, op, ready);
            plan.push(WindowPlan { job, op, base, len: t_window });
            ready = base + instance.jobs[job].operations[op].min_time();
        }
    }
    let mut extended = 0;
    loop {
        let horizon = plan
            .iter()
            .map(|w| w.base + w.len - 1 + instance.jobs[w.job].operations[w.op].max_time())
            .max()
            .unwrap_or(0)
            .max(instance.horizon);
        match VariableTable::from_plan(instance, &plan, t_window, horizon, |k, p| occupied.is_free(k.machine, k.start, p)) {
            Ok(table) => return (table, extended),
            Err(QuboError::EmptyWindow { job, op }) => {
                let w = plan.iter_mut().find(|w| w.job == job && w.op == op).expect("planned operation");
                w.len += t_window;
                extended += 1;
            }
            Err(e) => unreachable!("planned windows are well formed: {e}"),
        }
    }
}

/// List schedule of `jobs`: each operation in order takes the machine and
/// start that finish earliest around the committed intervals.
fn greedy_schedule(instance: &FjsspInstance, jobs: &[usize], occupied: &Occupancy) -> Schedule {
    let mut occ = occupied.clone();
    let mut ops = Vec::new();
    for &job in jobs {
        let mut ready = 0;
        for (op, o) in instance.jobs[job].operations.iter().enumerate() {
            let mut best: Option<ScheduledOp> = None;
            let mut eligible = o.eligible.clone();
            eligible.sort_by_key(|e| e.machine);
            for e in eligible {
                let mut t = ready;
                while !occ.is_free(e.machine, t, e.time) {
                    t = occ.busy[e.machine].iter().map(|&(_, f)| f).filter(|&f| f > t).min().expect("a later free slot");
                }
                let cand = ScheduledOp { job, op, machine: e.machine, start: t, finish: t + e.time };
                if best.map_or(true, |b| cand.finish < b.finish) {
                    best = Some(cand);
                }
            }
            let chosen = best.expect("operations have an eligible machine");
            occ.commit(&chosen);
            ready = chosen.finish;
            ops.push(chosen);
        }
    }
    Schedule::new(ops)
}

/// Precedence and overlap violations among the committed operations.
fn partial_conflicts(instance: &FjsspInstance, ops: &[ScheduledOp]) -> Vec<Diagnostic> {
    verify_schedule(instance, &Schedule::new(ops.to_vec()))
        .into_iter()
        .filter(|d| !matches!(d, Diagnostic::OneStart { starts: 0, .. }))
        .collect()
}

/// Solves the whole model with the portfolio when it has at most
/// `partition_threshold` variables. Otherwise, loop until every job is
/// scheduled: rank the open jobs by bottleneck factor, take the longest
/// prefix (at most `subset_size_cap` jobs, at least one) whose sub-model
/// stays within the threshold, build it around the committed machine time,
/// solve it with the portfolio under a time share proportional to its size
/// (at least 1 s) and commit the result. An infeasible sub-solution is
/// replaced by a list schedule of the same jobs.
pub fn solve_ihqpu(instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
    config.expect_kind(SolverKind::Ihqpu)?;
    let started = Instant::now();
    let model = compile(instance, config)?;
    let (n_v, n_q) = model.bqm.count_interactions();
    if model.table.len() <= config.partition_threshold {
        let mut report = hqpu_report(instance, config)?;
        report.elapsed = started.elapsed().as_secs_f64();
        return Ok(report);
    }
    let objective = objectives().get(&config.objective).expect("validated");
    let total_nv = model.table.len();
    let mut remaining: Vec<usize> = (0..instance.jobs.len()).collect();
    let mut occupied = Occupancy::new(instance.machine_count);
    let mut committed: Vec<ScheduledOp> = Vec::new();
    let mut trace = Vec::new();
    let mut energy = 0.0;
    let mut n_e: Option<usize> = None;

    while !remaining.is_empty() {
        let order: Vec<usize> = bottleneck_factors(instance, &remaining).into_iter().map(|b| b.job).collect();
        let mut chosen = sub_table(instance, &order[..1], &occupied, config.t_window);
        let mut take = 1;
        while take < order.len().min(config.subset_size_cap) {
            let next = sub_table(instance, &order[..take + 1], &occupied, config.t_window);
            if next.0.len() > config.partition_threshold {
                break;
            }
            chosen = next;
            take += 1;
        }
        let jobs = order[..take].to_vec();
        let (table, extended) = chosen;
        let bqm = build_bqm_with(instance, &table, &model.weights, objective.as_ref());

        let mut sub_config = config.clone();
        sub_config.seed = derive_seed(config.seed, trace.len(), 3);
        sub_config.time_limit = (config.time_limit * table.len() as f64 / total_nv as f64).max(1.0);
        let conflicts = |x: &[bool]| match decode(instance, &table, x) {
            Ok(s) => {
                let mut all = committed.clone();
                all.extend(s.ops);
                partial_conflicts(instance, &all).is_empty()
            }
            Err(_) => false,
        };
        let run = hqpu_minimize(&bqm, &conflicts, &sub_config);
        if let Some(e) = run.n_e {
            n_e = Some(n_e.map_or(e, |m| m.max(e)));
        }
        let (part, repaired) = match (run.feasible, decode(instance, &table, &run.best)) {
            (true, Ok(s)) => {
                energy += run.energy;
                (s, false)
            }
            _ => {
                let s = greedy_schedule(instance, &jobs, &occupied);
                (s, true)
            }
        };
        for op in &part.ops {
            occupied.commit(op);
        }
        committed.extend(part.ops.iter().copied());
        debug_assert!(partial_conflicts(instance, &committed).is_empty());
        trace.push(LoopRecord { jobs: jobs.clone(), n_v: table.len(), makespan: part.makespan, extended_windows: extended, repaired });
        remaining.retain(|j| !jobs.contains(j));
    }

    let schedule = Schedule::new(committed);
    let violations = verify_schedule(instance, &schedule);
    let feasible = violations.is_empty();
    let elapsed = started.elapsed().as_secs_f64();
    let timed_out = config.deterministic_budget.is_none() && elapsed > config.time_limit;
    Ok(SolveReport {
        config: config.echo(),
        elapsed,
        best_energy: energy,
        makespan: feasible.then_some(schedule.makespan),
        schedule: feasible.then_some(schedule),
        violations,
        n_v,
        n_q,
        n_e,
        status: if timed_out { Status::TimedOut } else { Status::Solved },
        rounds: trace.len(),
        loop_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::instance::{generate_instance, Eligibility, Job, Operation, SetupParams};
    use crate::solvers::solve_hqpu;
    use crate::topology::chimera;

    fn config(kind: SolverKind, seed: u64, threshold: usize) -> SolverConfig {
        let mut c = SolverConfig::new(kind, Arc::new(chimera(4, 4, 4).unwrap()));
        c.seed = seed;
        c.deterministic_budget = Some(1000);
        c.partition_threshold = threshold;
        c
    }

    #[test]
    fn unbounded_threshold_matches_hqpu() {
        let inst = generate_instance(&SetupParams::s1(4, 2)).unwrap();
        let a = solve_ihqpu(&inst, &config(SolverKind::Ihqpu, 3, usize::MAX)).unwrap();
        let b = solve_hqpu(&inst, &config(SolverKind::Hqpu, 3, usize::MAX)).unwrap();
        assert!(a.same_outcome(&b));
        assert!(a.loop_trace.is_empty());
    }

    #[test]
    fn partitioned_s1_is_feasible() {
        let inst = generate_instance(&SetupParams::s1(10, 2)).unwrap();
        let report = solve_ihqpu(&inst, &config(SolverKind::Ihqpu, 1, 60)).unwrap();
        assert!(report.loop_trace.len() >= 2);
        assert!(report.loop_trace.iter().all(|l| l.n_v <= 60));
        let schedule = report.schedule.expect("feasible merge");
        assert!(verify_schedule(&inst, &schedule).is_empty());
        assert!(report.makespan.unwrap() <= 13);
    }

    #[test]
    fn windows_shift_around_committed_time() {
        let e = |m: usize, t: u32| Eligibility { machine: m, time: t };
        let inst = FjsspInstance {
            jobs: vec![
                Job { id: 0, operations: vec![Operation::new(vec![e(0, 2)])] },
                Job { id: 1, operations: vec![Operation::new(vec![e(0, 1)]), Operation::new(vec![e(0, 1)])] },
            ],
            machine_count: 1,
            horizon: 5,
        };
        let mut occ = Occupancy::new(1);
        occ.commit(&ScheduledOp { job: 0, op: 0, machine: 0, start: 0, finish: 2 });
        let (table, extended) = sub_table(&inst, &[1], &occ, 2);
        assert_eq!(extended, 0);
        assert_eq!(table.window(1, 0).unwrap().base, 2);
        assert_eq!(table.window(1, 1).unwrap().base, 3);
        assert!(table.entries().iter().all(|k| k.start >= 2));

        // A gap too short for the operation is skipped.
        let mut occ = Occupancy::new(1);
        occ.commit(&ScheduledOp { job: 9, op: 0, machine: 0, start: 0, finish: 1 });
        occ.commit(&ScheduledOp { job: 9, op: 1, machine: 0, start: 2, finish: 4 });
        assert_eq!(occ.earliest_fit(&inst, 0, 0, 0), 4);
        assert_eq!(occ.earliest_fit(&inst, 1, 0, 0), 1);
    }

    #[test]
    fn greedy_schedule_is_conflict_free() {
        let inst = generate_instance(&SetupParams::s2(4, 2, 2)).unwrap();
        let mut occ = Occupancy::new(4);
        let first = greedy_schedule(&inst, &[0, 1], &occ);
        for op in &first.ops {
            occ.commit(op);
        }
        let second = greedy_schedule(&inst, &[2, 3], &occ);
        let merged = Schedule::merge([first, second]);
        assert!(verify_schedule(&inst, &merged).is_empty());
    }
}
