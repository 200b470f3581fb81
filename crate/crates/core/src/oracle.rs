//! Ground truth for small problems: exhaustive model minimization,
//! branch-and-bound optimal makespan, and schedule verification.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::FjsspInstance;
use crate::qubo::{Bqm, Schedule};

/// Largest model `exact_bqm_minimum` will enumerate.
pub const MAX_EXACT_VARIABLES: usize = 26;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("model has {0} variables; exhaustive search is limited to {MAX_EXACT_VARIABLES}")]
    TooManyVariables(usize),
    #[error("search budget of {nodes} nodes exhausted (best makespan found: {best:?})")]
    BudgetExhausted { nodes: u64, best: Option<u32> },
    #[error("no schedule finishes within horizon {0}")]
    Infeasible(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticKind {
    OneStart,
    Precedence,
    Overlap,
    Window,
}

/// A violated scheduling constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagnostic {
    /// An operation with zero or several starts.
    OneStart { job: usize, op: usize, starts: usize, variables: Vec<usize> },
    /// `op` starts before operation `op - 1` of the same job finishes.
    Precedence { job: usize, op: usize, predecessor_finish: u32, start: u32, variables: Vec<usize> },
    /// Two operations share a machine over intersecting intervals.
    Overlap { machine: usize, first: (usize, usize), second: (usize, usize), variables: Vec<usize> },
    /// Machine not eligible, duration inconsistent, or unknown operation.
    Window { job: usize, op: usize, machine: usize, start: u32, reason: String },
}

impl Diagnostic {
    pub fn kind(&self) -> DiagnosticKind {
        match self {
            Diagnostic::OneStart { .. } => DiagnosticKind::OneStart,
            Diagnostic::Precedence { .. } => DiagnosticKind::Precedence,
            Diagnostic::Overlap { .. } => DiagnosticKind::Overlap,
            Diagnostic::Window { .. } => DiagnosticKind::Window,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::OneStart { job, op, starts, .. } => {
                write!(f, "one-start: job {job} op {op} has {starts} starts")
            }
            Diagnostic::Precedence { job, op, predecessor_finish, start, .. } => write!(
                f,
                "precedence: job {job} op {op} starts at {start} before its predecessor finishes at {predecessor_finish}"
            ),
            Diagnostic::Overlap { machine, first, second, .. } => write!(
                f,
                "overlap: machine {machine} runs ({}, {}) and ({}, {}) at the same time",
                first.0, first.1, second.0, second.1
            ),
            Diagnostic::Window { job, op, machine, start, reason } => {
                write!(f, "window: job {job} op {op} on machine {machine} at {start}: {reason}")
            }
        }
    }
}

/// Global minimum by Gray-code enumeration. Ties go to the lexicographically
/// smallest sample (`x_0` most significant).
pub fn exact_bqm_minimum(bqm: &Bqm) -> Result<(Vec<bool>, f64), OracleError> {
    let n = bqm.num_variables();
    if n > MAX_EXACT_VARIABLES {
        return Err(OracleError::TooManyVariables(n));
    }
    let adj = bqm.adjacency();
    let lex_key = |mask: u32| if n == 0 { 0 } else { mask.reverse_bits() >> (32 - n) };
    let scale = 1.0 + bqm.linear().iter().chain(bqm.quadratic().values()).map(|c| c.abs()).sum::<f64>();
    let tol = 1e-9 * scale;

    let mut field = bqm.linear().to_vec();
    let mut state = 0u32;
    let mut energy = bqm.offset();
    let (mut best_e, mut best_mask) = (energy, 0u32);
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let on = state >> v & 1 == 0;
        if on {
            energy += field[v];
        } else {
            energy -= field[v];
        }
        state ^= 1 << v;
        let sign = if on { 1.0 } else { -1.0 };
        for &(w, c) in &adj[v] {
            field[w] += sign * c;
        }
        if energy < best_e - tol {
            best_e = energy;
            best_mask = state;
        } else if energy <= best_e + tol && lex_key(state) < lex_key(best_mask) {
            best_e = best_e.min(energy);
            best_mask = state;
        }
    }
    let sample: Vec<bool> = (0..n).map(|i| best_mask >> i & 1 == 1).collect();
    let e = bqm.energy_unchecked(&sample);
    Ok((sample, e))
}

/// Default node budget of [`optimal_makespan`].
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

/// Minimum makespan over schedules whose operations all finish by
/// `horizon_cap`. Branches on (ready operation, machine) with each
/// operation placed at the earliest time its job and machine allow;
/// dispatching an optimal schedule's operations in start order this way
/// reproduces it, so the search is exact.
pub fn optimal_makespan(instance: &FjsspInstance, horizon_cap: u32) -> Result<u32, OracleError> {
    optimal_makespan_with_budget(instance, horizon_cap, DEFAULT_NODE_BUDGET)
}

pub fn optimal_makespan_with_budget(instance: &FjsspInstance, horizon_cap: u32, budget: u64) -> Result<u32, OracleError> {
    let mut search = Search {
        instance,
        cap: horizon_cap,
        best: None,
        nodes: 0,
        budget,
        seen: HashMap::new(),
        remaining: instance
            .jobs
            .iter()
            .map(|j| {
                let mut tail: Vec<u32> = j.operations.iter().rev().scan(0, |acc, o| {
                    *acc += o.min_time();
                    Some(*acc)
                }).collect();
                tail.reverse();
                tail.push(0);
                tail
            })
            .collect(),
    };
    let mut state = State {
        next: vec![0; instance.jobs.len()],
        job_ready: vec![0; instance.jobs.len()],
        machine_free: vec![0; instance.machine_count],
    };
    let exhausted = !search.dfs(&mut state, 0);
    match (exhausted, search.best) {
        (true, best) => Err(OracleError::BudgetExhausted { nodes: search.nodes, best }),
        (false, Some(ms)) => Ok(ms),
        (false, None) => Err(OracleError::Infeasible(horizon_cap)),
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    next: Vec<usize>,
    job_ready: Vec<u32>,
    machine_free: Vec<u32>,
}

struct Search<'a> {
    instance: &'a FjsspInstance,
    cap: u32,
    best: Option<u32>,
    nodes: u64,
    budget: u64,
    seen: HashMap<State, u32>,
    /// Per job, suffix sums of minimum processing times.
    remaining: Vec<Vec<u32>>,
}

impl Search<'_> {
    fn lower_bound(&self, s: &State, makespan: u32) -> u32 {
        let jobs = (0..s.next.len()).map(|j| s.job_ready[j] + self.remaining[j][s.next[j]]);
        jobs.fold(makespan, u32::max)
    }

    /// Returns false when the node budget runs out.
    fn dfs(&mut self, s: &mut State, makespan: u32) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let done = s.next.iter().zip(&self.instance.jobs).all(|(&n, j)| n == j.operations.len());
        if done {
            if self.best.map_or(true, |b| makespan < b) {
                self.best = Some(makespan);
            }
            return true;
        }
        let bound = self.lower_bound(s, makespan);
        if bound > self.cap || self.best.is_some_and(|b| bound >= b) {
            return true;
        }
        match self.seen.get(s) {
            Some(&m) if m <= makespan => return true,
            _ => {
                self.seen.insert(s.clone(), makespan);
            }
        }
        for j in 0..s.next.len() {
            let o = s.next[j];
            let Some(op) = self.instance.jobs[j].operations.get(o) else { continue };
            for e in &op.eligible {
                let start = s.job_ready[j].max(s.machine_free[e.machine]);
                let finish = start + e.time;
                if finish > self.cap {
                    continue;
                }
                let (ready, free) = (s.job_ready[j], s.machine_free[e.machine]);
                s.next[j] += 1;
                s.job_ready[j] = finish;
                s.machine_free[e.machine] = finish;
                let ok = self.dfs(s, makespan.max(finish));
                s.next[j] -= 1;
                s.job_ready[j] = ready;
                s.machine_free[e.machine] = free;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

/// Every violated constraint of `schedule`; empty iff it is a feasible
/// schedule of the whole instance.
pub fn verify_schedule(instance: &FjsspInstance, schedule: &Schedule) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for so in &schedule.ops {
        *count.entry((so.job, so.op)).or_default() += 1;
        let Ok(op) = instance.operation(so.job, so.op) else {
            diags.push(Diagnostic::Window {
                job: so.job,
                op: so.op,
                machine: so.machine,
                start: so.start,
                reason: "operation does not exist".into(),
            });
            continue;
        };
        match op.time_on(so.machine) {
            None => diags.push(Diagnostic::Window {
                job: so.job,
                op: so.op,
                machine: so.machine,
                start: so.start,
                reason: "machine not eligible".into(),
            }),
            Some(p) if so.finish != so.start + p => diags.push(Diagnostic::Window {
                job: so.job,
                op: so.op,
                machine: so.machine,
                start: so.start,
                reason: format!("finish {} differs from start + processing time {}", so.finish, so.start + p),
            }),
            _ => {}
        }
    }
    for (job, op) in instance.op_refs() {
        let c = count.get(&(job, op)).copied().unwrap_or(0);
        if c != 1 {
            diags.push(Diagnostic::OneStart { job, op, starts: c, variables: Vec::new() });
        }
    }
    for so in &schedule.ops {
        if so.op == 0 {
            continue;
        }
        if let Some(prev) = schedule.get(so.job, so.op - 1) {
            if so.start < prev.finish {
                diags.push(Diagnostic::Precedence {
                    job: so.job,
                    op: so.op,
                    predecessor_finish: prev.finish,
                    start: so.start,
                    variables: Vec::new(),
                });
            }
        }
    }
    let mut by_machine: HashMap<usize, Vec<_>> = HashMap::new();
    for so in &schedule.ops {
        by_machine.entry(so.machine).or_default().push(so);
    }
    let mut machines: Vec<_> = by_machine.into_iter().collect();
    machines.sort_unstable_by_key(|(m, _)| *m);
    for (machine, mut ops) in machines {
        ops.sort_by_key(|o| (o.start, o.job, o.op));
        for (i, a) in ops.iter().enumerate() {
            for b in &ops[i + 1..] {
                if b.start >= a.finish {
                    break;
                }
                diags.push(Diagnostic::Overlap {
                    machine,
                    first: (a.job, a.op),
                    second: (b.job, b.op),
                    variables: Vec::new(),
                });
            }
        }
    }
    diags
}
