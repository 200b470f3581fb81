use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::instance::FjsspInstance;

use super::objective::{MakespanObjective, StartDeviation};
use super::{Bqm, VariableTable};

/// Lagrange weights of the one-start, precedence and overlap penalties and
/// of the makespan objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl PenaltyWeights {
    /// `alpha = beta = gamma = 1`, `delta = 1 / (2 * n_ops * max(T_r - 1, 1))`.
    pub fn default_for(n_ops: usize, t_window: u32) -> Self {
        let span = t_window.saturating_sub(1).max(1) as f64;
        Self { alpha: 1.0, beta: 1.0, gamma: 1.0, delta: 1.0 / (2.0 * n_ops.max(1) as f64 * span) }
    }

    /// Default weights for `table`, with `delta` shrunk further when the
    /// objective's cost range exceeds `n_ops * max(T_r - 1, 1)`, so the
    /// whole objective stays below half of one constraint violation.
    pub fn auto(instance: &FjsspInstance, table: &VariableTable, objective: &dyn MakespanObjective) -> Self {
        let n_ops = table.windows().len();
        let mut w = Self::default_for(n_ops, table.t_window());
        let costs = objective.costs(instance, table);
        let range: f64 = table
            .windows()
            .iter()
            .map(|win| win.vars.clone().map(|v| costs[v]).fold(0.0, f64::max))
            .sum();
        let budget = n_ops.max(1) as f64 * table.t_window().saturating_sub(1).max(1) as f64;
        if range > budget {
            w.delta = 1.0 / (2.0 * range);
        }
        w
    }

    pub fn scaled(self, c: f64) -> Self {
        Self { alpha: self.alpha * c, beta: self.beta * c, gamma: self.gamma * c, delta: self.delta * c }
    }
}

/// The four unweighted Hamiltonian terms.
#[derive(Debug, Clone, PartialEq)]
pub struct BqmTerms {
    pub one_start: Bqm,
    pub precedence: Bqm,
    pub overlap: Bqm,
    pub makespan: Bqm,
}

impl BqmTerms {
    pub fn combine(&self, w: &PenaltyWeights) -> Bqm {
        let mut bqm = Bqm::new(self.one_start.num_variables());
        bqm.add_scaled(&self.one_start, w.alpha);
        bqm.add_scaled(&self.precedence, w.beta);
        bqm.add_scaled(&self.overlap, w.gamma);
        bqm.add_scaled(&self.makespan, w.delta);
        bqm.prune_zeros();
        bqm
    }

    /// Unweighted penalty energy; zero iff no constraint is violated.
    pub fn constraint_energy(&self, sample: &[bool]) -> f64 {
        self.one_start.energy_unchecked(sample)
            + self.precedence.energy_unchecked(sample)
            + self.overlap.energy_unchecked(sample)
    }
}

pub fn build_terms(instance: &FjsspInstance, table: &VariableTable, objective: &dyn MakespanObjective) -> BqmTerms {
    let n = table.len();
    let mut one_start = Bqm::new(n);
    let mut precedence = Bqm::new(n);
    let mut overlap = Bqm::new(n);
    let mut makespan = Bqm::new(n);

    // (sum_v x_v - 1)^2 = 1 - sum_v x_v + 2 sum_{a<b} x_a x_b
    for w in table.windows() {
        one_start.add_offset(1.0);
        for a in w.vars.clone() {
            one_start.add_linear(a, -1.0);
            for b in a + 1..w.vars.end {
                one_start.add_quadratic(a, b, 2.0);
            }
        }
    }

    // Successor starting before the predecessor finishes.
    for w in table.windows() {
        let Some(next) = table.window(w.job, w.op + 1) else { continue };
        for a in w.vars.clone() {
            let finish = table.key(a).start + table.duration(a);
            for b in next.vars.clone() {
                if table.key(b).start < finish {
                    precedence.add_quadratic(a, b, 1.0);
                }
            }
        }
    }

    // Distinct operations on one machine with intersecting intervals.
    let mut by_machine: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, k) in table.entries().iter().enumerate() {
        by_machine.entry(k.machine).or_default().push(v);
    }
    let mut machines: Vec<_> = by_machine.into_iter().collect();
    machines.sort_unstable_by_key(|(m, _)| *m);
    for (_, mut vars) in machines {
        vars.sort_by_key(|&v| (table.key(v).start, v));
        for (i, &a) in vars.iter().enumerate() {
            let ka = table.key(a);
            let end = ka.start + table.duration(a);
            for &b in &vars[i + 1..] {
                let kb = table.key(b);
                if kb.start >= end {
                    break;
                }
                if (ka.job, ka.op) != (kb.job, kb.op) {
                    overlap.add_quadratic(a, b, 1.0);
                }
            }
        }
    }

    for (v, c) in objective.costs(instance, table).into_iter().enumerate() {
        if c != 0.0 {
            makespan.add_linear(v, c);
        }
    }

    BqmTerms { one_start, precedence, overlap, makespan }
}

/// `alpha*H_onestart + beta*H_precedence + gamma*H_overlap + delta*H_makespan`
/// with the start-deviation objective.
pub fn build_bqm(instance: &FjsspInstance, table: &VariableTable, weights: &PenaltyWeights) -> Bqm {
    build_bqm_with(instance, table, weights, &StartDeviation)
}

pub fn build_bqm_with(
    instance: &FjsspInstance,
    table: &VariableTable,
    weights: &PenaltyWeights,
    objective: &dyn MakespanObjective,
) -> Bqm {
    build_terms(instance, table, objective).combine(weights)
}
