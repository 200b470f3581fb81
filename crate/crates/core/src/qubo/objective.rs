//! Makespan objectives: per-variable costs added (scaled by `delta`) to the
//! linear part of the model.

use std::sync::Arc;

use crate::instance::FjsspInstance;
use crate::registry::Registry;

use super::VariableTable;

pub trait MakespanObjective: Send + Sync {
    fn name(&self) -> &'static str;

    /// Nonnegative unscaled cost of every table entry.
    fn costs(&self, instance: &FjsspInstance, table: &VariableTable) -> Vec<f64>;
}

/// Delay of each operation beyond its window base (the earliest start for
/// unpruned tables): `t - est`. Zero exactly when every operation starts
/// as early as its predecessors allow.
#[derive(Debug, Clone, Copy, Default)]
pub struct StartDeviation;

impl MakespanObjective for StartDeviation {
    fn name(&self) -> &'static str {
        "start-deviation"
    }

    fn costs(&self, _instance: &FjsspInstance, table: &VariableTable) -> Vec<f64> {
        let mut costs = vec![0.0; table.len()];
        for w in table.windows() {
            for v in w.vars.clone() {
                costs[v] = (table.key(v).start - w.base) as f64;
            }
        }
        costs
    }
}

/// Exact makespan encoding on terminal operations only. With `J` jobs and
/// the lower bound `LB = max_i (base of last op + its min processing time)`,
/// a terminal start completing at `C` costs `0` if `C <= LB`, else
/// `(J + 1)^(C - LB - 1)`. One job finishing at `C` outweighs all jobs
/// finishing by `C - 1`, so the cost minimum is a minimum-makespan schedule.
/// Costs grow exponentially with the window span; meant for small windows.
#[derive(Debug, Clone, Copy, Default)]
pub struct TerminalCompletion;

impl MakespanObjective for TerminalCompletion {
    fn name(&self) -> &'static str {
        "terminal-completion"
    }

    fn costs(&self, instance: &FjsspInstance, table: &VariableTable) -> Vec<f64> {
        let jobs = table.jobs();
        let base = (jobs.len() + 1) as f64;
        let terminal: Vec<_> = table
            .windows()
            .iter()
            .filter(|w| w.op + 1 == instance.jobs[w.job].operations.len())
            .collect();
        let lower_bound = terminal
            .iter()
            .map(|w| w.base + instance.jobs[w.job].operations[w.op].min_time())
            .max()
            .unwrap_or(0);
        let mut costs = vec![0.0; table.len()];
        for w in terminal {
            for v in w.vars.clone() {
                let completion = table.key(v).start + table.duration(v);
                if completion > lower_bound {
                    costs[v] = base.powi((completion - lower_bound - 1) as i32);
                }
            }
        }
        costs
    }
}

/// Built-in objectives; the first entry is the default.
pub fn objectives() -> Registry<dyn MakespanObjective> {
    let mut reg: Registry<dyn MakespanObjective> = Registry::new();
    reg.register("start-deviation", Arc::new(StartDeviation));
    reg.register("terminal-completion", Arc::new(TerminalCompletion));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, Eligibility, Job, Operation, SetupParams};
    use crate::qubo::build_variable_table;

    #[test]
    fn start_deviation_is_delay_from_earliest_start() {
        let inst = generate_instance(&SetupParams::s1(3, 2)).unwrap();
        let table = build_variable_table(&inst, 2).unwrap();
        let costs = StartDeviation.costs(&inst, &table);
        for (v, k) in table.entries().iter().enumerate() {
            assert_eq!(costs[v], (k.start - k.op as u32) as f64);
        }
    }

    #[test]
    fn terminal_completion_weights() {
        // Two one-op jobs on a shared machine, p = 1, full window over T = 3.
        let e = Eligibility { machine: 0, time: 1 };
        let inst = FjsspInstance {
            machine_count: 1,
            horizon: 3,
            jobs: (0..2).map(|id| Job { id, operations: vec![Operation::new(vec![e])] }).collect(),
        };
        let table = build_variable_table(&inst, 3).unwrap();
        let costs = TerminalCompletion.costs(&inst, &table);
        // LB = 1; completions 1, 2, 3 cost 0, 1, 3 per job.
        assert_eq!(costs, vec![0.0, 1.0, 3.0, 0.0, 1.0, 3.0]);
    }

    #[test]
    fn registry_default_first() {
        let reg = objectives();
        assert_eq!(reg.names()[0], "start-deviation");
        assert_eq!(reg.get("terminal-completion").unwrap().name(), "terminal-completion");
    }
}
