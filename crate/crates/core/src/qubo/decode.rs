use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::instance::FjsspInstance;
use crate::oracle::Diagnostic;

use super::VariableTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub job: usize,
    pub op: usize,
    pub machine: usize,
    pub start: u32,
    pub finish: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Sorted by `(job, op)`.
    pub ops: Vec<ScheduledOp>,
    pub makespan: u32,
}

impl Schedule {
    pub fn new(mut ops: Vec<ScheduledOp>) -> Self {
        ops.sort_by_key(|o| (o.job, o.op));
        let makespan = ops.iter().map(|o| o.finish).max().unwrap_or(0);
        Self { ops, makespan }
    }

    pub fn merge(parts: impl IntoIterator<Item = Schedule>) -> Self {
        Self::new(parts.into_iter().flat_map(|s| s.ops).collect())
    }

    pub fn get(&self, job: usize, op: usize) -> Option<&ScheduledOp> {
        self.ops
            .binary_search_by_key(&(job, op), |o| (o.job, o.op))
            .ok()
            .map(|i| &self.ops[i])
    }
}

/// Set variables of every window, in window order.
pub fn op_assignments(table: &VariableTable, sample: &[bool]) -> Vec<Vec<usize>> {
    table.windows().iter().map(|w| w.vars.clone().filter(|&v| sample[v]).collect()).collect()
}

/// Reads a sample back into a schedule over the table's jobs, or reports
/// every violated constraint with the variables involved.
///
/// # Panics
/// If `sample.len()` differs from the table size.
pub fn decode(_instance: &FjsspInstance, table: &VariableTable, sample: &[bool]) -> Result<Schedule, Vec<Diagnostic>> {
    assert_eq!(sample.len(), table.len(), "sample length must equal the variable count");
    let mut violations = Vec::new();
    let mut chosen: HashMap<(usize, usize), usize> = HashMap::new();
    for (w, set) in table.windows().iter().zip(op_assignments(table, sample)) {
        if set.len() == 1 {
            chosen.insert((w.job, w.op), set[0]);
        } else {
            violations.push(Diagnostic::OneStart { job: w.job, op: w.op, starts: set.len(), variables: set });
        }
    }

    for w in table.windows() {
        let (Some(&a), Some(&b)) = (chosen.get(&(w.job, w.op)), chosen.get(&(w.job, w.op + 1))) else {
            continue;
        };
        let finish = table.key(a).start + table.duration(a);
        let start = table.key(b).start;
        if start < finish {
            violations.push(Diagnostic::Precedence {
                job: w.job,
                op: w.op + 1,
                predecessor_finish: finish,
                start,
                variables: vec![a, b],
            });
        }
    }

    let mut by_machine: HashMap<usize, Vec<usize>> = HashMap::new();
    for &v in chosen.values() {
        by_machine.entry(table.key(v).machine).or_default().push(v);
    }
    let mut machines: Vec<_> = by_machine.into_iter().collect();
    machines.sort_unstable_by_key(|(m, _)| *m);
    for (machine, mut vars) in machines {
        vars.sort_by_key(|&v| (table.key(v).start, v));
        for (i, &a) in vars.iter().enumerate() {
            let ka = table.key(a);
            let end = ka.start + table.duration(a);
            for &b in &vars[i + 1..] {
                let kb = table.key(b);
                if kb.start >= end {
                    break;
                }
                violations.push(Diagnostic::Overlap {
                    machine,
                    first: (ka.job, ka.op),
                    second: (kb.job, kb.op),
                    variables: vec![a, b],
                });
            }
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }
    Ok(Schedule::new(
        chosen
            .values()
            .map(|&v| {
                let k = table.key(v);
                ScheduledOp { job: k.job, op: k.op, machine: k.machine, start: k.start, finish: k.start + table.duration(v) }
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, SetupParams};
    use crate::oracle::DiagnosticKind;
    use crate::qubo::build_variable_table;

    #[test]
    fn earliest_sample_decodes_to_optimal_makespan() {
        let inst = generate_instance(&SetupParams::s1(20, 2)).unwrap();
        let table = build_variable_table(&inst, 2).unwrap();
        let mut s = vec![false; table.len()];
        for w in table.windows() {
            s[w.vars.start] = true;
        }
        let sched = decode(&inst, &table, &s).unwrap();
        assert_eq!(sched.makespan, 20);
        assert_eq!(sched.ops.len(), 400);
    }

    #[test]
    fn all_zero_sample_reports_every_operation() {
        let inst = generate_instance(&SetupParams::s1(4, 2)).unwrap();
        let table = build_variable_table(&inst, 2).unwrap();
        let diags = decode(&inst, &table, &vec![false; table.len()]).unwrap_err();
        assert_eq!(diags.len(), 16);
        assert!(diags.iter().all(|d| d.kind() == DiagnosticKind::OneStart));
    }

    #[test]
    fn early_successor_is_a_precedence_violation() {
        // Job 0 op 0 delayed to t=1 while op 1 stays at t=1.
        let inst = generate_instance(&SetupParams::s1(3, 2)).unwrap();
        let table = build_variable_table(&inst, 2).unwrap();
        let mut s = vec![false; table.len()];
        for w in table.windows() {
            s[w.vars.start] = true;
        }
        let w = table.window(0, 0).unwrap().vars.clone();
        s[w.start] = false;
        s[w.start + 1] = true;
        // Machine 0 is also busy at t=1 with job 2's second operation.
        let diags = decode(&inst, &table, &s).unwrap_err();
        let prec: Vec<_> = diags.iter().filter(|d| d.kind() == DiagnosticKind::Precedence).collect();
        assert_eq!(prec.len(), 1, "{diags:?}");
        match prec[0] {
            Diagnostic::Precedence { job, op, predecessor_finish, start, variables } => {
                assert_eq!((*job, *op, *predecessor_finish, *start), (0, 1, 2, 1));
                assert_eq!(variables, &vec![w.start + 1, table.window(0, 1).unwrap().vars.start]);
            }
            _ => unreachable!(),
        }
    }
}
