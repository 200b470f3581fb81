use std::collections::HashMap;
use std::ops::Range;

use crate::instance::FjsspInstance;

use super::QuboError;

/// `x_ijkt`: operation `op` of job `job` starts at `start` on `machine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub job: usize,
    pub op: usize,
    pub machine: usize,
    pub start: u32,
}

/// Start-time window of one operation and the contiguous block of variables it owns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpWindow {
    pub job: usize,
    pub op: usize,
    /// First admissible start; the makespan objective measures delay from here.
    pub base: u32,
    pub len: u32,
    pub vars: Range<usize>,
}

/// Requested window of one operation, used by [`VariableTable::from_plan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPlan {
    pub job: usize,
    pub op: usize,
    pub base: u32,
    pub len: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableTable {
    entries: Vec<VarKey>,
    durations: Vec<u32>,
    index: HashMap<VarKey, usize>,
    windows: Vec<OpWindow>,
    window_of: HashMap<(usize, usize), usize>,
    t_window: u32,
    horizon: u32,
}

/// One window per operation starting at its earliest start, `t_window` long,
/// clipped so that every start satisfies `t + p <= T`.
pub fn build_variable_table(instance: &FjsspInstance, t_window: u32) -> Result<VariableTable, QuboError> {
    if t_window < 1 {
        return Err(QuboError::ZeroWindow);
    }
    let plan: Vec<WindowPlan> = instance
        .op_refs()
        .map(|(job, op)| WindowPlan {
            job,
            op,
            base: instance.earliest_start(job, op).expect("op_refs yields valid indices"),
            len: t_window,
        })
        .collect();
    VariableTable::from_plan(instance, &plan, t_window, instance.horizon, |_, _| true)
}

impl VariableTable {
    /// Builds a table over the planned operations. `allow(key, p)` may veto
    /// individual variables; a planned operation left without any variable
    /// is an error.
    pub fn from_plan(
        instance: &FjsspInstance,
        plan: &[WindowPlan],
        t_window: u32,
        horizon: u32,
        mut allow: impl FnMut(&VarKey, u32) -> bool,
    ) -> Result<VariableTable, QuboError> {
        let mut plan = plan.to_vec();
        plan.sort_by_key(|w| (w.job, w.op));
        let mut entries = Vec::new();
        let mut durations = Vec::new();
        let mut windows = Vec::with_capacity(plan.len());
        for w in &plan {
            let op = &instance.jobs[w.job].operations[w.op];
            let mut eligible = op.eligible.clone();
            eligible.sort_by_key(|e| e.machine);
            let first = entries.len();
            for e in &eligible {
                let end = (w.base + w.len).min((horizon + 1).saturating_sub(e.time));
                for start in w.base..end {
                    let key = VarKey { job: w.job, op: w.op, machine: e.machine, start };
                    if allow(&key, e.time) {
                        entries.push(key);
                        durations.push(e.time);
                    }
                }
            }
            if entries.len() == first {
                return Err(QuboError::EmptyWindow { job: w.job, op: w.op });
            }
            windows.push(OpWindow { job: w.job, op: w.op, base: w.base, len: w.len, vars: first..entries.len() });
        }
        let index = entries.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let window_of = windows.iter().enumerate().map(|(i, w)| ((w.job, w.op), i)).collect();
        Ok(VariableTable { entries, durations, index, windows, window_of, t_window, horizon })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VarKey] {
        &self.entries
    }

    pub fn key(&self, var: usize) -> VarKey {
        self.entries[var]
    }

    /// Processing time of the variable's operation on its machine.
    pub fn duration(&self, var: usize) -> u32 {
        self.durations[var]
    }

    pub fn lookup(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Windows in `(job, op)` order.
    pub fn windows(&self) -> &[OpWindow] {
        &self.windows
    }

    pub fn window(&self, job: usize, op: usize) -> Option<&OpWindow> {
        self.window_of.get(&(job, op)).map(|&i| &self.windows[i])
    }

    /// Distinct jobs covered by the table, ascending.
    pub fn jobs(&self) -> Vec<usize> {
        let mut jobs: Vec<usize> = self.windows.iter().map(|w| w.job).collect();
        jobs.dedup();
        jobs
    }

    pub fn t_window(&self) -> u32 {
        self.t_window
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, SetupParams};

    #[test]
    fn reported_variable_counts() {
        for (n, nv) in [(20, 800), (84, 14112)] {
            let inst = generate_instance(&SetupParams::s1(n, 2)).unwrap();
            assert_eq!(build_variable_table(&inst, 2).unwrap().len(), nv);
        }
    }

    #[test]
    fn single_operation_window() {
        let inst = generate_instance(&SetupParams::s1(1, 2)).unwrap();
        let table = build_variable_table(&inst, 2).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.key(0).start, 0);
        assert_eq!(table.key(1).start, 1);
        assert_eq!(table.window(0, 0).unwrap().vars, 0..2);
    }

    #[test]
    fn closed_form_for_generated_families() {
        for params in [SetupParams::s2(4, 3, 2), SetupParams::s1(6, 2)] {
            let inst = generate_instance(&params).unwrap();
            let table = build_variable_table(&inst, params.t_window).unwrap();
            assert_eq!(table.len(), params.n * params.n * params.k * params.t_window as usize, "{params:?}");
        }
        // Wider windows are clipped at the horizon for the last operation of each job.
        let params = SetupParams::s3(3, 2, 2);
        let table = build_variable_table(&generate_instance(&params).unwrap(), params.t_window).unwrap();
        assert_eq!(params.t_window, 3);
        assert_eq!(table.len(), 3 * 2 * (2 * 3 + 2));
    }

    #[test]
    fn entries_sorted_and_deterministic() {
        let inst = generate_instance(&SetupParams::s2(4, 2, 2)).unwrap();
        let a = build_variable_table(&inst, 2).unwrap();
        let b = build_variable_table(&inst, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.entries().windows(2).all(|w| w[0] < w[1]));
        for (v, k) in a.entries().iter().enumerate() {
            assert_eq!(a.lookup(k), Some(v));
            assert!(k.start + a.duration(v) <= inst.horizon);
        }
    }

    #[test]
    fn empty_window_is_reported() {
        let mut inst = generate_instance(&SetupParams::s1(2, 2)).unwrap();
        inst.horizon = 1;
        assert_eq!(build_variable_table(&inst, 2), Err(QuboError::EmptyWindow { job: 0, op: 1 }));
        assert_eq!(build_variable_table(&inst, 0), Err(QuboError::ZeroWindow));
    }
}
