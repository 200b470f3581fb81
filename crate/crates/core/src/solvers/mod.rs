//! The three solver configurations: direct annealing on the hardware graph
//! (CQPU), a parallel SA / tabu / annealed-subproblem portfolio (HQPU), and
//! the iterative job-subset decomposition on top of it (IHQPU).

mod cqpu;
mod hqpu;
mod ihqpu;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::FjsspInstance;
use crate::oracle::{verify_schedule, Diagnostic};
use crate::qubo::{build_variable_table, decode, objectives, Bqm, PenaltyWeights, QuboError, Schedule, VariableTable};
use crate::registry::Registry;
use crate::topology::{Topology, DEFAULT_EMBEDDING_EFFORT};

pub use cqpu::{solve_cqpu, Cqpu};
pub use hqpu::{hqpu_minimize, solve_hqpu, Hqpu, HqpuRun};
pub use ihqpu::{solve_ihqpu, Ihqpu};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error("unknown solver '{0}'")]
    UnknownSolver(String),
    #[error("free and fixed sets overlap at variable {0}")]
    Overlap(usize),
    #[error("variable {0} is neither fixed nor free")]
    Uncovered(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    Cqpu,
    Hqpu,
    Ihqpu,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cqpu => "cqpu",
            Self::Hqpu => "hqpu",
            Self::Ihqpu => "ihqpu",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_ascii_uppercase())
    }
}

impl FromStr for SolverKind {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cqpu" => Ok(Self::Cqpu),
            "hqpu" => Ok(Self::Hqpu),
            "ihqpu" => Ok(Self::Ihqpu),
            _ => Err(SolveError::UnknownSolver(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Solved,
    TimedOut,
    EmbeddingInfeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Solved => "Solved",
            Self::TimedOut => "TimedOut",
            Self::EmbeddingInfeasible => "EmbeddingInfeasible",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub topology: Arc<Topology>,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    /// Sweeps per sampler call; when set, every stopping rule counts sweeps
    /// and rounds instead of reading the clock, and results are reproducible.
    pub deterministic_budget: Option<usize>,
    pub seed: u64,
    /// Largest sub-model (in variables) IHQPU solves in one loop;
    /// `usize::MAX` disables partitioning.
    pub partition_threshold: usize,
    pub subset_size_cap: usize,
    /// `None` selects [`PenaltyWeights::auto`].
    pub weights: Option<PenaltyWeights>,
    pub objective: String,
    pub t_window: u32,
    /// Reads per annealing call.
    pub reads: usize,
    pub embedding_effort: usize,
}

impl SolverConfig {
    pub fn new(kind: SolverKind, topology: Arc<Topology>) -> Self {
        Self {
            kind,
            topology,
            time_limit: 900.0,
            deterministic_budget: None,
            seed: 0,
            partition_threshold: usize::MAX,
            subset_size_cap: usize::MAX,
            weights: None,
            objective: "start-deviation".into(),
            t_window: 2,
            reads: 10,
            embedding_effort: DEFAULT_EMBEDDING_EFFORT,
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::InvalidConfig(m.to_string()));
        if !(self.time_limit > 0.0) {
            return bad("time_limit must be positive");
        }
        if self.partition_threshold == 0 {
            return bad("partition_threshold must be positive");
        }
        if self.subset_size_cap == 0 {
            return bad("subset_size_cap must be positive");
        }
        if self.deterministic_budget == Some(0) {
            return bad("deterministic budget must be at least one sweep");
        }
        if self.t_window == 0 {
            return bad("t_window must be at least 1");
        }
        if self.reads == 0 {
            return bad("reads must be at least 1");
        }
        if objectives().get(&self.objective).is_none() {
            return bad(&format!("unknown objective '{}'", self.objective));
        }
        Ok(())
    }

    fn expect_kind(&self, kind: SolverKind) -> Result<(), SolveError> {
        self.validate()?;
        if self.kind != kind {
            return Err(SolveError::InvalidConfig(format!("{} solver called with a {} configuration", kind, self.kind)));
        }
        Ok(())
    }

    fn deadline(&self, started: Instant) -> Option<Instant> {
        match self.deterministic_budget {
            Some(_) => None,
            None => Some(started + Duration::from_secs_f64(self.time_limit)),
        }
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            kind: self.kind,
            topology: self.topology.name().to_string(),
            time_limit: self.time_limit,
            deterministic_budget: self.deterministic_budget,
            seed: self.seed,
            partition_threshold: (self.partition_threshold != usize::MAX).then_some(self.partition_threshold),
            subset_size_cap: (self.subset_size_cap != usize::MAX).then_some(self.subset_size_cap),
            weights: self.weights,
            objective: self.objective.clone(),
            t_window: self.t_window,
        }
    }
}

/// Serializable copy of the settings a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub kind: SolverKind,
    pub topology: String,
    pub time_limit: f64,
    pub deterministic_budget: Option<usize>,
    pub seed: u64,
    /// Absent when unbounded.
    pub partition_threshold: Option<usize>,
    pub subset_size_cap: Option<usize>,
    pub weights: Option<PenaltyWeights>,
    pub objective: String,
    pub t_window: u32,
}

/// One IHQPU loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub jobs: Vec<usize>,
    pub n_v: usize,
    pub makespan: u32,
    /// Operations whose window had to be extended past the pruned range.
    pub extended_windows: usize,
    /// Whether the sub-solution was infeasible and list scheduling was used instead.
    pub repaired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: ConfigEcho,
    /// Seconds from submission to result.
    pub elapsed: f64,
    pub best_energy: f64,
    pub schedule: Option<Schedule>,
    /// Constraint violations of the best sample when no feasible one was found.
    pub violations: Vec<Diagnostic>,
    pub makespan: Option<u32>,
    pub n_v: usize,
    pub n_q: usize,
    pub n_e: Option<usize>,
    pub status: Status,
    pub loop_trace: Vec<LoopRecord>,
    /// Coordination rounds (HQPU) or loops (IHQPU) run.
    pub rounds: usize,
}

impl SolveReport {
    pub fn feasible(&self) -> bool {
        self.schedule.is_some()
    }

    /// Equality ignoring elapsed time and the solver kind in the echo.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |r: &Self| {
            let mut r = r.clone();
            r.elapsed = 0.0;
            r.config.kind = SolverKind::Hqpu;
            r
        };
        strip(self) == strip(other)
    }
}

/// A solver configuration selectable by name.
pub trait Solver: Send + Sync {
    fn kind(&self) -> SolverKind;

    fn solve(&self, instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError>;
}

/// `cqpu`, `hqpu` and `ihqpu`.
pub fn registry() -> Registry<dyn Solver> {
    let mut reg: Registry<dyn Solver> = Registry::new();
    reg.register("cqpu", Arc::new(Cqpu));
    reg.register("hqpu", Arc::new(Hqpu));
    reg.register("ihqpu", Arc::new(Ihqpu));
    reg
}

/// Runs the solver named by `config.kind`.
pub fn solve(instance: &FjsspInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
    let solver = registry().get(config.kind.name()).expect("every kind is registered");
    solver.solve(instance, config)
}

/// Compiled model of a whole instance.
pub(crate) struct Compiled {
    pub table: VariableTable,
    pub weights: PenaltyWeights,
    pub bqm: Bqm,
}

pub(crate) fn compile(instance: &FjsspInstance, config: &SolverConfig) -> Result<Compiled, SolveError> {
    let table = build_variable_table(instance, config.t_window)?;
    let objective = objectives().get(&config.objective).expect("validated");
    let weights = config.weights.unwrap_or_else(|| PenaltyWeights::auto(instance, &table, objective.as_ref()));
    let bqm = crate::qubo::build_bqm_with(instance, &table, &weights, objective.as_ref());
    Ok(Compiled { table, weights, bqm })
}

/// Decoded schedule of `sample` if it is feasible for the whole instance,
/// otherwise the violations found.
pub(crate) fn check_sample(instance: &FjsspInstance, table: &VariableTable, sample: &[bool]) -> Result<Schedule, Vec<Diagnostic>> {
    let schedule = decode(instance, table, sample)?;
    let diags = verify_schedule(instance, &schedule);
    if diags.is_empty() {
        Ok(schedule)
    } else {
        Err(diags)
    }
}

/// Fixes every variable outside `free` and folds it into the model: for a
/// free variable `i`, `linear'_i = linear_i + sum_j quad_ij x_j` over fixed
/// `j`, and the offset takes all fixed-only terms. Variable `k` of the
/// result is `free[k]`. For every completion of the free variables the
/// sub-model energy equals the full energy.
///
/// `fixed` lists `(variable, value)` pairs; together with `free` they must
/// cover every variable exactly once.
pub fn clamp_subproblem(bqm: &Bqm, fixed: &[(usize, bool)], free: &[usize]) -> Result<Bqm, SolveError> {
    let n = bqm.num_variables();
    // slot: None = uncovered, Some(Ok(k)) = free index k, Some(Err(x)) = fixed value x.
    let mut slot: Vec<Option<Result<usize, bool>>> = vec![None; n];
    for (k, &v) in free.iter().enumerate() {
        if v >= n {
            return Err(SolveError::InvalidConfig(format!("free variable {v} out of range")));
        }
        if slot[v].is_some() {
            return Err(SolveError::Overlap(v));
        }
        slot[v] = Some(Ok(k));
    }
    for &(v, x) in fixed {
        if v >= n {
            return Err(SolveError::InvalidConfig(format!("fixed variable {v} out of range")));
        }
        if slot[v].is_some() {
            return Err(SolveError::Overlap(v));
        }
        slot[v] = Some(Err(x));
    }
    if let Some(v) = slot.iter().position(Option::is_none) {
        return Err(SolveError::Uncovered(v));
    }
    let slot: Vec<Result<usize, bool>> = slot.into_iter().map(Option::unwrap).collect();

    let mut sub = Bqm::new(free.len());
    sub.add_offset(bqm.offset());
    for (v, &c) in bqm.linear().iter().enumerate() {
        match slot[v] {
            Ok(k) => sub.add_linear(k, c),
            Err(true) => sub.add_offset(c),
            Err(false) => {}
        }
    }
    for (&(a, b), &c) in bqm.quadratic() {
        match (slot[a], slot[b]) {
            (Ok(i), Ok(j)) => sub.add_quadratic(i, j, c),
            (Ok(i), Err(true)) | (Err(true), Ok(i)) => sub.add_linear(i, c),
            (Err(true), Err(true)) => sub.add_offset(c),
            _ => {}
        }
    }
    Ok(sub)
}

/// Priority of a job for the iterative decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BottleneckFactor {
    pub job: usize,
    pub value: f64,
}

/// `(sum over the job's operations of mean eligible processing time) /
/// (mean eligible-machine count per operation)`, sorted descending with
/// ties broken by ascending job id. Long jobs with few machine choices come
/// first.
pub fn bottleneck_factors(instance: &FjsspInstance, remaining_jobs: &[usize]) -> Vec<BottleneckFactor> {
    let mut out: Vec<BottleneckFactor> = remaining_jobs
        .iter()
        .map(|&job| {
            let ops = &instance.jobs[job].operations;
            if ops.is_empty() {
                return BottleneckFactor { job, value: 0.0 };
            }
            let total: f64 = ops.iter().map(|o| o.mean_time()).sum();
            let choice = ops.iter().map(|o| o.eligible.len() as f64).sum::<f64>() / ops.len() as f64;
            BottleneckFactor { job, value: if choice > 0.0 { total / choice } else { 0.0 } }
        })
        .collect();
    out.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.job.cmp(&b.job)));
    out
}

/// Stream-separated seed for `(round, worker)`.
pub(crate) fn derive_seed(seed: u64, round: usize, worker: usize) -> u64 {
    let mut z = seed ^ ((round as u64) << 20 | worker as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, Eligibility, Job, Operation, SetupParams};
    use crate::oracle::exact_bqm_minimum;
    use crate::topology::chimera;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bqm(n: usize, seed: u64) -> Bqm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bqm = Bqm::new(n);
        for v in 0..n {
            bqm.add_linear(v, rng.gen_range(-2.0..2.0));
            for u in v + 1..n {
                if rng.gen_bool(0.5) {
                    bqm.add_quadratic(v, u, rng.gen_range(-2.0..2.0));
                }
            }
        }
        bqm.add_offset(rng.gen_range(-1.0..1.0));
        bqm
    }

    #[test]
    fn clamp_with_everything_free_is_identity() {
        let bqm = random_bqm(6, 1);
        let sub = clamp_subproblem(&bqm, &[], &(0..6).collect::<Vec<_>>()).unwrap();
        assert_eq!(sub, bqm);
    }

    #[test]
    fn clamp_with_nothing_free_is_the_energy() {
        let bqm = random_bqm(6, 2);
        let x = [true, false, true, true, false, true];
        let fixed: Vec<_> = x.iter().copied().enumerate().collect();
        let sub = clamp_subproblem(&bqm, &fixed, &[]).unwrap();
        assert_eq!(sub.num_variables(), 0);
        assert!((sub.offset() - bqm.energy(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn clamp_energy_identity_is_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..20u64 {
            let n = 8 + (trial as usize % 5);
            let bqm = random_bqm(n, 100 + trial);
            let mut free = Vec::new();
            let mut fixed = Vec::new();
            for v in 0..n {
                if rng.gen_bool(0.5) {
                    free.push(v);
                } else {
                    fixed.push((v, rng.gen::<bool>()));
                }
            }
            let sub = clamp_subproblem(&bqm, &fixed, &free).unwrap();
            for mask in 0..1usize << free.len() {
                let mut full = vec![false; n];
                for &(v, x) in &fixed {
                    full[v] = x;
                }
                let part: Vec<bool> = (0..free.len()).map(|k| mask >> k & 1 == 1).collect();
                for (k, &v) in free.iter().enumerate() {
                    full[v] = part[k];
                }
                let (a, b) = (sub.energy(&part).unwrap(), bqm.energy(&full).unwrap());
                assert!((a - b).abs() < 1e-9, "trial {trial} mask {mask}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn clamp_rejects_bad_partitions() {
        let bqm = random_bqm(3, 3);
        assert!(matches!(clamp_subproblem(&bqm, &[(1, true)], &[0, 1, 2]), Err(SolveError::Overlap(1))));
        assert!(matches!(clamp_subproblem(&bqm, &[(1, true)], &[0]), Err(SolveError::Uncovered(2))));
    }

    fn job(id: usize, ops: &[&[(usize, u32)]]) -> Job {
        Job {
            id,
            operations: ops
                .iter()
                .map(|o| Operation::new(o.iter().map(|&(machine, time)| Eligibility { machine, time }).collect()))
                .collect(),
        }
    }

    #[test]
    fn bottleneck_order() {
        let inst = FjsspInstance { jobs: vec![job(0, &[&[(0, 3)]]), job(1, &[&[(1, 5)]])], machine_count: 2, horizon: 9 };
        let f = bottleneck_factors(&inst, &[0, 1]);
        assert_eq!(f.iter().map(|b| b.job).collect::<Vec<_>>(), vec![1, 0]);
        assert_eq!(f[0].value, 5.0);

        let inst = FjsspInstance {
            jobs: vec![job(0, &[&[(0, 2), (1, 2)], &[(0, 2), (1, 2)]]), job(1, &[&[(0, 2)], &[(1, 2)]])],
            machine_count: 2,
            horizon: 9,
        };
        let f = bottleneck_factors(&inst, &[0, 1]);
        assert_eq!(f.iter().map(|b| b.job).collect::<Vec<_>>(), vec![1, 0]);
        assert_eq!((f[0].value, f[1].value), (4.0, 2.0));

        let inst = generate_instance(&SetupParams::s1(5, 2)).unwrap();
        let f = bottleneck_factors(&inst, &[4, 2, 0, 1, 3]);
        assert_eq!(f.iter().map(|b| b.job).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        assert!(f.iter().all(|b| b.value == 5.0));
    }

    #[test]
    fn config_validation() {
        let topo = Arc::new(chimera(1, 1, 4).unwrap());
        let mut c = SolverConfig::new(SolverKind::Hqpu, topo);
        assert!(c.validate().is_ok());
        c.time_limit = 0.0;
        assert!(c.validate().is_err());
        c.time_limit = 1.0;
        c.partition_threshold = 0;
        assert!(c.validate().is_err());
        c.partition_threshold = 5;
        c.objective = "nope".into();
        assert!(c.validate().is_err());
        assert_eq!("IHQPU".parse::<SolverKind>().unwrap(), SolverKind::Ihqpu);
        assert!("qpu".parse::<SolverKind>().is_err());
        assert_eq!(registry().names(), vec!["cqpu", "hqpu", "ihqpu"]);
    }

    #[test]
    fn exact_minimum_of_clamped_model_matches() {
        let bqm = random_bqm(10, 5);
        let (x, e) = exact_bqm_minimum(&bqm).unwrap();
        let fixed: Vec<_> = (0..5).map(|v| (v, x[v])).collect();
        let sub = clamp_subproblem(&bqm, &fixed, &(5..10).collect::<Vec<_>>()).unwrap();
        let (_, se) = exact_bqm_minimum(&sub).unwrap();
        assert!((se - e).abs() < 1e-9);
    }
}
