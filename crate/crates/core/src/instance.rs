//! Flexible job-shop instances: data model, earliest-start analysis, the
//! three parameterized quadratic instance families, and JSON file I/O.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid setup parameters: {0}")]
    InvalidParams(String),
    #[error("index out of range: job {job}, operation {op}")]
    OutOfRange { job: usize, op: usize },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("instance failed validation: {0}")]
    Invalid(String),
}

/// One eligible machine of an operation and its processing time there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eligibility {
    pub machine: usize,
    pub time: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Operation {
    pub eligible: Vec<Eligibility>,
}

impl Operation {
    pub fn new(eligible: Vec<Eligibility>) -> Self {
        Self { eligible }
    }

    pub fn min_time(&self) -> u32 {
        self.eligible.iter().map(|e| e.time).min().unwrap_or(0)
    }

    pub fn max_time(&self) -> u32 {
        self.eligible.iter().map(|e| e.time).max().unwrap_or(0)
    }

    pub fn mean_time(&self) -> f64 {
        if self.eligible.is_empty() {
            return 0.0;
        }
        self.eligible.iter().map(|e| e.time as f64).sum::<f64>() / self.eligible.len() as f64
    }

    /// Processing time on `machine`, or `None` if the machine is not eligible.
    pub fn time_on(&self, machine: usize) -> Option<u32> {
        self.eligible.iter().find(|e| e.machine == machine).map(|e| e.time)
    }
}

/// A job: its operations in precedence order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: usize,
    pub operations: Vec<Operation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FjsspInstance {
    pub jobs: Vec<Job>,
    pub machine_count: usize,
    /// Discrete time steps `0..horizon`.
    pub horizon: u32,
}

impl FjsspInstance {
    pub fn operation(&self, job: usize, op: usize) -> Result<&Operation, InstanceError> {
        self.jobs
            .get(job)
            .and_then(|j| j.operations.get(op))
            .ok_or(InstanceError::OutOfRange { job, op })
    }

    pub fn operation_count(&self) -> usize {
        self.jobs.iter().map(|j| j.operations.len()).sum()
    }

    /// `(job, op)` pairs in job-major order.
    pub fn op_refs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.jobs
            .iter()
            .enumerate()
            .flat_map(|(i, j)| (0..j.operations.len()).map(move |o| (i, o)))
    }

    pub fn earliest_start(&self, job: usize, op: usize) -> Result<u32, InstanceError> {
        earliest_start(self, job, op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setup {
    S1,
    S2,
    S3,
}

impl Setup {
    pub fn number(self) -> u8 {
        match self {
            Setup::S1 => 1,
            Setup::S2 => 2,
            Setup::S3 => 3,
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl std::str::FromStr for Setup {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "1" | "S1" => Ok(Setup::S1),
            "2" | "S2" => Ok(Setup::S2),
            "3" | "S3" => Ok(Setup::S3),
            other => Err(InstanceError::InvalidParams(format!("unknown setup '{other}'"))),
        }
    }
}

/// Parameters of a quadratic instance (`J = O = M = n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupParams {
    pub setup: Setup,
    pub n: usize,
    /// Eligible machines per operation.
    pub k: usize,
    /// Uniform processing time.
    pub p: u32,
    /// Start-time window length `T_r`.
    pub t_window: u32,
}

impl SetupParams {
    pub fn s1(n: usize, t_window: u32) -> Self {
        Self { setup: Setup::S1, n, k: 1, p: 1, t_window }
    }

    pub fn s2(n: usize, k: usize, t_window: u32) -> Self {
        Self { setup: Setup::S2, n, k, p: 1, t_window }
    }

    pub fn s3(n: usize, k: usize, p: u32) -> Self {
        Self { setup: Setup::S3, n, k, p, t_window: p + 1 }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::InvalidParams(m));
        if self.n < 1 {
            return bad("n must be at least 1".into());
        }
        if self.k < 1 || self.k > self.n {
            return bad(format!("k must lie in 1..={}, got {}", self.n, self.k));
        }
        if self.p < 1 {
            return bad("p must be at least 1".into());
        }
        if self.t_window < 1 {
            return bad("t_window must be at least 1".into());
        }
        match self.setup {
            Setup::S1 if self.k != 1 || self.p != 1 => bad("setup 1 requires k = 1 and p = 1".into()),
            Setup::S2 if self.p != 1 => bad("setup 2 requires p = 1".into()),
            Setup::S3 if self.t_window != self.p + 1 => {
                bad(format!("setup 3 requires t_window = p + 1 = {}", self.p + 1))
            }
            _ => Ok(()),
        }
    }
}

/// Builds the quadratic instance: operation `j` of job `i` may run on
/// machines `(i + j + d) mod n` for `d in 0..k`, all at time `p`; the
/// horizon is `n * p + 1`.
pub fn generate_instance(params: &SetupParams) -> Result<FjsspInstance, InstanceError> {
    params.validate()?;
    let n = params.n;
    let jobs = (0..n)
        .map(|i| Job {
            id: i,
            operations: (0..n)
                .map(|j| {
                    Operation::new(
                        (0..params.k)
                            .map(|d| Eligibility { machine: (i + j + d) % n, time: params.p })
                            .collect(),
                    )
                })
                .collect(),
        })
        .collect();
    Ok(FjsspInstance { jobs, machine_count: n, horizon: n as u32 * params.p + 1 })
}

/// Sum of the minimum processing times of the predecessors of `(job, op)`.
pub fn earliest_start(instance: &FjsspInstance, job: usize, op: usize) -> Result<u32, InstanceError> {
    let j = instance.jobs.get(job).ok_or(InstanceError::OutOfRange { job, op })?;
    if op >= j.operations.len() {
        return Err(InstanceError::OutOfRange { job, op });
    }
    Ok(j.operations[..op].iter().map(Operation::min_time).sum())
}

/// A broken instance invariant and where it occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceDiagnostic {
    pub job: Option<usize>,
    pub op: Option<usize>,
    pub message: String,
}

impl fmt::Display for InstanceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.job, self.op) {
            (Some(j), Some(o)) => write!(f, "job {j}, op {o}: {}", self.message),
            (Some(j), None) => write!(f, "job {j}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

pub fn validate_instance(instance: &FjsspInstance) -> Vec<InstanceDiagnostic> {
    let mut out = Vec::new();
    let mut push = |job: Option<usize>, op: Option<usize>, message: String| {
        out.push(InstanceDiagnostic { job, op, message })
    };
    if instance.machine_count == 0 {
        push(None, None, "machine_count must be positive".into());
    }
    if instance.horizon == 0 {
        push(None, None, "horizon must be positive".into());
    }
    if instance.jobs.is_empty() {
        push(None, None, "instance has no jobs".into());
    }
    let mut ids: Vec<usize> = instance.jobs.iter().map(|j| j.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        push(None, None, "job ids are not unique".into());
    }
    for (i, job) in instance.jobs.iter().enumerate() {
        if job.operations.is_empty() {
            push(Some(i), None, "job has no operations".into());
        }
        for (o, op) in job.operations.iter().enumerate() {
            if op.eligible.is_empty() {
                push(Some(i), Some(o), "empty eligible-machine set".into());
            }
            let mut seen = Vec::with_capacity(op.eligible.len());
            for e in &op.eligible {
                if e.time < 1 {
                    push(Some(i), Some(o), format!("processing time {} on machine {} is below 1", e.time, e.machine));
                }
                if e.machine >= instance.machine_count {
                    push(
                        Some(i),
                        Some(o),
                        format!("machine {} outside [0, {})", e.machine, instance.machine_count),
                    );
                }
                if seen.contains(&e.machine) {
                    push(Some(i), Some(o), format!("machine {} listed twice", e.machine));
                }
                seen.push(e.machine);
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    machine_count: usize,
    horizon: u32,
    jobs: Vec<Vec<Vec<Eligibility>>>,
}

impl From<&FjsspInstance> for InstanceFile {
    fn from(inst: &FjsspInstance) -> Self {
        InstanceFile {
            machine_count: inst.machine_count,
            horizon: inst.horizon,
            jobs: inst
                .jobs
                .iter()
                .map(|j| j.operations.iter().map(|o| o.eligible.clone()).collect())
                .collect(),
        }
    }
}

pub fn instance_to_json(instance: &FjsspInstance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from(instance)).expect("instance serializes")
}

/// Parses an instance document. Job ids are positional.
pub fn instance_from_json(text: &str) -> Result<FjsspInstance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(FjsspInstance {
        machine_count: file.machine_count,
        horizon: file.horizon,
        jobs: file
            .jobs
            .into_iter()
            .enumerate()
            .map(|(id, ops)| Job { id, operations: ops.into_iter().map(Operation::new).collect() })
            .collect(),
    })
}

pub fn save_instance(path: impl AsRef<Path>, instance: &FjsspInstance) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(instance) + "\n")
        .map_err(|source| InstanceError::Io { path: path.display().to_string(), source })
}

/// Loads and validates an instance file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<FjsspInstance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| InstanceError::Io { path: path.display().to_string(), source })?;
    let instance = instance_from_json(&text)?;
    let diags = validate_instance(&instance);
    if !diags.is_empty() {
        let msg = diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        return Err(InstanceError::Invalid(msg));
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s1_size_20_matches_reported_dimensions() {
        let inst = generate_instance(&SetupParams::s1(20, 2)).unwrap();
        assert_eq!(inst.jobs.len(), 20);
        assert!(inst.jobs.iter().all(|j| j.operations.len() == 20));
        assert_eq!(inst.horizon, 21);
        assert_eq!(inst.operation_count(), 400);
    }

    #[test]
    fn smallest_instance() {
        let inst = generate_instance(&SetupParams::s1(1, 2)).unwrap();
        assert_eq!(inst.jobs.len(), 1);
        assert_eq!(inst.jobs[0].operations[0].eligible, vec![Eligibility { machine: 0, time: 1 }]);
        assert_eq!(inst.horizon, 2);
    }

    #[test]
    fn s3_every_machine_eligible() {
        let inst = generate_instance(&SetupParams::s3(3, 3, 3)).unwrap();
        assert_eq!(inst.horizon, 10);
        for job in &inst.jobs {
            for op in &job.operations {
                let mut ms: Vec<_> = op.eligible.iter().map(|e| e.machine).collect();
                ms.sort_unstable();
                assert_eq!(ms, vec![0, 1, 2]);
                assert!(op.eligible.iter().all(|e| e.time == 3));
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_instance(&SetupParams { n: 0, ..SetupParams::s1(1, 2) }).is_err());
        assert!(generate_instance(&SetupParams::s2(3, 4, 2)).is_err());
        assert!(generate_instance(&SetupParams { k: 2, ..SetupParams::s1(3, 2) }).is_err());
        assert!(generate_instance(&SetupParams { t_window: 2, ..SetupParams::s3(3, 3, 3) }).is_err());
    }

    #[test]
    fn latin_square_assignment() {
        let n = 7;
        let inst = generate_instance(&SetupParams::s1(n, 2)).unwrap();
        for j in 0..n {
            let mut machines: Vec<_> = inst.jobs.iter().map(|job| job.operations[j].eligible[0].machine).collect();
            machines.sort_unstable();
            assert_eq!(machines, (0..n).collect::<Vec<_>>());
        }
        for job in &inst.jobs {
            let mut machines: Vec<_> = job.operations.iter().map(|o| o.eligible[0].machine).collect();
            machines.sort_unstable();
            assert_eq!(machines, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn earliest_start_examples() {
        let inst = generate_instance(&SetupParams::s1(5, 2)).unwrap();
        for j in 0..5 {
            assert_eq!(earliest_start(&inst, 2, j).unwrap(), j as u32);
        }
        let e = |m, t| Eligibility { machine: m, time: t };
        let custom = FjsspInstance {
            machine_count: 2,
            horizon: 20,
            jobs: vec![Job {
                id: 0,
                operations: vec![
                    Operation::new(vec![e(0, 2), e(1, 6)]),
                    Operation::new(vec![e(1, 3)]),
                    Operation::new(vec![e(0, 4)]),
                ],
            }],
        };
        assert_eq!(earliest_start(&custom, 0, 0).unwrap(), 0);
        assert_eq!(earliest_start(&custom, 0, 2).unwrap(), 5);
        assert!(matches!(earliest_start(&custom, 0, 3), Err(InstanceError::OutOfRange { .. })));
        assert!(matches!(earliest_start(&custom, 1, 0), Err(InstanceError::OutOfRange { .. })));
    }

    #[test]
    fn validation_diagnostics() {
        let inst = generate_instance(&SetupParams::s1(5, 2)).unwrap();
        assert!(validate_instance(&inst).is_empty());

        let mut broken = inst.clone();
        broken.jobs[1].operations[3].eligible.clear();
        let d = validate_instance(&broken);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].job, d[0].op), (Some(1), Some(3)));

        let mut zero = inst;
        zero.jobs[0].operations[0].eligible[0].time = 0;
        assert_eq!(validate_instance(&zero).len(), 1);
    }

    #[test]
    fn json_round_trip_and_schema_errors() {
        let inst = generate_instance(&SetupParams::s1(3, 2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s1.json");
        save_instance(&path, &inst).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);

        let err = instance_from_json(r#"{"machine_count": 2, "horizon": 3}"#).unwrap_err();
        assert!(err.to_string().contains("jobs"), "{err}");
    }

    #[test]
    fn hand_written_asymmetric_file() {
        let text = r#"{
            "machine_count": 2,
            "horizon": 9,
            "jobs": [
                [[{"machine": 0, "time": 2}, {"machine": 1, "time": 4}], [{"machine": 1, "time": 1}]],
                [[{"machine": 1, "time": 3}]]
            ]
        }"#;
        let inst = instance_from_json(text).unwrap();
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.jobs.len(), 2);
        assert_eq!(inst.jobs[0].operations[0].time_on(0), Some(2));
        assert_eq!(inst.jobs[0].operations[0].time_on(1), Some(4));
        assert_eq!(inst.jobs[0].operations[1].time_on(1), Some(1));
        assert_eq!(inst.jobs[1].operations[0].time_on(1), Some(3));
        assert_eq!(inst.jobs[1].operations[0].time_on(0), None);
        assert_eq!(inst.horizon, 9);
    }
}
