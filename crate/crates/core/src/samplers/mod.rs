//! Classical minimizers over a [`Bqm`]: simulated annealing, tabu search,
//! and path-integral simulated quantum annealing (the stand-in for an
//! annealing QPU).
//!
//! Every sampler is a pure function of `(bqm, params)`. Read `r` draws its
//! random numbers from a ChaCha8 stream keyed by `(seed, r)`, so sample sets
//! are reproducible across runs and platforms.

mod sa;
mod sqa;
mod tabu;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubo::Bqm;
use crate::registry::Registry;

pub use sa::{auto_beta_range, SimulatedAnnealing};
pub use sqa::{transverse_coupling, SimulatedQuantumAnnealing};
pub use tabu::TabuSearch;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("model has no variables")]
    EmptyModel,
    #[error("invalid sampler parameters: {0}")]
    InvalidParams(String),
    #[error("unknown sampler '{0}'")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub beta_min: f64,
    pub beta_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabuParams {
    pub tenure: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqaParams {
    pub trotter_slices: usize,
    pub temperature: f64,
    pub gamma_initial: f64,
    pub gamma_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub seed: u64,
    pub num_reads: usize,
    /// Sweeps per read (SA, SQA) or iterations per restart (tabu).
    pub sweeps: usize,
    pub sa: Option<SaParams>,
    pub tabu: Option<TabuParams>,
    pub sqa: Option<SqaParams>,
    /// Starting state of the first read (SA, tabu); random when absent.
    pub initial_state: Option<Vec<bool>>,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self { seed: 0, num_reads: 10, sweeps: 1000, sa: None, tabu: None, sqa: None, initial_state: None }
    }
}

impl SamplerParams {
    pub fn new(seed: u64, num_reads: usize, sweeps: usize) -> Self {
        Self { seed, num_reads, sweeps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: &str| Err(SamplerError::InvalidParams(m.to_string()));
        if self.num_reads < 1 {
            return bad("num_reads must be at least 1");
        }
        if self.sweeps < 1 {
            return bad("sweeps must be at least 1");
        }
        if let Some(sa) = self.sa {
            if !(sa.beta_min > 0.0 && sa.beta_min < sa.beta_max) {
                return bad("require 0 < beta_min < beta_max");
            }
        }
        if let Some(t) = self.tabu {
            if t.restarts < 1 {
                return bad("tabu restarts must be at least 1");
            }
        }
        if let Some(q) = self.sqa {
            if q.trotter_slices < 2 {
                return bad("at least 2 Trotter slices are required");
            }
            if !(q.temperature > 0.0) {
                return bad("temperature must be positive");
            }
            if !(q.gamma_final >= 0.0 && q.gamma_final < q.gamma_initial) {
                return bad("require 0 <= gamma_final < gamma_initial");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    /// Ascending by energy.
    pub samples: Vec<Sample>,
    pub sampler: &'static str,
    pub params: SamplerParams,
    pub elapsed: Duration,
}

impl SampleSet {
    /// Recomputes each energy from `bqm` and sorts ascending (stable).
    pub fn from_reads(bqm: &Bqm, reads: Vec<Vec<bool>>, sampler: &'static str, params: &SamplerParams, started: Instant) -> Self {
        let mut samples: Vec<Sample> = reads
            .into_iter()
            .map(|bits| {
                let energy = bqm.energy_unchecked(&bits);
                Sample { bits, energy }
            })
            .collect();
        samples.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Self { samples, sampler, params: params.clone(), elapsed: started.elapsed() }
    }

    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn best_energy(&self) -> f64 {
        self.best().map_or(f64::INFINITY, |s| s.energy)
    }
}

/// Same samples in the same order; timing is ignored.
impl PartialEq for SampleSet {
    fn eq(&self, other: &Self) -> bool {
        self.samples == other.samples && self.sampler == other.sampler && self.params == other.params
    }
}

pub trait Sampler: Send + Sync {
    fn name(&self) -> &'static str;

    fn sample(&self, bqm: &Bqm, params: &SamplerParams) -> Result<SampleSet, SamplerError>;
}

/// `sa`, `tabu` and `sqa`.
pub fn registry() -> Registry<dyn Sampler> {
    let mut reg: Registry<dyn Sampler> = Registry::new();
    reg.register("sa", Arc::new(SimulatedAnnealing));
    reg.register("tabu", Arc::new(TabuSearch));
    reg.register("sqa", Arc::new(SimulatedQuantumAnnealing));
    reg
}

pub(crate) fn read_rng(seed: u64, read: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read as u64);
    rng
}

pub(crate) fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen::<bool>()).collect()
}

pub(crate) fn check_model(bqm: &Bqm, params: &SamplerParams) -> Result<(), SamplerError> {
    if bqm.num_variables() == 0 {
        return Err(SamplerError::EmptyModel);
    }
    params.validate()?;
    if let Some(init) = &params.initial_state {
        if init.len() != bqm.num_variables() {
            return Err(SamplerError::InvalidParams(format!(
                "initial state has {} entries, model has {}",
                init.len(),
                bqm.num_variables()
            )));
        }
    }
    Ok(())
}

/// Compressed adjacency with incrementally maintained local fields
/// `field_v = linear_v + sum_u quad_vu x_u`; flipping `v` changes the energy
/// by `field_v` when turning it on and `-field_v` when turning it off.
pub(crate) struct LocalFields {
    linear: Vec<f64>,
    start: Vec<usize>,
    nbr: Vec<usize>,
    coef: Vec<f64>,
}

impl LocalFields {
    pub(crate) fn new(bqm: &Bqm) -> Self {
        let n = bqm.num_variables();
        let adj = bqm.adjacency();
        let mut start = Vec::with_capacity(n + 1);
        let mut nbr = Vec::new();
        let mut coef = Vec::new();
        for list in &adj {
            start.push(nbr.len());
            for &(u, c) in list {
                nbr.push(u);
                coef.push(c);
            }
        }
        start.push(nbr.len());
        Self { linear: bqm.linear().to_vec(), start, nbr, coef }
    }

    pub(crate) fn len(&self) -> usize {
        self.linear.len()
    }

    pub(crate) fn fields(&self, x: &[bool]) -> Vec<f64> {
        let mut f = self.linear.clone();
        for v in 0..self.len() {
            if x[v] {
                for k in self.start[v]..self.start[v + 1] {
                    f[self.nbr[k]] += self.coef[k];
                }
            }
        }
        f
    }

    #[inline]
    pub(crate) fn delta(x: &[bool], fields: &[f64], v: usize) -> f64 {
        if x[v] {
            -fields[v]
        } else {
            fields[v]
        }
    }

    #[inline]
    pub(crate) fn flip(&self, x: &mut [bool], fields: &mut [f64], v: usize) {
        x[v] = !x[v];
        let sign = if x[v] { 1.0 } else { -1.0 };
        for k in self.start[v]..self.start[v + 1] {
            fields[self.nbr[k]] += sign * self.coef[k];
        }
    }

    /// Upper bound on `|flip delta|` per variable.
    pub(crate) fn max_delta_bound(&self) -> f64 {
        (0..self.len())
            .map(|v| self.linear[v].abs() + self.coef[self.start[v]..self.start[v + 1]].iter().map(|c| c.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_bqm(n: usize, seed: u64) -> Bqm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bqm = Bqm::new(n);
        for v in 0..n {
            bqm.add_linear(v, rng.gen_range(-1.0..1.0));
            for u in v + 1..n {
                if rng.gen_bool(0.2) {
                    bqm.add_quadratic(v, u, rng.gen_range(-1.0..1.0));
                }
            }
        }
        bqm
    }

    #[test]
    fn incremental_deltas_match_recomputation() {
        let bqm = random_bqm(40, 3);
        let lf = LocalFields::new(&bqm);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut x = random_bits(&mut rng, 40);
        let mut fields = lf.fields(&x);
        let mut e = bqm.energy(&x).unwrap();
        for _ in 0..1000 {
            let v = rng.gen_range(0..40);
            e += LocalFields::delta(&x, &fields, v);
            lf.flip(&mut x, &mut fields, v);
            assert!((e - bqm.energy(&x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn params_validation() {
        let mut p = SamplerParams::new(0, 1, 10);
        assert!(p.validate().is_ok());
        p.sa = Some(SaParams { beta_min: 2.0, beta_max: 1.0 });
        assert!(p.validate().is_err());
        p.sa = None;
        p.sqa = Some(SqaParams { trotter_slices: 1, temperature: 0.1, gamma_initial: 1.0, gamma_final: 0.1 });
        assert!(p.validate().is_err());
        p.sqa = Some(SqaParams { trotter_slices: 4, temperature: 0.1, gamma_initial: 1.0, gamma_final: 1.0 });
        assert!(p.validate().is_err());
    }

    #[test]
    fn registry_has_three_samplers() {
        let reg = registry();
        assert_eq!(reg.names(), vec!["sa", "tabu", "sqa"]);
        for name in reg.names() {
            let s = reg.get(name).unwrap();
            assert_eq!(s.name(), name);
            assert_eq!(s.sample(&Bqm::new(0), &SamplerParams::default()), Err(SamplerError::EmptyModel));
        }
    }

    #[test]
    fn every_sampler_is_reproducible_and_energy_exact() {
        let bqm = random_bqm(30, 11);
        let params = SamplerParams::new(5, 4, 50);
        for name in registry().names() {
            let s = registry().get(name).unwrap();
            let a = s.sample(&bqm, &params).unwrap();
            let b = s.sample(&bqm, &params).unwrap();
            assert_eq!(a, b, "{name}");
            assert!(a.samples.windows(2).all(|w| w[0].energy <= w[1].energy));
            for smp in &a.samples {
                assert!((smp.energy - bqm.energy(&smp.bits).unwrap()).abs() < 1e-9);
            }
            assert_eq!(a.best_energy(), a.samples.iter().map(|s| s.energy).fold(f64::INFINITY, f64::min));
        }
    }
}
