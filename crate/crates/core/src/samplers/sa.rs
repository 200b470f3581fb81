use std::time::Instant;

use rand::Rng;

use crate::qubo::Bqm;

use super::{check_model, random_bits, read_rng, LocalFields, SaParams, SampleSet, Sampler, SamplerError, SamplerParams};

/// Single-flip Metropolis annealing over a geometric inverse-temperature
/// schedule. Each read reports the lowest-energy state seen at a sweep
/// boundary.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulatedAnnealing;

/// `beta_min = ln 2 / dE_max`, `beta_max = ln 100 / dE_min`.
///
/// `dE_max` bounds the largest single-flip change. `dE_min` is the energy
/// resolution of the model: the smallest nonzero coefficient magnitude or
/// gap between distinct linear coefficients (the latter is where the
/// objective lives when constraint penalties dominate the linear part),
/// floored at `1e-4 * dE_max`.
pub fn auto_beta_range(bqm: &Bqm) -> SaParams {
    let max_delta = LocalFields::new(bqm).max_delta_bound().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * max_delta;
    let mut resolution = f64::INFINITY;
    for c in bqm.linear().iter().chain(bqm.quadratic().values()) {
        if c.abs() > tol {
            resolution = resolution.min(c.abs());
        }
    }
    let mut lin: Vec<f64> = bqm.linear().to_vec();
    lin.sort_by(f64::total_cmp);
    for w in lin.windows(2) {
        let gap = w[1] - w[0];
        if gap > tol {
            resolution = resolution.min(gap);
        }
    }
    if !resolution.is_finite() {
        resolution = max_delta;
    }
    let resolution = resolution.max(1e-4 * max_delta);
    let beta_min = 2f64.ln() / max_delta;
    let beta_max = (100f64.ln() / resolution).max(beta_min * 1.0001);
    SaParams { beta_min, beta_max }
}

pub(crate) fn geometric_schedule(beta_min: f64, beta_max: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![beta_max];
    }
    let ratio = (beta_max / beta_min).ln() / (sweeps - 1) as f64;
    (0..sweeps).map(|i| beta_min * (ratio * i as f64).exp()).collect()
}

impl Sampler for SimulatedAnnealing {
    fn name(&self) -> &'static str {
        "sa"
    }

    fn sample(&self, bqm: &Bqm, params: &SamplerParams) -> Result<SampleSet, SamplerError> {
        check_model(bqm, params)?;
        let started = Instant::now();
        let range = params.sa.unwrap_or_else(|| auto_beta_range(bqm));
        let schedule = geometric_schedule(range.beta_min, range.beta_max, params.sweeps);
        let lf = LocalFields::new(bqm);
        let n = lf.len();

        let reads = (0..params.num_reads)
            .map(|r| {
                let mut rng = read_rng(params.seed, r);
                let mut x = match (&params.initial_state, r) {
                    (Some(init), 0) => init.clone(),
                    _ => random_bits(&mut rng, n),
                };
                let mut fields = lf.fields(&x);
                let mut energy = bqm.energy_unchecked(&x);
                let mut best = x.clone();
                let mut best_energy = energy;
                for &beta in &schedule {
                    for v in 0..n {
                        let d = LocalFields::delta(&x, &fields, v);
                        let accept = d <= 0.0 || {
                            let u: f64 = rng.gen();
                            beta * d < 40.0 && u < (-beta * d).exp()
                        };
                        if accept {
                            lf.flip(&mut x, &mut fields, v);
                            energy += d;
                        }
                    }
                    if energy < best_energy {
                        best_energy = energy;
                        best.copy_from_slice(&x);
                    }
                }
                best
            })
            .collect();
        Ok(SampleSet::from_reads(bqm, reads, self.name(), params, started))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, SetupParams};
    use crate::oracle::exact_bqm_minimum;
    use crate::qubo::{build_bqm, build_variable_table, PenaltyWeights};

    #[test]
    fn independent_variables() {
        let bqm = Bqm::from_terms(vec![1.0, -1.0], [], 0.0);
        let set = SimulatedAnnealing.sample(&bqm, &SamplerParams::new(0, 1, 100)).unwrap();
        let best = set.best().unwrap();
        assert_eq!(best.bits, vec![false, true]);
        assert_eq!(best.energy, -1.0);
    }

    #[test]
    fn schedule_is_geometric() {
        let s = geometric_schedule(0.1, 10.0, 3);
        assert!((s[0] - 0.1).abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12 && (s[2] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn auto_range_resolves_objective_scale() {
        let inst = generate_instance(&SetupParams::s1(3, 2)).unwrap();
        let table = build_variable_table(&inst, 2).unwrap();
        let w = PenaltyWeights::default_for(9, 2);
        let r = auto_beta_range(&build_bqm(&inst, &table, &w));
        assert!((r.beta_max - 100f64.ln() / w.delta).abs() < 1e-6, "{r:?}");
        assert!(r.beta_min < 1.0);
    }

    #[test]
    fn finds_s1_n3_minimum() {
        let inst = generate_instance(&SetupParams::s1(3, 2)).unwrap();
        let table = build_variable_table(&inst, 2).unwrap();
        let bqm = build_bqm(&inst, &table, &PenaltyWeights::default_for(9, 2));
        let (_, exact) = exact_bqm_minimum(&bqm).unwrap();
        let hits = (0..10)
            .filter(|&seed| {
                let set = SimulatedAnnealing.sample(&bqm, &SamplerParams::new(seed, 10, 1000)).unwrap();
                (set.best_energy() - exact).abs() < 1e-9
            })
            .count();
        assert!(hits >= 9, "{hits}/10");
    }
}
