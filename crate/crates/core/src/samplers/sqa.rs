use std::time::Instant;

use rand::Rng;

use crate::qubo::{bits_from_spins, to_ising, Bqm, IsingModel};

use super::{check_model, read_rng, SampleSet, Sampler, SamplerError, SamplerParams, SqaParams};

/// Path-integral Monte Carlo annealing of the transverse-field Ising model.
///
/// `P` Trotter replicas of the spin system sit on a ring; replica `p` sees
/// the classical energy `H/P` and is coupled ferromagnetically to replicas
/// `p +- 1` with strength `J_perp(Gamma)`. The transverse field `Gamma`
/// decreases linearly over the sweeps, which drives `J_perp` up and
/// freezes the replicas together. Every sweep is one Metropolis pass over
/// all (replica, spin) pairs at temperature `T` followed by one pass of
/// replica-wide flips. Each read returns the lowest-energy replica state
/// it passed through.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulatedQuantumAnnealing;

/// `J_perp = -(P T / 2) ln tanh(Gamma / (P T))`, capped to stay finite as
/// `Gamma -> 0`.
pub fn transverse_coupling(gamma: f64, slices: usize, temperature: f64) -> f64 {
    let pt = slices as f64 * temperature;
    let t = (gamma / pt).tanh();
    if t <= 0.0 {
        return 1e12;
    }
    (-(pt / 2.0) * t.ln()).min(1e12)
}

impl SimulatedQuantumAnnealing {
    /// Schedule scaled to the largest Ising coefficient of `bqm`.
    pub fn default_params(bqm: &Bqm) -> SqaParams {
        let scale = to_ising(bqm).max_abs_coefficient().max(1e-12);
        SqaParams { trotter_slices: 8, temperature: 0.05 * scale, gamma_initial: 3.0 * scale, gamma_final: 1e-3 * scale }
    }
}

struct SpinCsr {
    h: Vec<f64>,
    start: Vec<usize>,
    nbr: Vec<usize>,
    coef: Vec<f64>,
}

impl SpinCsr {
    fn new(ising: &IsingModel) -> Self {
        let n = ising.num_spins();
        let mut adj = vec![Vec::new(); n];
        for (&(a, b), &c) in &ising.j {
            adj[a].push((b, c));
            adj[b].push((a, c));
        }
        let mut start = Vec::with_capacity(n + 1);
        let (mut nbr, mut coef) = (Vec::new(), Vec::new());
        for list in adj {
            start.push(nbr.len());
            for (u, c) in list {
                nbr.push(u);
                coef.push(c);
            }
        }
        start.push(nbr.len());
        Self { h: ising.h.clone(), start, nbr, coef }
    }

    /// `h_i + sum_j J_ij s_j` for one replica.
    fn fields(&self, spins: &[i8]) -> Vec<f64> {
        (0..self.h.len())
            .map(|i| {
                self.h[i]
                    + (self.start[i]..self.start[i + 1]).map(|k| self.coef[k] * spins[self.nbr[k]] as f64).sum::<f64>()
            })
            .collect()
    }

    #[inline]
    fn flip(&self, spins: &mut [i8], fields: &mut [f64], i: usize) {
        spins[i] = -spins[i];
        let ds = 2.0 * spins[i] as f64;
        for k in self.start[i]..self.start[i + 1] {
            fields[self.nbr[k]] += ds * self.coef[k];
        }
    }
}

impl Sampler for SimulatedQuantumAnnealing {
    fn name(&self) -> &'static str {
        "sqa"
    }

    fn sample(&self, bqm: &Bqm, params: &SamplerParams) -> Result<SampleSet, SamplerError> {
        check_model(bqm, params)?;
        let started = Instant::now();
        let qp = params.sqa.unwrap_or_else(|| Self::default_params(bqm));
        let ising = to_ising(bqm);
        let csr = SpinCsr::new(&ising);
        let n = ising.num_spins();
        let slices = qp.trotter_slices;
        let inv_p = 1.0 / slices as f64;
        let inv_t = 1.0 / qp.temperature;

        let reads = (0..params.num_reads)
            .map(|r| {
                let mut rng = read_rng(params.seed, r);
                let init: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
                let mut spins: Vec<Vec<i8>> = vec![init; slices];
                let mut fields: Vec<Vec<f64>> = spins.iter().map(|s| csr.fields(s)).collect();
                let mut energy: Vec<f64> = vec![ising.energy(&spins[0]); slices];
                let (mut best_e, mut best) = (energy[0], spins[0].clone());

                for sweep in 0..params.sweeps {
                    let frac = if params.sweeps > 1 { sweep as f64 / (params.sweeps - 1) as f64 } else { 1.0 };
                    let gamma = qp.gamma_initial + (qp.gamma_final - qp.gamma_initial) * frac;
                    let j_perp = transverse_coupling(gamma, slices, qp.temperature);

                    for p in 0..slices {
                        let (up, down) = ((p + 1) % slices, (p + slices - 1) % slices);
                        for i in 0..n {
                            let s = spins[p][i] as f64;
                            let neighbors = (spins[up][i] + spins[down][i]) as f64;
                            let d = -2.0 * s * fields[p][i] * inv_p + 2.0 * j_perp * s * neighbors;
                            if d <= 0.0 || {
                                let u: f64 = rng.gen();
                                d * inv_t < 40.0 && u < (-d * inv_t).exp()
                            } {
                                energy[p] -= 2.0 * s * fields[p][i];
                                let (sp, fp) = (&mut spins[p], &mut fields[p]);
                                csr.flip(sp, fp, i);
                            }
                        }
                    }

                    // Replica-wide flips leave the inter-replica term unchanged.
                    for i in 0..n {
                        let d: f64 = (0..slices).map(|p| -2.0 * spins[p][i] as f64 * fields[p][i]).sum::<f64>() * inv_p;
                        if d <= 0.0 || {
                            let u: f64 = rng.gen();
                            d * inv_t < 40.0 && u < (-d * inv_t).exp()
                        } {
                            for p in 0..slices {
                                energy[p] -= 2.0 * spins[p][i] as f64 * fields[p][i];
                                let (sp, fp) = (&mut spins[p], &mut fields[p]);
                                csr.flip(sp, fp, i);
                            }
                        }
                    }

                    for p in 0..slices {
                        if energy[p] < best_e {
                            best_e = energy[p];
                            best.clone_from(&spins[p]);
                        }
                    }
                }
                bits_from_spins(&best)
            })
            .collect();
        Ok(SampleSet::from_reads(bqm, reads, self.name(), params, started))
    }
}

/// Final replicas of one read, for inspecting replica agreement.
#[cfg(test)]
pub(crate) fn final_replicas(bqm: &Bqm, params: &SamplerParams) -> Vec<Vec<i8>> {
    // Mirrors `sample` for a single read but returns every replica.
    let qp = params.sqa.unwrap();
    let ising = to_ising(bqm);
    let csr = SpinCsr::new(&ising);
    let n = ising.num_spins();
    let slices = qp.trotter_slices;
    let (inv_p, inv_t) = (1.0 / slices as f64, 1.0 / qp.temperature);
    let mut rng = read_rng(params.seed, 0);
    let init: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let mut spins = vec![init; slices];
    let mut fields: Vec<Vec<f64>> = spins.iter().map(|s| csr.fields(s)).collect();
    for sweep in 0..params.sweeps {
        let frac = sweep as f64 / (params.sweeps.max(2) - 1) as f64;
        let gamma = qp.gamma_initial + (qp.gamma_final - qp.gamma_initial) * frac;
        let j_perp = transverse_coupling(gamma, slices, qp.temperature);
        for p in 0..slices {
            let (up, down) = ((p + 1) % slices, (p + slices - 1) % slices);
            for i in 0..n {
                let s = spins[p][i] as f64;
                let d = -2.0 * s * fields[p][i] * inv_p + 2.0 * j_perp * s * (spins[up][i] + spins[down][i]) as f64;
                if d <= 0.0 || rng.gen::<f64>() < (-d * inv_t).exp() {
                    let (sp, fp) = (&mut spins[p], &mut fields[p]);
                    csr.flip(sp, fp, i);
                }
            }
        }
    }
    spins
}
