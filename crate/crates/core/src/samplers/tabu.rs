use std::time::Instant;

use rand::Rng;

use crate::qubo::Bqm;

use super::{check_model, random_bits, read_rng, LocalFields, SampleSet, Sampler, SamplerError, SamplerParams, TabuParams};

/// Steepest-descent single-flip search with a recency tabu list and
/// aspiration: a tabu flip is allowed when it beats the best energy seen in
/// the current read. Each restart begins from a fresh random state.
#[derive(Debug, Clone, Copy, Default)]
pub struct TabuSearch;

impl TabuSearch {
    pub fn default_params(n: usize) -> TabuParams {
        TabuParams { tenure: (n / 4).clamp(1, 20), restarts: 1 }
    }
}

impl Sampler for TabuSearch {
    fn name(&self) -> &'static str {
        "tabu"
    }

    fn sample(&self, bqm: &Bqm, params: &SamplerParams) -> Result<SampleSet, SamplerError> {
        check_model(bqm, params)?;
        let started = Instant::now();
        let lf = LocalFields::new(bqm);
        let n = lf.len();
        let tp = params.tabu.unwrap_or_else(|| Self::default_params(n));
        let tenure = tp.tenure.min(n.saturating_sub(1));

        let reads = (0..params.num_reads)
            .map(|r| {
                let mut rng = read_rng(params.seed, r);
                let mut best: Option<(Vec<bool>, f64)> = None;
                for restart in 0..tp.restarts {
                    let mut x = match (&params.initial_state, r, restart) {
                        (Some(init), 0, 0) => init.clone(),
                        _ => random_bits(&mut rng, n),
                    };
                    let mut fields = lf.fields(&x);
                    let mut energy = bqm.energy_unchecked(&x);
                    let mut run_best = energy;
                    let mut run_best_x = x.clone();
                    let mut tabu_until = vec![0usize; n];
                    let eps = 1e-12 * (1.0 + energy.abs());
                    for it in 0..params.sweeps {
                        let mut chosen = None;
                        let mut chosen_delta = f64::INFINITY;
                        let mut ties = 0u32;
                        for v in 0..n {
                            let d = LocalFields::delta(&x, &fields, v);
                            let allowed = tabu_until[v] <= it || energy + d < run_best - eps;
                            if !allowed {
                                continue;
                            }
                            if d < chosen_delta - 1e-15 {
                                chosen = Some(v);
                                chosen_delta = d;
                                ties = 1;
                            } else if d <= chosen_delta + 1e-15 {
                                ties += 1;
                                if rng.gen_range(0..ties) == 0 {
                                    chosen = Some(v);
                                }
                            }
                        }
                        let Some(v) = chosen else { break };
                        energy += LocalFields::delta(&x, &fields, v);
                        lf.flip(&mut x, &mut fields, v);
                        tabu_until[v] = it + tenure + 1;
                        if energy < run_best - eps {
                            run_best = energy;
                            run_best_x.copy_from_slice(&x);
                        }
                    }
                    if best.as_ref().map_or(true, |(_, e)| run_best < *e) {
                        best = Some((run_best_x, run_best));
                    }
                }
                best.expect("at least one restart").0
            })
            .collect();
        Ok(SampleSet::from_reads(bqm, reads, self.name(), params, started))
    }
}
