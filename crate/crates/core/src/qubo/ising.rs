//! Spin form of a model under `x = (1 + s) / 2`.

use std::collections::BTreeMap;

use super::Bqm;

/// `offset + sum_i h_i s_i + sum_{a<b} J_ab s_a s_b` over `s in {-1, +1}`.
/// The offset carries the constant of the change of variables, so a QUBO
/// and its Ising form give equal energies on corresponding assignments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IsingModel {
    pub h: Vec<f64>,
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn num_spins(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        let mut e = self.offset;
        for (h, &s) in self.h.iter().zip(spins) {
            e += h * s as f64;
        }
        for (&(a, b), c) in &self.j {
            e += c * (spins[a] * spins[b]) as f64;
        }
        e
    }

    /// Largest absolute field or coupling.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.h.iter().chain(self.j.values()).fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn add_coupling(&mut self, a: usize, b: usize, c: f64) {
        let key = if a < b { (a, b) } else { (b, a) };
        *self.j.entry(key).or_insert(0.0) += c;
    }
}

pub fn to_ising(bqm: &Bqm) -> IsingModel {
    let mut h: Vec<f64> = bqm.linear().iter().map(|a| a / 2.0).collect();
    let mut offset = bqm.offset() + bqm.linear().iter().sum::<f64>() / 2.0;
    let mut j = BTreeMap::new();
    for (&(a, b), &q) in bqm.quadratic() {
        let quarter = q / 4.0;
        j.insert((a, b), quarter);
        h[a] += quarter;
        h[b] += quarter;
        offset += quarter;
    }
    IsingModel { h, j, offset }
}

pub fn from_ising(ising: &IsingModel) -> Bqm {
    let mut bqm = Bqm::new(ising.num_spins());
    let mut offset = ising.offset;
    for (v, &h) in ising.h.iter().enumerate() {
        bqm.add_linear(v, 2.0 * h);
        offset -= h;
    }
    for (&(a, b), &c) in &ising.j {
        bqm.add_quadratic(a, b, 4.0 * c);
        bqm.add_linear(a, -2.0 * c);
        bqm.add_linear(b, -2.0 * c);
        offset += c;
    }
    bqm.add_offset(offset);
    bqm
}

pub fn spins_from_bits(bits: &[bool]) -> Vec<i8> {
    bits.iter().map(|&x| if x { 1 } else { -1 }).collect()
}

pub fn bits_from_spins(spins: &[i8]) -> Vec<bool> {
    spins.iter().map(|&s| s > 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bqm(n: usize, seed: u64) -> Bqm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bqm = Bqm::new(n);
        for v in 0..n {
            bqm.add_linear(v, rng.gen_range(-2.0..2.0));
            for w in v + 1..n {
                if rng.gen_bool(0.5) {
                    bqm.add_quadratic(v, w, rng.gen_range(-2.0..2.0));
                }
            }
        }
        bqm.add_offset(rng.gen_range(-1.0..1.0));
        bqm
    }

    fn bits(mask: u32, n: usize) -> Vec<bool> {
        (0..n).map(|i| mask >> i & 1 == 1).collect()
    }

    #[test]
    fn single_variable_substitution() {
        let ising = to_ising(&Bqm::from_terms(vec![3.0], [], 0.0));
        assert_eq!(ising.h, vec![1.5]);
        assert_eq!(ising.offset, 1.5);
    }

    #[test]
    fn zero_model_stays_zero() {
        let ising = to_ising(&Bqm::new(3));
        assert_eq!(ising.h, vec![0.0; 3]);
        assert!(ising.j.is_empty());
        assert_eq!(ising.offset, 0.0);
    }

    #[test]
    fn exhaustive_energy_equality() {
        for seed in 0..5 {
            let bqm = random_bqm(10, seed);
            let ising = to_ising(&bqm);
            let back = from_ising(&ising);
            for mask in 0..1u32 << 10 {
                let x = bits(mask, 10);
                let e = bqm.energy(&x).unwrap();
                assert!((ising.energy(&spins_from_bits(&x)) - e).abs() < 1e-9);
                assert!((back.energy(&x).unwrap() - e).abs() < 1e-9);
            }
        }
    }
}
