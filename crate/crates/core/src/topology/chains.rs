use std::collections::VecDeque;
use std::ops::Range;

use thiserror::Error;

use crate::qubo::{to_ising, Bqm, IsingModel};

use super::{Embedding, Topology};

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("variable {0} has no chain")]
    MissingChain(usize),
    #[error("no coupler joins the chains of variables {0} and {1}")]
    NoCoupler(usize, usize),
}

/// Physical Ising problem over the qubits of an embedding, indexed in chain
/// order (see [`Embedding::qubit_order`]).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedProblem {
    pub ising: IsingModel,
    pub qubits: Vec<usize>,
    /// Physical indices of each logical variable's chain.
    pub chains: Vec<Range<usize>>,
    pub chain_strength: f64,
}

impl EmbeddedProblem {
    /// Physical spins with every chain set to its logical value.
    pub fn spread(&self, logical: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.qubits.len()];
        for (v, r) in self.chains.iter().enumerate() {
            out[r.clone()].fill(logical[v]);
        }
        out
    }

    /// Fraction of chains whose qubits disagree.
    pub fn broken_fraction(&self, physical: &[bool]) -> f64 {
        if self.chains.is_empty() {
            return 0.0;
        }
        let broken = self.chains.iter().filter(|r| physical[r.start..r.end].iter().any(|&b| b != physical[r.start])).count();
        broken as f64 / self.chains.len() as f64
    }
}

/// `1.5 * max |h|, |J|` of the logical Ising problem.
pub fn default_chain_strength(bqm: &Bqm) -> f64 {
    1.5 * to_ising(bqm).max_abs_coefficient()
}

/// Spreads the Ising form of `bqm` over the chains: each `h` is split
/// equally across its chain, each logical `J` lands on one coupler between
/// the two chains, and every edge of a spanning tree inside a chain gets
/// `-chain_strength`. The offset is raised by `chain_strength` per tree edge
/// so that intact chains reproduce the logical energy exactly.
pub fn embed_bqm(bqm: &Bqm, embedding: &Embedding, topology: &Topology, chain_strength: f64) -> Result<EmbeddedProblem, ChainError> {
    let logical = to_ising(bqm);
    let n = bqm.num_variables();
    if let Some(v) = (0..n).find(|&v| v >= embedding.num_variables() || embedding.chain(v).is_empty()) {
        return Err(ChainError::MissingChain(v));
    }
    let qubits: Vec<usize> = (0..n).flat_map(|v| embedding.chain(v).iter().copied()).collect();
    let mut position = vec![usize::MAX; topology.num_nodes()];
    let mut owner = vec![usize::MAX; topology.num_nodes()];
    let mut chains = Vec::with_capacity(n);
    for v in 0..n {
        let start = chains.last().map_or(0, |r: &Range<usize>| r.end);
        for (k, &q) in embedding.chain(v).iter().enumerate() {
            position[q] = start + k;
            owner[q] = v;
        }
        chains.push(start..start + embedding.chain(v).len());
    }

    let mut ising = IsingModel { h: vec![0.0; qubits.len()], offset: logical.offset, ..Default::default() };
    for v in 0..n {
        let chain = embedding.chain(v);
        let share = logical.h[v] / chain.len() as f64;
        for &q in chain {
            ising.h[position[q]] += share;
        }
        // Breadth-first spanning tree of the chain.
        let mut seen = vec![chain[0]];
        let mut queue = VecDeque::from([chain[0]]);
        while let Some(q) = queue.pop_front() {
            for &r in topology.neighbors(q) {
                if owner[r] == v && !seen.contains(&r) {
                    seen.push(r);
                    queue.push_back(r);
                    ising.add_coupling(position[q], position[r], -chain_strength);
                    ising.offset += chain_strength;
                }
            }
        }
    }
    for (&(a, b), &j) in &logical.j {
        let coupler = embedding
            .chain(a)
            .iter()
            .find_map(|&qa| topology.neighbors(qa).iter().find(|&&qb| owner[qb] == b).map(|&qb| (qa, qb)))
            .ok_or(ChainError::NoCoupler(a, b))?;
        ising.add_coupling(position[coupler.0], position[coupler.1], j);
    }
    Ok(EmbeddedProblem { ising, qubits, chains, chain_strength })
}

/// Majority vote per chain. Exact ties start at 0 and are then set, one at
/// a time in variable order, to whichever value gives the lower logical
/// energy (0 when equal).
pub fn unembed(physical: &[bool], embedding: &Embedding, bqm: &Bqm) -> Vec<bool> {
    let mut logical = Vec::with_capacity(embedding.num_variables());
    let mut tied = Vec::new();
    let mut offset = 0;
    for (v, chain) in embedding.chains().iter().enumerate() {
        let ones = physical[offset..offset + chain.len()].iter().filter(|&&b| b).count();
        offset += chain.len();
        if 2 * ones == chain.len() {
            tied.push(v);
        }
        logical.push(2 * ones > chain.len());
    }
    if !tied.is_empty() {
        let adj = bqm.adjacency();
        for v in tied {
            let field = bqm.linear()[v] + adj[v].iter().filter(|(u, _)| logical[*u]).map(|(_, c)| c).sum::<f64>();
            logical[v] = field < 0.0;
        }
    }
    logical
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{from_ising, spins_from_bits};
    use crate::topology::{chimera, find_embedding};

    #[test]
    fn unit_chains_reproduce_the_logical_problem() {
        let bqm = Bqm::from_terms(vec![1.0, -2.0, 0.5], [((0, 1), 1.5), ((1, 2), -1.0)], 0.25);
        let topo = chimera(1, 1, 2).unwrap();
        let emb = Embedding::from_chains(vec![vec![0], vec![2], vec![1]]);
        let p = embed_bqm(&bqm, &emb, &topo, 3.0).unwrap();
        assert_eq!(p.ising, to_ising(&bqm));
        assert_eq!(p.qubits, vec![0, 2, 1]);
    }

    #[test]
    fn linear_term_splits_over_a_two_qubit_chain() {
        let bqm = Bqm::from_terms(vec![-4.0], [], 0.0);
        let topo = chimera(1, 1, 1).unwrap();
        let emb = Embedding::from_chains(vec![vec![0, 1]]);
        let p = embed_bqm(&bqm, &emb, &topo, 5.0).unwrap();
        let h = to_ising(&bqm).h[0];
        assert_eq!(p.ising.h, vec![h / 2.0, h / 2.0]);
        assert_eq!(p.ising.j.len(), 1);
        assert_eq!(p.ising.j[&(0, 1)], -5.0);
    }

    #[test]
    fn missing_chain_is_an_error() {
        let bqm = Bqm::new(2);
        let topo = chimera(1, 1, 1).unwrap();
        let emb = Embedding::from_chains(vec![vec![0]]);
        assert_eq!(embed_bqm(&bqm, &emb, &topo, 1.0), Err(ChainError::MissingChain(1)));
    }

    #[test]
    fn strong_chains_stay_intact_in_the_ground_state() {
        let bqm = Bqm::from_terms(vec![0.3, -0.7, 0.2], [((0, 1), 1.0), ((1, 2), 1.0), ((0, 2), 1.0)], 0.0);
        let topo = chimera(1, 1, 4).unwrap();
        let emb = Embedding::from_chains(vec![vec![0, 4], vec![1, 5], vec![2, 6]]);
        emb.validate(&bqm.interaction_edges(), &topo).unwrap();
        let total: f64 = to_ising(&bqm).j.values().map(|c| c.abs()).sum::<f64>() + to_ising(&bqm).h.iter().map(|c| c.abs()).sum::<f64>();
        let p = embed_bqm(&bqm, &emb, &topo, total + 1.0).unwrap();
        let m = p.qubits.len();
        assert_eq!(m, 6);
        let mut best = (f64::INFINITY, 0usize);
        for mask in 0..1usize << m {
            let bits: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
            let e = p.ising.energy(&spins_from_bits(&bits));
            if e < best.0 - 1e-12 {
                best = (e, mask);
            }
        }
        let bits: Vec<bool> = (0..m).map(|i| best.1 >> i & 1 == 1).collect();
        assert_eq!(p.broken_fraction(&bits), 0.0);
        let logical = unembed(&bits, &emb, &bqm);
        assert!((best.0 - bqm.energy(&logical).unwrap()).abs() < 1e-9);
        let (_, exact) = crate::oracle::exact_bqm_minimum(&bqm).unwrap();
        assert!((best.0 - exact).abs() < 1e-9);
    }

    #[test]
    fn intact_chains_match_logical_energy() {
        let bqm = Bqm::from_terms(vec![1.0, -1.0, 0.5, 0.0], [((0, 1), 2.0), ((1, 2), -1.0), ((0, 2), 0.5), ((2, 3), 1.0)], 1.0);
        let topo = chimera(2, 2, 2).unwrap();
        let emb = find_embedding(4, &bqm.interaction_edges(), &topo, 3, 50).unwrap();
        let p = embed_bqm(&bqm, &emb, &topo, 4.0).unwrap();
        let phys = from_ising(&p.ising);
        for mask in 0..16usize {
            let logical: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
            let spread = p.spread(&logical);
            assert!((phys.energy(&spread).unwrap() - bqm.energy(&logical).unwrap()).abs() < 1e-9);
            assert_eq!(unembed(&spread, &emb, &bqm), logical);
        }
    }

    #[test]
    fn majority_and_tie_resolution() {
        let emb = Embedding::from_chains(vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7]]);
        let bqm = Bqm::from_terms(vec![0.0, 0.0, -1.0], [], 0.0);
        let phys = [true, true, true, true, true, false, true, false];
        assert_eq!(unembed(&phys, &emb, &bqm), vec![true, true, true]);
        let bqm = Bqm::from_terms(vec![0.0, 0.0, 1.0], [], 0.0);
        assert_eq!(unembed(&phys, &emb, &bqm), vec![true, true, false]);
        let bqm = Bqm::from_terms(vec![0.0, 0.0, 0.0], [], 0.0);
        assert_eq!(unembed(&phys, &emb, &bqm)[2], false);
    }
}
