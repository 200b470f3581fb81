use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Topology;

/// Chain of physical qubits for every logical variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    chains: Vec<Vec<usize>>,
}

impl Embedding {
    /// Chains are stored sorted; validity is not checked here (see [`Embedding::validate`]).
    pub fn from_chains(mut chains: Vec<Vec<usize>>) -> Self {
        for c in &mut chains {
            c.sort_unstable();
            c.dedup();
        }
        Self { chains }
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn chain(&self, v: usize) -> &[usize] {
        &self.chains[v]
    }

    pub fn num_variables(&self) -> usize {
        self.chains.len()
    }

    /// `n_e`: total number of qubits used.
    pub fn qubit_count(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Qubits in chain order: all of chain 0, then chain 1, and so on. Physical
    /// samples are indexed this way.
    pub fn qubit_order(&self) -> Vec<usize> {
        self.chains.iter().flatten().copied().collect()
    }

    /// Checks that chains are nonempty, disjoint and connected in `topology`,
    /// and that every logical edge is realized by a physical coupler.
    pub fn validate(&self, edges: &[(usize, usize)], topology: &Topology) -> Result<(), EmbeddingFailure> {
        let fail = |v: usize, reason: String| EmbeddingFailure { variable: Some(v), free_qubits: 0, reason };
        let mut owner = vec![usize::MAX; topology.num_nodes()];
        for (v, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(fail(v, "empty chain".into()));
            }
            for &q in chain {
                if q >= topology.num_nodes() {
                    return Err(fail(v, format!("qubit {q} is not in the topology")));
                }
                if owner[q] != usize::MAX {
                    return Err(fail(v, format!("qubit {q} is shared with variable {}", owner[q])));
                }
                owner[q] = v;
            }
            let mut seen = vec![chain[0]];
            let mut queue = VecDeque::from([chain[0]]);
            while let Some(q) = queue.pop_front() {
                for &r in topology.neighbors(q) {
                    if chain.binary_search(&r).is_ok() && !seen.contains(&r) {
                        seen.push(r);
                        queue.push_back(r);
                    }
                }
            }
            if seen.len() != chain.len() {
                return Err(fail(v, "chain is not connected".into()));
            }
        }
        for &(a, b) in edges {
            if a >= self.chains.len() || b >= self.chains.len() {
                return Err(fail(a.max(b), "logical edge references a variable without a chain".into()));
            }
            let joined = self.chains[a].iter().any(|&q| topology.neighbors(q).iter().any(|&r| owner[r] == b));
            if !joined {
                return Err(fail(a, format!("no coupler between the chains of {a} and {b}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingFailure {
    /// First variable that could not be given a valid chain.
    pub variable: Option<usize>,
    pub free_qubits: usize,
    pub reason: String,
}

impl fmt::Display for EmbeddingFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variable {
            Some(v) => write!(f, "no embedding: variable {v}: {} ({} qubits free)", self.reason, self.free_qubits),
            None => write!(f, "no embedding: {} ({} qubits free)", self.reason, self.free_qubits),
        }
    }
}

impl std::error::Error for EmbeddingFailure {}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Router<'a> {
    topo: &'a Topology,
    adj: Vec<Vec<usize>>,
    chains: Vec<Vec<usize>>,
    usage: Vec<u32>,
    /// Accumulated congestion of qubits that stayed shared after a pass.
    history: Vec<f64>,
    rng: ChaCha8Rng,
}

impl<'a> Router<'a> {
    fn weight(&self, q: usize, penalty: f64) -> f64 {
        let present = match self.usage[q] {
            0 => {
                // Free qubits next to used ones cost a little more, which keeps
                // room around existing chains.
                let nb = self.topo.neighbors(q);
                1.0 + nb.iter().filter(|&&r| self.usage[r] > 0).count() as f64 / nb.len().max(1) as f64
            }
            u => penalty.powi(u as i32).min(1e15),
        };
        (1.0 + self.history[q]) * present
    }

    fn release(&mut self, v: usize) -> Vec<usize> {
        let old = std::mem::take(&mut self.chains[v]);
        for &q in &old {
            self.usage[q] -= 1;
        }
        old
    }

    fn assign(&mut self, v: usize, chain: Vec<usize>) {
        for &q in &chain {
            self.usage[q] += 1;
        }
        self.chains[v] = chain;
    }

    /// Node-weighted shortest paths from the chain of `u`; `dist` counts the
    /// weight of every node on the path outside the source chain.
    fn dijkstra(&self, source: &[usize], weights: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let n = self.topo.num_nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for &s in source {
            dist[s] = 0.0;
            heap.push(Entry(0.0, s));
        }
        while let Some(Entry(d, q)) = heap.pop() {
            if d > dist[q] {
                continue;
            }
            for &r in self.topo.neighbors(q) {
                let nd = d + weights[r];
                if nd < dist[r] {
                    dist[r] = nd;
                    parent[r] = q;
                    heap.push(Entry(nd, r));
                }
            }
        }
        (dist, parent)
    }

    /// Cheapest path from `chain` to a `target` node; returns the nodes
    /// outside `chain`, target included.
    fn path_to(&self, chain: &[usize], target: &[bool], weights: &[f64]) -> Option<Vec<usize>> {
        let n = self.topo.num_nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for &s in chain {
            dist[s] = 0.0;
            heap.push(Entry(0.0, s));
        }
        while let Some(Entry(d, q)) = heap.pop() {
            if d > dist[q] {
                continue;
            }
            if target[q] && d > 0.0 {
                let mut path = vec![q];
                let mut p = parent[q];
                while dist[p] > 0.0 {
                    path.push(p);
                    p = parent[p];
                }
                return Some(path);
            }
            for &r in self.topo.neighbors(q) {
                let nd = d + weights[r];
                if nd < dist[r] {
                    dist[r] = nd;
                    parent[r] = q;
                    heap.push(Entry(nd, r));
                }
            }
        }
        None
    }

    fn least_used_qubit(&mut self) -> usize {
        let min = *self.usage.iter().min().expect("nonempty topology");
        let candidates: Vec<usize> = (0..self.usage.len()).filter(|&q| self.usage[q] == min).collect();
        *candidates.choose(&mut self.rng).unwrap()
    }

    /// Builds a chain for `v` (which must currently be released): a root
    /// qubit minimizing the summed path cost to every placed neighbor, joined
    /// to each neighbor chain along its shortest path.
    fn route(&mut self, v: usize, penalty: f64, fixed_root: Option<usize>) -> Vec<usize> {
        let placed: Vec<usize> = self.adj[v].iter().copied().filter(|&u| !self.chains[u].is_empty()).collect();
        if placed.is_empty() {
            return vec![self.least_used_qubit()];
        }
        let n = self.topo.num_nodes();
        let weights: Vec<f64> = (0..n).map(|q| self.weight(q, penalty)).collect();
        let mut total: Vec<f64> = weights.clone();
        let mut dists = Vec::with_capacity(placed.len());
        for &u in &placed {
            let (dist, _) = self.dijkstra(&self.chains[u], &weights);
            for q in 0..n {
                total[q] += if dist[q] == 0.0 { 0.0 } else { dist[q] - weights[q] };
            }
            dists.push(dist);
        }
        let best = total.iter().copied().fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return vec![self.least_used_qubit()];
        }
        let tol = 1e-9 * best.abs().max(1.0);
        let roots: Vec<usize> = (0..n).filter(|&q| total[q] <= best + tol).collect();
        let root = fixed_root.unwrap_or_else(|| *roots.choose(&mut self.rng).unwrap());
        // Join neighbor chains nearest-first, each along a shortest path from
        // anywhere on the chain built so far.
        let mut order: Vec<(f64, usize)> = placed.iter().zip(&dists).map(|(&u, d)| (d[root], u)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut chain = vec![root];
        let mut in_chain = vec![false; n];
        in_chain[root] = true;
        let mut target = vec![false; n];
        for (_, u) in order {
            let source = &self.chains[u];
            for &q in source {
                for &r in self.topo.neighbors(q) {
                    target[r] = true;
                }
            }
            for &q in source {
                target[q] = false;
            }
            if !chain.iter().any(|&q| target[q]) {
                if let Some(path) = self.path_to(&chain, &target, &weights) {
                    for q in path {
                        if !in_chain[q] {
                            in_chain[q] = true;
                            chain.push(q);
                        }
                    }
                }
            }
            for &q in source {
                for &r in self.topo.neighbors(q) {
                    target[r] = false;
                }
            }
        }
        chain.sort_unstable();
        chain
    }

    fn overlapping(&self, v: usize) -> bool {
        self.chains[v].iter().any(|&q| self.usage[q] > 1)
    }

    fn has_overlap(&self) -> bool {
        self.usage.iter().any(|&u| u > 1)
    }
}

/// Negotiation passes per try used by the solvers.
pub const DEFAULT_EMBEDDING_EFFORT: usize = 400;

pub const DEFAULT_EMBEDDING_TRIES: usize = 3;
const INITIAL_PENALTY: f64 = 2.0;
const PENALTY_GROWTH: f64 = 1.02;

/// All-pairs hop distances, or `None` when the table would be too large.
fn hop_distances(topology: &Topology) -> Option<Vec<Vec<u16>>> {
    let n = topology.num_nodes();
    if n > 4096 {
        return None;
    }
    let mut all = Vec::with_capacity(n);
    for s in 0..n {
        let mut d = vec![u16::MAX; n];
        d[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(q) = queue.pop_front() {
            for &r in topology.neighbors(q) {
                if d[r] == u16::MAX {
                    d[r] = d[q] + 1;
                    queue.push_back(r);
                }
            }
        }
        all.push(d);
    }
    Some(all)
}

/// One distinct qubit per variable, annealed to minimize the summed excess
/// hop distance `d - 1` over logical edges. Starts from a greedy placement
/// in `order`.
fn place(adj: &[Vec<usize>], topology: &Topology, order: &[usize], rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let dist = hop_distances(topology)?;
    let n = topology.num_nodes();
    let nv = adj.len();
    let d = |a: usize, b: usize| -> f64 {
        match dist[a][b] {
            u16::MAX => 1e6,
            h => h.saturating_sub(1) as f64,
        }
    };
    let mut pos = vec![usize::MAX; nv];
    let mut occupant = vec![usize::MAX; n];
    for &v in order {
        let placed: Vec<usize> = adj[v].iter().filter(|&&u| pos[u] != usize::MAX).map(|&u| pos[u]).collect();
        let free: Vec<usize> = (0..n).filter(|&q| occupant[q] == usize::MAX).collect();
        let q = if placed.is_empty() {
            *free.choose(rng)?
        } else {
            let cost = |q: usize| placed.iter().map(|&p| d(p, q)).sum::<f64>();
            let best = free.iter().map(|&q| cost(q)).fold(f64::INFINITY, f64::min);
            let ties: Vec<usize> = free.into_iter().filter(|&q| cost(q) <= best).collect();
            *ties.choose(rng)?
        };
        pos[v] = q;
        occupant[q] = v;
    }

    let local = |v: usize, at: usize, pos: &[usize], skip: usize| -> f64 {
        adj[v].iter().filter(|&&u| u != skip).map(|&u| d(at, pos[u])).sum()
    };
    let iters = 4000 * nv;
    let (t0, t1): (f64, f64) = (2.0, 0.05);
    for it in 0..iters {
        let temp = t0 * (t1 / t0).powf(it as f64 / iters as f64);
        let v = rng.gen_range(0..nv);
        let target = if !adj[v].is_empty() && rng.gen_bool(0.9) {
            let u = adj[v][rng.gen_range(0..adj[v].len())];
            let mut q = pos[u];
            for _ in 0..rng.gen_range(1..=2) {
                let nb = topology.neighbors(q);
                if nb.is_empty() {
                    break;
                }
                q = nb[rng.gen_range(0..nb.len())];
            }
            q
        } else {
            rng.gen_range(0..n)
        };
        if target == pos[v] {
            continue;
        }
        let w = occupant[target];
        let from = pos[v];
        let mut delta = local(v, target, &pos, w) - local(v, from, &pos, w);
        if w != usize::MAX {
            delta += local(w, from, &pos, v) - local(w, target, &pos, v);
        }
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
            pos[v] = target;
            occupant[target] = v;
            occupant[from] = w;
            if w != usize::MAX {
                pos[w] = from;
            }
        }
    }
    Some(pos)
}

/// Heuristic minor embedding of the graph `(0..num_variables, edges)`.
///
/// Each try anneals a one-qubit-per-variable placement that keeps logical
/// neighbors close, then grows every chain from its placed root along
/// node-weighted shortest paths to the neighboring chains. Qubits claimed
/// by other chains cost `penalty^usage` plus a congestion history, and up to
/// `effort` negotiation passes reroute the overlapping chains (and their
/// neighbors) under a slowly rising penalty until no qubit is shared. A
/// final pass shortens chains where a disjoint reroute exists. Up to
/// [`DEFAULT_EMBEDDING_TRIES`] tries with derived seeds are made before
/// reporting failure.
pub fn find_embedding(
    num_variables: usize,
    edges: &[(usize, usize)],
    topology: &Topology,
    seed: u64,
    effort: usize,
) -> Result<Embedding, EmbeddingFailure> {
    find_embedding_with(num_variables, edges, topology, &EmbedOptions { seed, effort, ..EmbedOptions::default() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedOptions {
    pub seed: u64,
    /// Negotiation passes per try.
    pub effort: usize,
    pub tries: usize,
    /// No new try starts and no pass runs after this instant.
    pub deadline: Option<Instant>,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self { seed: 0, effort: DEFAULT_EMBEDDING_EFFORT, tries: DEFAULT_EMBEDDING_TRIES, deadline: None }
    }
}

/// [`find_embedding`] with an explicit try count and deadline.
pub fn find_embedding_with(
    num_variables: usize,
    edges: &[(usize, usize)],
    topology: &Topology,
    opts: &EmbedOptions,
) -> Result<Embedding, EmbeddingFailure> {
    let mut last = None;
    for t in 0..opts.tries.max(1) as u64 {
        if t > 0 && opts.deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let seed = opts.seed.wrapping_add(t.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        match attempt(num_variables, edges, topology, seed, opts.effort, opts.deadline) {
            Ok(e) => return Ok(e),
            Err(f) => last = Some(f),
        }
    }
    Err(last.expect("at least one try"))
}

fn attempt(
    num_variables: usize,
    edges: &[(usize, usize)],
    topology: &Topology,
    seed: u64,
    effort: usize,
    deadline: Option<Instant>,
) -> Result<Embedding, EmbeddingFailure> {
    let n = topology.num_nodes();
    if num_variables == 0 {
        return Ok(Embedding::from_chains(Vec::new()));
    }
    if num_variables > n {
        return Err(EmbeddingFailure {
            variable: Some(n),
            free_qubits: 0,
            reason: format!("{num_variables} variables exceed the {n} available qubits"),
        });
    }
    let mut adj = vec![Vec::new(); num_variables];
    for &(a, b) in edges {
        if a != b && !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut router =
        Router { topo: topology, adj, chains: vec![Vec::new(); num_variables], usage: vec![0; n], history: vec![0.0; n], rng: ChaCha8Rng::seed_from_u64(seed) };

    // Breadth-first placement keeps each new variable next to placed neighbors.
    let mut order = Vec::with_capacity(num_variables);
    let mut visited = vec![false; num_variables];
    let mut starts: Vec<usize> = (0..num_variables).collect();
    starts.shuffle(&mut router.rng);
    for s in starts {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = router.adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.shuffle(&mut router.rng);
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    match place(&router.adj, topology, &order, &mut router.rng) {
        Some(pos) => {
            for v in 0..num_variables {
                router.assign(v, vec![pos[v]]);
            }
            for &v in &order {
                router.release(v);
                let chain = router.route(v, INITIAL_PENALTY, Some(pos[v]));
                router.assign(v, chain);
            }
        }
        None => {
            for &v in &order {
                let chain = router.route(v, INITIAL_PENALTY, None);
                router.assign(v, chain);
            }
        }
    }

    let effort = effort.max(1);
    let mut pass = 0;
    while router.has_overlap() && pass < effort && !deadline.is_some_and(|d| Instant::now() >= d) {
        pass += 1;
        let penalty = (INITIAL_PENALTY * PENALTY_GROWTH.powi(pass as i32)).min(n as f64);
        let mut vars: Vec<usize> = (0..num_variables).collect();
        vars.shuffle(&mut router.rng);
        vars.sort_by_key(|&v| (!router.overlapping(v), std::cmp::Reverse(router.chains[v].len())));
        // Only overlapping chains and their logical neighbors are rerouted.
        let mut rip = vec![false; num_variables];
        for v in 0..num_variables {
            if router.overlapping(v) {
                rip[v] = true;
                for &u in &router.adj[v] {
                    rip[u] = true;
                }
            }
        }
        for v in vars {
            if !rip[v] {
                continue;
            }
            router.release(v);
            let chain = router.route(v, penalty, None);
            router.assign(v, chain);
        }
        for q in 0..n {
            if router.usage[q] > 1 {
                router.history[q] += (router.usage[q] - 1) as f64;
            }
        }
    }

    if router.has_overlap() {
        let variable = (0..num_variables).find(|&v| router.overlapping(v));
        let free = router.usage.iter().filter(|&&u| u == 0).count();
        return Err(EmbeddingFailure {
            variable,
            free_qubits: free,
            reason: format!("chains still share qubits after {pass} refinement passes"),
        });
    }

    // Shorten the longest chains where an overlap-free reroute exists.
    let mut vars: Vec<usize> = (0..num_variables).filter(|&v| router.chains[v].len() > 1).collect();
    vars.sort_by_key(|&v| std::cmp::Reverse(router.chains[v].len()));
    let strict = (n * n) as f64;
    for v in vars {
        let old = router.release(v);
        let chain = router.route(v, strict, None);
        if chain.len() < old.len() && chain.iter().all(|&q| router.usage[q] == 0) {
            router.assign(v, chain);
        } else {
            router.assign(v, old);
        }
    }

    let embedding = Embedding::from_chains(router.chains);
    embedding.validate(edges, topology).map_err(|mut f| {
        f.free_qubits = n - embedding.qubit_count().min(n);
        f
    })?;
    Ok(embedding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::chimera;

    fn random_graph(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        edges
    }

    #[test]
    fn subgraph_embeds_with_unit_chains() {
        let topo = chimera(4, 4, 4).unwrap();
        let path: Vec<(usize, usize)> = (0..9).map(|i| (i, i + 1)).collect();
        let emb = find_embedding(10, &path, &topo, 1, DEFAULT_EMBEDDING_EFFORT).unwrap();
        emb.validate(&path, &topo).unwrap();
        assert_eq!(emb.qubit_count(), 10);
        assert_eq!(emb.max_chain_length(), 1);
    }

    #[test]
    fn triangle_needs_a_longer_chain_on_one_cell() {
        let topo = chimera(1, 1, 4).unwrap();
        let tri = [(0, 1), (1, 2), (0, 2)];
        for seed in 0..10 {
            let emb = find_embedding(3, &tri, &topo, seed, DEFAULT_EMBEDDING_EFFORT).unwrap();
            emb.validate(&tri, &topo).unwrap();
            assert!(emb.qubit_count() >= 4);
        }
    }

    #[test]
    fn oversized_graph_fails_with_diagnostic() {
        let topo = chimera(4, 4, 4).unwrap();
        let edges = random_graph(200, 0.1, 0);
        let err = find_embedding(200, &edges, &topo, 0, 20).unwrap_err();
        assert!(err.variable.is_some());
        assert!(err.to_string().contains("no embedding"));
        let k20 = random_graph(40, 1.0, 0);
        let err = find_embedding(40, &k20, &topo, 0, 20).unwrap_err();
        assert!(err.variable.is_some(), "{err}");
    }

    #[test]
    fn successes_are_valid_over_many_seeds() {
        let topo = chimera(4, 4, 4).unwrap();
        let mut successes = 0;
        for seed in 0..100u64 {
            let n = 8 + (seed as usize % 17);
            let edges = random_graph(n, 0.25, 1000 + seed);
            if let Ok(emb) = find_embedding(n, &edges, &topo, seed, DEFAULT_EMBEDDING_EFFORT) {
                emb.validate(&edges, &topo).unwrap();
                assert!(emb.qubit_count() >= n);
                successes += 1;
            }
        }
        assert!(successes >= 98, "{successes}");
    }

    #[test]
    fn removing_an_edge_keeps_success() {
        let topo = chimera(4, 4, 4).unwrap();
        for seed in 0..30u64 {
            let edges = random_graph(16, 0.3, 77 + seed);
            if find_embedding(16, &edges, &topo, seed, DEFAULT_EMBEDDING_EFFORT).is_ok() && !edges.is_empty() {
                let drop = seed as usize % edges.len();
                let fewer: Vec<_> = edges.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, e)| *e).collect();
                assert!(find_embedding(16, &fewer, &topo, seed, DEFAULT_EMBEDDING_EFFORT).is_ok(), "seed {seed}");
            }
        }
    }

    #[test]
    fn validate_rejects_broken_embeddings() {
        let topo = chimera(1, 1, 2).unwrap();
        let edges = [(0, 1)];
        assert!(Embedding::from_chains(vec![vec![0], vec![2]]).validate(&edges, &topo).is_ok());
        assert!(Embedding::from_chains(vec![vec![0], vec![1]]).validate(&edges, &topo).is_err());
        assert!(Embedding::from_chains(vec![vec![0], vec![0, 2]]).validate(&edges, &topo).is_err());
        assert!(Embedding::from_chains(vec![vec![0, 1], vec![2]]).validate(&edges, &topo).is_err());
    }
}
