//! Hardware graphs, minor embedding and chain handling.
//!
//! A [`Topology`] is an undirected simple graph over qubits `0..num_nodes`.
//! Chimera graphs are generated in closed form; any other graph (Pegasus,
//! Zephyr, a damaged chip) is loaded from an edge-list file.

mod chains;
mod embedding;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub use chains::{default_chain_strength, embed_bqm, unembed, EmbeddedProblem};
pub use embedding::{
    find_embedding, find_embedding_with, EmbedOptions, Embedding, EmbeddingFailure, DEFAULT_EMBEDDING_EFFORT, DEFAULT_EMBEDDING_TRIES,
};

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("cannot read topology file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed edge list at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid topology spec '{0}' (expected chimera:R,C,S or file:PATH)")]
    Spec(String),
    #[error("chimera dimensions must all be at least 1")]
    Dimensions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    name: String,
    /// Original node label of each internal index (identity for generated graphs).
    labels: Vec<u64>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Topology {
    /// Builds a graph on `0..num_nodes`; duplicate edges collapse, self-loops are dropped.
    pub fn from_edges(name: impl Into<String>, num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> =
            edges.into_iter().filter(|(a, b)| a != b).map(|(a, b)| (a.min(b), a.max(b))).collect();
        let num_nodes = set.iter().map(|&(_, b)| b + 1).max().unwrap_or(0).max(num_nodes);
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { name: name.into(), labels: (0..num_nodes as u64).collect(), edges: set.into_iter().collect(), adjacency }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_nodes() && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Label of node `q` in the source file.
    pub fn label(&self, q: usize) -> u64 {
        self.labels[q]
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} qubits, {} couplers)", self.name, self.num_nodes(), self.num_edges())
    }
}

/// Chimera graph of `rows x cols` unit cells, each a complete bipartite
/// `K_{shore,shore}`. Node `((r * cols + c) * 2 + u) * shore + k` is qubit `k`
/// of side `u` in cell `(r, c)`; side-0 qubits couple vertically, side-1
/// qubits horizontally.
pub fn chimera(rows: usize, cols: usize, shore: usize) -> Result<Topology, TopologyError> {
    if rows == 0 || cols == 0 || shore == 0 {
        return Err(TopologyError::Dimensions);
    }
    let node = |r: usize, c: usize, u: usize, k: usize| ((r * cols + c) * 2 + u) * shore + k;
    let mut edges = Vec::with_capacity(rows * cols * shore * shore + shore * (cols * (rows - 1) + rows * (cols - 1)));
    for r in 0..rows {
        for c in 0..cols {
            for a in 0..shore {
                for b in 0..shore {
                    edges.push((node(r, c, 0, a), node(r, c, 1, b)));
                }
            }
            for k in 0..shore {
                if r + 1 < rows {
                    edges.push((node(r, c, 0, k), node(r + 1, c, 0, k)));
                }
                if c + 1 < cols {
                    edges.push((node(r, c, 1, k), node(r, c + 1, 1, k)));
                }
            }
        }
    }
    Ok(Topology::from_edges(format!("chimera:{rows},{cols},{shore}"), rows * cols * 2 * shore, edges))
}

/// Parses `u v` lines (`#` starts a comment). Nodes are the endpoints that
/// appear, relabelled densely in ascending label order.
pub fn parse_edge_list(name: impl Into<String>, text: &str) -> Result<Topology, TopologyError> {
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(TopologyError::Parse { line: line_no, message: format!("expected two node labels, found {}", fields.len()) });
        }
        let parse = |f: &str| {
            f.parse::<u64>()
                .map_err(|_| TopologyError::Parse { line: line_no, message: format!("'{f}' is not a non-negative integer") })
        };
        let (a, b) = (parse(fields[0])?, parse(fields[1])?);
        if a == b {
            return Err(TopologyError::Parse { line: line_no, message: format!("self-loop on node {a}") });
        }
        raw.push((a, b));
    }
    let labels: BTreeMap<u64, usize> = raw
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    let mut topo = Topology::from_edges(name, labels.len(), raw.iter().map(|(a, b)| (labels[a], labels[b])));
    topo.labels = labels.keys().copied().collect();
    Ok(topo)
}

pub fn load_topology(path: impl AsRef<Path>) -> Result<Topology, TopologyError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TopologyError::Io { path: path.display().to_string(), source })?;
    parse_edge_list(format!("file:{}", path.display()), &text)
}

/// Parsed `--topology` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologySpec {
    Chimera { rows: usize, cols: usize, shore: usize },
    File(String),
}

impl TopologySpec {
    pub fn build(&self) -> Result<Topology, TopologyError> {
        match self {
            Self::Chimera { rows, cols, shore } => chimera(*rows, *cols, *shore),
            Self::File(path) => load_topology(path),
        }
    }
}

impl FromStr for TopologySpec {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TopologyError::Spec(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "chimera" => {
                let dims: Vec<usize> = rest.split(',').map(|d| d.trim().parse::<usize>()).collect::<Result<_, _>>().map_err(|_| bad())?;
                match dims[..] {
                    [rows, cols, shore] => Ok(Self::Chimera { rows, cols, shore }),
                    _ => Err(bad()),
                }
            }
            "file" if !rest.is_empty() => Ok(Self::File(rest.to_string())),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Chimera { rows, cols, shore } => write!(f, "chimera:{rows},{cols},{shore}"),
            Self::File(path) => write!(f, "file:{path}"),
        }
    }
}
