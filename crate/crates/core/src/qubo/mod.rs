//! Binary quadratic models and the compilation of flexible job-shop
//! instances into them.
//!
//! A [`Bqm`] assigns every 0/1 assignment the energy
//! `offset + sum_i linear_i x_i + sum_{a<b} quad_ab x_a x_b`.

mod decode;
mod ising;
mod model;
mod objective;
mod variables;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

pub use decode::{decode, op_assignments, Schedule, ScheduledOp};
pub use ising::{bits_from_spins, from_ising, spins_from_bits, to_ising, IsingModel};
pub use model::{build_bqm, build_bqm_with, build_terms, BqmTerms, PenaltyWeights};
pub use objective::{objectives, MakespanObjective, StartDeviation, TerminalCompletion};
pub use variables::{build_variable_table, OpWindow, VarKey, VariableTable, WindowPlan};

#[derive(Debug, Error, PartialEq)]
pub enum QuboError {
    #[error("operation (job {job}, op {op}) has no admissible start time in its window")]
    EmptyWindow { job: usize, op: usize },
    #[error("t_window must be at least 1")]
    ZeroWindow,
    #[error("sample has {got} entries, model has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed model text at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown makespan objective '{0}'")]
    UnknownObjective(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bqm {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl Bqm {
    pub fn new(num_variables: usize) -> Self {
        Self { linear: vec![0.0; num_variables], quadratic: BTreeMap::new(), offset: 0.0 }
    }

    pub fn from_terms(
        linear: Vec<f64>,
        quadratic: impl IntoIterator<Item = ((usize, usize), f64)>,
        offset: f64,
    ) -> Self {
        let mut bqm = Self { linear, quadratic: BTreeMap::new(), offset };
        for ((a, b), c) in quadratic {
            bqm.add_quadratic(a, b, c);
        }
        bqm
    }

    pub fn num_variables(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn quadratic_coefficient(&self, a: usize, b: usize) -> f64 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    fn ensure(&mut self, v: usize) {
        if v >= self.linear.len() {
            self.linear.resize(v + 1, 0.0);
        }
    }

    pub fn add_linear(&mut self, v: usize, c: f64) {
        self.ensure(v);
        self.linear[v] += c;
    }

    /// Adds `c * x_a * x_b`. A diagonal term folds into the linear part (`x^2 = x`).
    pub fn add_quadratic(&mut self, a: usize, b: usize, c: f64) {
        if a == b {
            self.add_linear(a, c);
            return;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.ensure(key.1);
        *self.quadratic.entry(key).or_insert(0.0) += c;
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    /// Removes quadratic entries that cancelled to exactly zero.
    pub fn prune_zeros(&mut self) {
        self.quadratic.retain(|_, c| *c != 0.0);
    }

    pub fn scaled(&self, factor: f64) -> Bqm {
        Bqm {
            linear: self.linear.iter().map(|c| c * factor).collect(),
            quadratic: self.quadratic.iter().map(|(k, c)| (*k, c * factor)).collect(),
            offset: self.offset * factor,
        }
    }

    /// Accumulates `factor * other` into `self`.
    pub fn add_scaled(&mut self, other: &Bqm, factor: f64) {
        if other.num_variables() > self.num_variables() {
            self.linear.resize(other.num_variables(), 0.0);
        }
        for (v, c) in other.linear.iter().enumerate() {
            self.linear[v] += factor * c;
        }
        for (&(a, b), c) in &other.quadratic {
            *self.quadratic.entry((a, b)).or_insert(0.0) += factor * c;
        }
        self.offset += factor * other.offset;
    }

    pub fn energy(&self, sample: &[bool]) -> Result<f64, QuboError> {
        if sample.len() != self.linear.len() {
            return Err(QuboError::LengthMismatch { expected: self.linear.len(), got: sample.len() });
        }
        Ok(self.energy_unchecked(sample))
    }

    /// Energy without the length check; `sample` must cover every variable.
    pub fn energy_unchecked(&self, sample: &[bool]) -> f64 {
        let mut e = self.offset;
        for (c, &x) in self.linear.iter().zip(sample) {
            if x {
                e += c;
            }
        }
        for (&(a, b), c) in &self.quadratic {
            if sample[a] && sample[b] {
                e += c;
            }
        }
        e
    }

    /// `(n_v, n_q)`: variables carrying any term, and nonzero quadratic entries.
    pub fn count_interactions(&self) -> (usize, usize) {
        let mut touched: Vec<bool> = self.linear.iter().map(|&c| c != 0.0).collect();
        let mut n_q = 0;
        for (&(a, b), &c) in &self.quadratic {
            if c != 0.0 {
                n_q += 1;
                touched[a] = true;
                touched[b] = true;
            }
        }
        (touched.iter().filter(|&&t| t).count(), n_q)
    }

    /// Neighbor lists `(other, coefficient)` for every variable.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.linear.len()];
        for (&(a, b), &c) in &self.quadratic {
            adj[a].push((b, c));
            adj[b].push((a, c));
        }
        adj
    }

    /// Energy change from flipping variable `v` in `sample`.
    pub fn flip_delta(&self, sample: &[bool], v: usize) -> f64 {
        let mut field = self.linear[v];
        for (&(a, b), &c) in self.quadratic.range((v, 0)..(v + 1, 0)) {
            debug_assert_eq!(a, v);
            if sample[b] {
                field += c;
            }
        }
        for (&(a, b), &c) in &self.quadratic {
            if b == v && sample[a] {
                field += c;
            }
        }
        if sample[v] {
            -field
        } else {
            field
        }
    }

    /// Logical interaction graph: the nonzero quadratic pairs.
    pub fn interaction_edges(&self) -> Vec<(usize, usize)> {
        self.quadratic.iter().filter(|(_, &c)| c != 0.0).map(|(&k, _)| k).collect()
    }

    /// Line-oriented text form: `nvars`, then `lin`, `quad` and `offset` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "nvars {}", self.linear.len()).unwrap();
        for (v, c) in self.linear.iter().enumerate() {
            if *c != 0.0 {
                writeln!(s, "lin {v} {c:?}").unwrap();
            }
        }
        for (&(a, b), c) in &self.quadratic {
            writeln!(s, "quad {a} {b} {c:?}").unwrap();
        }
        writeln!(s, "offset {:?}", self.offset).unwrap();
        s
    }

    pub fn from_text(text: &str) -> Result<Bqm, QuboError> {
        let mut bqm: Option<Bqm> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |m: &str| QuboError::Parse { line, message: m.to_string() };
            let fields: Vec<&str> = raw.split_whitespace().collect();
            if fields.is_empty() || fields[0].starts_with('#') {
                continue;
            }
            let int = |f: &str| f.parse::<usize>().map_err(|_| err(&format!("bad index '{f}'")));
            let real = |f: &str| f.parse::<f64>().map_err(|_| err(&format!("bad coefficient '{f}'")));
            match (fields[0], fields.len()) {
                ("nvars", 2) => bqm = Some(Bqm::new(int(fields[1])?)),
                (kind, _) if bqm.is_none() => return Err(err(&format!("'{kind}' before nvars header"))),
                ("lin", 3) => {
                    let m = bqm.as_mut().unwrap();
                    let v = int(fields[1])?;
                    if v >= m.num_variables() {
                        return Err(err("variable index out of range"));
                    }
                    m.add_linear(v, real(fields[2])?);
                }
                ("quad", 4) => {
                    let m = bqm.as_mut().unwrap();
                    let (a, b) = (int(fields[1])?, int(fields[2])?);
                    if a >= m.num_variables() || b >= m.num_variables() || a == b {
                        return Err(err("bad variable pair"));
                    }
                    m.add_quadratic(a, b, real(fields[3])?);
                }
                ("offset", 2) => bqm.as_mut().unwrap().add_offset(real(fields[1])?),
                (kind, _) => return Err(err(&format!("unrecognized line '{kind}'"))),
            }
        }
        bqm.ok_or(QuboError::Parse { line: 0, message: "missing nvars header".into() })
    }
}
