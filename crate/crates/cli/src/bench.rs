use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use anyhow::{bail, Result};
use annealsched::instance::{generate_instance, Setup};
use annealsched::solvers::{solve, SolveReport, SolverConfig, SolverKind, Status};
use annealsched::topology::{Topology, TopologySpec};
use annealsched::SetupParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::InstanceInfo;

/// One CSV line: a single (instance, solver, topology, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub setup: String,
    pub n: usize,
    pub k: usize,
    pub p: u32,
    #[serde(rename = "T")]
    pub horizon: u32,
    #[serde(rename = "T_r")]
    pub t_window: u32,
    pub solver: String,
    pub topology: String,
    pub n_v: Option<usize>,
    pub n_q: Option<usize>,
    pub n_e: Option<usize>,
    pub elapsed_s: f64,
    pub makespan: Option<u32>,
    pub energy: Option<f64>,
    pub feasible: bool,
    pub seed: u64,
    pub status: String,
}

impl BenchRow {
    pub fn from_report(info: &InstanceInfo, config: &SolverConfig, report: &SolveReport) -> Self {
        Self {
            n_v: Some(report.n_v),
            n_q: Some(report.n_q),
            n_e: report.n_e,
            elapsed_s: report.elapsed,
            makespan: report.makespan,
            energy: report.best_energy.is_finite().then_some(report.best_energy),
            feasible: report.feasible(),
            status: report.status.to_string(),
            ..Self::blank(info, config)
        }
    }

    /// Row for a run that failed before producing a report.
    pub fn failed(info: &InstanceInfo, config: &SolverConfig, message: &str) -> Self {
        Self { status: format!("Error: {message}"), ..Self::blank(info, config) }
    }

    fn blank(info: &InstanceInfo, config: &SolverConfig) -> Self {
        Self {
            setup: info.setup.clone(),
            n: info.n,
            k: info.k,
            p: info.p,
            horizon: info.horizon,
            t_window: config.t_window,
            solver: config.kind.to_string(),
            topology: config.topology.name().to_string(),
            n_v: None,
            n_q: None,
            n_e: None,
            elapsed_s: 0.0,
            makespan: None,
            energy: None,
            feasible: false,
            seed: config.seed,
            status: String::new(),
        }
    }

    fn embedding_failed(&self) -> bool {
        self.status == Status::EmbeddingInfeasible.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub const CSV_HEADER: [&str; 17] = [
    "setup", "n", "k", "p", "T", "T_r", "solver", "topology", "n_v", "n_q", "n_e", "elapsed_s", "makespan", "energy",
    "feasible", "seed", "status",
];

/// Eligible machines per operation in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSpec {
    Fixed(usize),
    /// `k = n` at every size.
    AllMachines,
}

impl std::str::FromStr for KSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "n" => Ok(Self::AllMachines),
            v => v.parse().map(Self::Fixed).map_err(|_| format!("expected an integer or 'n', got '{v}'")),
        }
    }
}

/// A cross-product sweep: sizes x topologies x solvers x seeds.
#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub setup: Setup,
    pub sizes: Vec<usize>,
    pub k: KSpec,
    pub p: u32,
    pub t_window: u32,
    pub solvers: Vec<SolverKind>,
    pub topologies: Vec<TopologySpec>,
    pub seeds: Vec<u64>,
    pub time_limit: f64,
    pub deterministic_budget: Option<usize>,
    pub partition_threshold: Option<usize>,
    /// Runs executed concurrently.
    pub jobs: usize,
}

impl BenchPlan {
    fn params(&self, n: usize) -> SetupParams {
        let k = match self.k {
            KSpec::Fixed(k) => k,
            KSpec::AllMachines => n,
        };
        let t_window = if self.setup == Setup::S3 { self.p + 1 } else { self.t_window };
        SetupParams { setup: self.setup, n, k, p: self.p, t_window }
    }
}

/// Runs every configuration of `plan`. Rows come back in plan order
/// (size, topology, solver, seed) however the runs are scheduled; a run
/// that errors becomes a row with an `Error` status.
pub fn run_bench(plan: &BenchPlan) -> Result<Vec<BenchRow>> {
    if plan.solvers.is_empty() {
        bail!("empty solver list");
    }
    if plan.topologies.is_empty() {
        bail!("empty topology list");
    }
    if plan.sizes.is_empty() || plan.seeds.is_empty() {
        bail!("sweep has no sizes or no seeds");
    }
    let topologies: Vec<Arc<Topology>> =
        plan.topologies.iter().map(|t| t.build().map(Arc::new)).collect::<Result<_, _>>()?;
    let mut tasks = Vec::new();
    for &n in &plan.sizes {
        for topo in &topologies {
            for &kind in &plan.solvers {
                for &seed in &plan.seeds {
                    let mut config = SolverConfig::new(kind, Arc::clone(topo));
                    config.seed = seed;
                    config.time_limit = plan.time_limit;
                    config.deterministic_budget = plan.deterministic_budget;
                    config.t_window = plan.params(n).t_window;
                    if let Some(t) = plan.partition_threshold {
                        config.partition_threshold = t;
                    }
                    tasks.push((n, config));
                }
            }
        }
    }
    let run = |(n, config): &(usize, SolverConfig)| -> BenchRow {
        let params = plan.params(*n);
        let info = InstanceInfo { setup: params.setup.to_string(), n: *n, k: params.k, p: params.p, horizon: 0 };
        let instance = match generate_instance(&params) {
            Ok(i) => i,
            Err(e) => return BenchRow::failed(&info, config, &e.to_string()),
        };
        let info = InstanceInfo::from_params(&params, &instance);
        match solve(&instance, config) {
            Ok(report) => BenchRow::from_report(&info, config, &report),
            Err(e) => BenchRow::failed(&info, config, &e.to_string()),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(plan.jobs.max(1)).build()?;
    Ok(pool.install(|| tasks.par_iter().map(run).collect()))
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

fn series_name(row: &BenchRow) -> String {
    format!("{}-{}", row.solver, row.topology)
}

/// Series in first-appearance order.
fn series(rows: &[BenchRow]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in rows {
        let s = series_name(r);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Rows grouped by (setup, n) then series.
fn grouped(rows: &[BenchRow]) -> BTreeMap<(String, usize), BTreeMap<String, Vec<&BenchRow>>> {
    let mut out: BTreeMap<(String, usize), BTreeMap<String, Vec<&BenchRow>>> = BTreeMap::new();
    for r in rows {
        out.entry((r.setup.clone(), r.n)).or_default().entry(series_name(r)).or_default().push(r);
    }
    out
}

/// Table with one line per size and slash-separated cells, one entry per
/// solver-topology series: median elapsed time, median makespan over
/// feasible runs and the largest embedding.
pub fn markdown_summary(rows: &[BenchRow]) -> String {
    let order = series(rows);
    let mut md = String::new();
    let _ = writeln!(md, "Cells list `{}`.\n", order.join("/"));
    let groups = grouped(rows);
    let mut setup_seen = None;
    for ((setup, n), by_series) in &groups {
        if setup_seen.as_ref() != Some(setup) {
            let _ = writeln!(md, "### Setup {setup}\n");
            let _ = writeln!(md, "| n | n_v | n_q | T_c [s] | ms | n_e | feasible runs |");
            let _ = writeln!(md, "|---|---|---|---|---|---|---|");
            setup_seen = Some(setup.clone());
        }
        let first = by_series.values().flatten().next().expect("group is nonempty");
        let dash = |o: Option<String>| o.unwrap_or_else(|| "-".into());
        let cell = |f: &dyn Fn(&[&BenchRow]) -> Option<String>| {
            order.iter().map(|s| dash(by_series.get(s).and_then(|rs| f(rs)))).collect::<Vec<_>>().join("/")
        };
        let elapsed = cell(&|rs| median(rs.iter().map(|r| r.elapsed_s).collect()).map(|m| format!("{m:.3}")));
        let ms = cell(&|rs| {
            median(rs.iter().filter(|r| r.feasible).filter_map(|r| r.makespan).map(f64::from).collect()).map(|m| format!("{m}"))
        });
        let n_e = cell(&|rs| rs.iter().filter_map(|r| r.n_e).max().map(|m| m.to_string()));
        let feasible = cell(&|rs| Some(rs.iter().filter(|r| r.feasible).count().to_string()));
        let _ = writeln!(
            md,
            "| {n} | {} | {} | {elapsed} | {ms} | {n_e} | {feasible} |",
            dash(first.n_v.map(|v| v.to_string())),
            dash(first.n_q.map(|v| v.to_string())),
        );
    }
    md
}

/// Long-format plot data: `series,setup,n,elapsed_s,feasible,runs` with the
/// median elapsed time per point.
pub fn plot_data(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["series", "setup", "n", "elapsed_s", "feasible", "runs"])?;
    let groups = grouped(rows);
    for s in series(rows) {
        for ((setup, n), by_series) in &groups {
            if let Some(rs) = by_series.get(&s) {
                let m = median(rs.iter().map(|r| r.elapsed_s).collect()).expect("nonempty");
                let f = rs.iter().filter(|r| r.feasible).count();
                w.write_record([s.clone(), setup.clone(), n.to_string(), m.to_string(), f.to_string(), rs.len().to_string()])?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// CQPU against HQPU at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverPoint {
    pub n: usize,
    /// Median CQPU elapsed time; `None` when some seed failed to embed.
    pub cqpu: Option<f64>,
    pub hqpu: f64,
}

impl CrossoverPoint {
    pub fn cqpu_wins(&self) -> bool {
        self.cqpu.is_some_and(|c| c < self.hqpu)
    }
}

/// Where CQPU stops beating HQPU on one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverReport {
    pub setup: String,
    pub topology: String,
    pub points: Vec<CrossoverPoint>,
}

impl CrossoverReport {
    /// First size at which HQPU is faster or CQPU cannot embed.
    pub fn crossover(&self) -> Option<usize> {
        self.points.iter().find(|p| !p.cqpu_wins()).map(|p| p.n)
    }

    /// No size past the crossover where CQPU wins again.
    pub fn monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[0].cqpu_wins() || !w[1].cqpu_wins())
    }

    pub fn render(&self) -> String {
        let mut out = format!("setup {} on {}\n", self.setup, self.topology);
        for p in &self.points {
            let c = p.cqpu.map_or("embedding failed".to_string(), |c| format!("{c:.3}s"));
            let winner = if p.cqpu_wins() { "CQPU" } else { "HQPU" };
            let _ = writeln!(out, "  n={:<4} CQPU {c:<18} HQPU {:.3}s  -> {winner}", p.n, p.hqpu);
        }
        let _ = match self.crossover() {
            Some(n) => writeln!(out, "  crossover at n={n}"),
            None => writeln!(out, "  no crossover in the swept range"),
        };
        let _ = writeln!(out, "  monotone: {}", if self.monotone() { "yes" } else { "no" });
        out
    }
}

/// One report per (setup, topology) that has both CQPU and HQPU rows,
/// over the sizes where both ran.
pub fn crossover_reports(rows: &[BenchRow]) -> Vec<CrossoverReport> {
    let cq = SolverKind::Cqpu.to_string();
    let hq = SolverKind::Hqpu.to_string();
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in rows {
        let key = (r.setup.clone(), r.topology.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .filter_map(|(setup, topology)| {
            let mut sizes: Vec<usize> = rows.iter().filter(|r| r.setup == setup && r.topology == topology).map(|r| r.n).collect();
            sizes.sort_unstable();
            sizes.dedup();
            let points: Vec<CrossoverPoint> = sizes
                .into_iter()
                .filter_map(|n| {
                    let pick = |solver: &str| -> Vec<&BenchRow> {
                        rows.iter().filter(|r| r.setup == setup && r.topology == topology && r.n == n && r.solver == solver).collect()
                    };
                    let (c, h) = (pick(&cq), pick(&hq));
                    if c.is_empty() || h.is_empty() {
                        return None;
                    }
                    let embedded = c.iter().all(|r| !r.embedding_failed() && r.n_v.is_some());
                    Some(CrossoverPoint {
                        n,
                        cqpu: if embedded { median(c.iter().map(|r| r.elapsed_s).collect()) } else { None },
                        hqpu: median(h.iter().map(|r| r.elapsed_s).collect())?,
                    })
                })
                .collect();
            (!points.is_empty()).then_some(CrossoverReport { setup, topology, points })
        })
        .collect()
}
