use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use annealsched_cli::bench::CSV_HEADER;
use annealsched_cli::BenchRow;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_annealsched"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full = vec!["generate"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let o = run(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn rows(path: &Path) -> Vec<BenchRow> {
    csv::Reader::from_path(path).unwrap().deserialize().collect::<Result<_, _>>().unwrap()
}

#[test]
fn generate_writes_the_expected_operation_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "s1.json", &["--setup", "1", "--n", "20"]);
    let inst = annealsched::instance::load_instance(&path).unwrap();
    assert_eq!(inst.operation_count(), 400);
    let s3 = generate(dir.path(), "s3.json", &["--setup", "3", "--n", "3", "--k", "3", "--p", "3", "--t-window", "4"]);
    let inst = annealsched::instance::load_instance(&s3).unwrap();
    assert!(inst.jobs.iter().flat_map(|j| &j.operations).all(|o| o.eligible.len() == 3));
    let bad = run(&["generate", "--setup", "1", "--n", "3", "--k", "2"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn metrics_print_variable_and_interaction_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (n, expected) in [(1, "2 1"), (20, "800 1160"), (49, "4802 7105")] {
        let path = generate(dir.path(), &format!("n{n}.json"), &["--n", &n.to_string()]);
        let o = run(&["metrics", path.to_str().unwrap()]);
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), expected);
    }
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = generate(dir.path(), "s1.json", &["--n", "3"]);
    let csv_path = dir.path().join("row.csv");
    let o = run(&[
        "solve",
        s1.to_str().unwrap(),
        "--solver",
        "cqpu",
        "--topology",
        "chimera:4,4,4",
        "--deterministic-budget",
        "500",
        "--seed",
        "1",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["makespan"], 3);
    let row = &rows(&csv_path)[0];
    assert_eq!((row.makespan, row.feasible, row.status.as_str()), (Some(3), true, "Solved"));
    assert_eq!((row.n_v, row.n_q), (Some(18), Some(21)));

    let s2 = generate(dir.path(), "s2.json", &["--setup", "2", "--n", "8", "--k", "8"]);
    let o = run(&["solve", s2.to_str().unwrap(), "--solver", "cqpu", "--topology", "chimera:4,4,4"]);
    assert_eq!(o.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["status"], "EmbeddingInfeasible");

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["solve", missing.to_str().unwrap()]).status.code(), Some(1));
    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{ not json").unwrap();
    let o = run(&["solve", garbled.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse"));
    assert_eq!(run(&["solve", s1.to_str().unwrap(), "--solver", "qpu"]).status.code(), Some(1));
    assert_eq!(run(&["solve", s1.to_str().unwrap(), "--topology", "pegasus:3"]).status.code(), Some(1));
}

#[test]
fn embed_reports_qubits_or_failure() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = generate(dir.path(), "s1.json", &["--n", "3"]);
    let o = run(&["embed", s1.to_str().unwrap(), "--topology", "chimera:4,4,4"]);
    assert!(o.status.success());
    let n_e: usize = stdout(&o).trim().parse().unwrap();
    assert!(n_e >= 18);
    let s2 = generate(dir.path(), "s2.json", &["--setup", "2", "--n", "8", "--k", "8"]);
    let o = run(&["embed", s2.to_str().unwrap(), "--topology", "chimera:4,4,4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("embedding failed"));
}

#[test]
fn embed_accepts_file_topologies() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = generate(dir.path(), "s1.json", &["--n", "1"]);
    let edges = dir.path().join("pair.txt");
    std::fs::write(&edges, "# two coupled qubits\n0 1\n").unwrap();
    let spec = format!("file:{}", edges.display());
    let o = run(&["embed", s1.to_str().unwrap(), "--topology", &spec]);
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn oracle_checks_a_solve_report() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = generate(dir.path(), "s1.json", &["--n", "3"]);
    let o = run(&["oracle", s1.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "optimal makespan 3");
    let o = run(&["solve", s1.to_str().unwrap(), "--solver", "hqpu", "--topology", "chimera:4,4,4", "--deterministic-budget", "300"]);
    let report = dir.path().join("report.json");
    std::fs::write(&report, &o.stdout).unwrap();
    let o = run(&["oracle", s1.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("schedule valid, makespan 3 (gap 0)"));
}

fn bench(dir: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    let o = run(&[
        "bench",
        "--setup",
        "1",
        "--n",
        "2..6",
        "--solvers",
        "cqpu,hqpu,ihqpu",
        "--topology",
        "chimera:8,8,4",
        "--deterministic-budget",
        "300",
        "--jobs",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn bench_sweep_is_complete_ordered_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let first = bench(dir.path(), "a.csv");
    let text = std::fs::read_to_string(&first).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let a = rows(&first);
    assert_eq!(a.len(), 15);
    for (i, r) in a.iter().enumerate() {
        assert_eq!(r.n, 2 + i / 3);
        assert_eq!(r.solver, ["CQPU", "HQPU", "IHQPU"][i % 3]);
        assert_eq!(r.makespan, Some(r.n as u32), "{r:?}");
        assert!(r.feasible);
    }
    for suffix in [".md", "_plot.csv", "_crossover.txt"] {
        assert!(dir.path().join(format!("a{suffix}")).exists());
    }

    let b = rows(&bench(dir.path(), "b.csv"));
    let strip = |rs: &[BenchRow]| rs.iter().map(|r| BenchRow { elapsed_s: 0.0, ..r.clone() }).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn bench_rejects_an_empty_solver_list() {
    let o = run(&["bench", "--n", "2..3", "--solvers", "", "--deterministic-budget", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty solver list"));
}

#[test]
fn bench_records_failures_as_rows() {
    // k = 3 exceeds n = 2, so the smallest size cannot be generated.
    let o = run(&["bench", "--setup", "2", "--n", "2..3", "--k", "3", "--solvers", "hqpu", "--topology", "chimera:2,2,4", "--deterministic-budget", "50"]);
    assert!(o.status.success());
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<BenchRow> = reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].status.starts_with("Error"));
    assert_eq!(rows[1].status, "Solved");
}
