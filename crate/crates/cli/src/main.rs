use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use annealsched::instance::load_instance;
use annealsched::solvers::{SolveReport, SolverConfig};
use annealsched::SetupParams;
use annealsched_cli::args::{parse_sizes, parse_solvers, BenchArgs, Cli, Command, OracleArgs, SolveArgs};
use annealsched_cli::bench::{markdown_summary, plot_data, write_csv};
use annealsched_cli::{
    cmd_embed, cmd_generate, cmd_metrics, cmd_oracle, cmd_solve, crossover_reports, exit_code, run_bench, BenchPlan,
    InstanceInfo, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_SOLVED,
};
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { EXIT_SOLVED as u8 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Generate(a) => {
            let params = SetupParams { setup: a.setup, n: a.n, k: a.k, p: a.p, t_window: a.t_window };
            let instance = cmd_generate(&params, a.out.as_deref())?;
            if a.out.is_none() {
                println!("{}", annealsched::instance::instance_to_json(&instance));
            }
            Ok(EXIT_SOLVED)
        }
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Metrics(a) => {
            let instance = load(&a.instance)?;
            let (n_v, n_q) = cmd_metrics(&instance, a.t_window)?;
            println!("{n_v} {n_q}");
            Ok(EXIT_SOLVED)
        }
        Command::Embed(a) => {
            let instance = load(&a.instance)?;
            let topology = a.topology.build()?;
            match cmd_embed(&instance, &topology, a.seed, a.t_window)? {
                Ok(n_e) => {
                    println!("{n_e}");
                    Ok(EXIT_SOLVED)
                }
                Err(failure) => {
                    println!("embedding failed: {failure}");
                    Ok(EXIT_INFEASIBLE)
                }
            }
        }
        Command::Oracle(a) => oracle(a),
    }
}

fn load(path: &Path) -> Result<annealsched::FjsspInstance> {
    load_instance(path).map_err(|e| anyhow::anyhow!("cannot load instance: {e}"))
}

fn solve(a: SolveArgs) -> Result<i32> {
    let instance = load(&a.instance)?;
    let mut config = SolverConfig::new(a.solver, Arc::new(a.run.topology.build()?));
    config.seed = a.seed;
    config.time_limit = a.run.time_limit;
    config.deterministic_budget = a.run.deterministic_budget;
    config.t_window = a.run.t_window;
    config.reads = a.run.reads;
    if let Some(t) = a.run.threshold {
        config.partition_threshold = t;
    }
    if let Some(c) = a.run.subset_cap {
        config.subset_size_cap = c;
    }
    let info = InstanceInfo::infer(&instance);
    let (report, row) = cmd_solve(&instance, &info, &config).context("solve failed")?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    eprintln!(
        "status {} makespan {} elapsed {:.3}s",
        report.status,
        report.makespan.map_or("-".to_string(), |m| m.to_string()),
        report.elapsed
    );
    if let Some(path) = &a.out {
        let file = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        write_csv(&[row], file)?;
    }
    Ok(exit_code(&report))
}

/// `results.csv` -> `results<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn bench(a: BenchArgs) -> Result<i32> {
    let plan = BenchPlan {
        setup: a.setup,
        sizes: parse_sizes(&a.n).map_err(anyhow::Error::msg)?,
        k: a.k,
        p: a.p,
        t_window: a.t_window,
        solvers: parse_solvers(&a.solvers).map_err(anyhow::Error::msg)?,
        topologies: a.topologies,
        seeds: (a.seed..a.seed + a.seeds).collect(),
        time_limit: a.time_limit,
        deterministic_budget: a.deterministic_budget,
        partition_threshold: a.threshold,
        jobs: a.jobs,
    };
    let rows = run_bench(&plan)?;
    let crossover: String = crossover_reports(&rows).iter().map(|r| r.render()).collect();
    match &a.out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            write_csv(&rows, file)?;
            fs::write(sibling(path, ".md"), markdown_summary(&rows))?;
            fs::write(sibling(path, "_plot.csv"), plot_data(&rows)?)?;
            fs::write(sibling(path, "_crossover.txt"), &crossover)?;
        }
        None => {
            write_csv(&rows, io::stdout().lock())?;
            eprint!("{}", markdown_summary(&rows));
        }
    }
    eprint!("{crossover}");
    Ok(EXIT_SOLVED)
}

fn oracle(a: OracleArgs) -> Result<i32> {
    let instance = load(&a.instance)?;
    let report: Option<SolveReport> = match &a.report {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read report {}", path.display()))?;
            Some(serde_json::from_str(&text).with_context(|| format!("cannot parse report {}", path.display()))?)
        }
        None => None,
    };
    let schedule = report.as_ref().and_then(|r| r.schedule.as_ref());
    if report.is_some() && schedule.is_none() {
        println!("report holds no schedule");
        return Ok(EXIT_INFEASIBLE);
    }
    let (best, diags) = cmd_oracle(&instance, a.horizon_cap.unwrap_or(instance.horizon), schedule)?;
    println!("optimal makespan {best}");
    match (diags, schedule) {
        (Some(d), Some(s)) if d.is_empty() => {
            println!("schedule valid, makespan {} (gap {})", s.makespan, s.makespan.saturating_sub(best));
            Ok(EXIT_SOLVED)
        }
        (Some(d), _) => {
            for v in &d {
                println!("violation: {v}");
            }
            Ok(EXIT_INFEASIBLE)
        }
        _ => Ok(EXIT_SOLVED),
    }
}
