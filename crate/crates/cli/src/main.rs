//! `ukego` command-line driver: single fits, EGO runs and benchmark suites.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{paper_algorithms, resolve, CommonArgs, FileConfig, RunArgs, Settings, BENCHMARK_DEFAULT_NV};
use ukego::harness::{
    run_experiment, scale_to_bounds, write_outcome, Algorithm, ExperimentConfig, ExperimentOutcome, Problem,
};
use ukego::kriging::{ExperimentalDesign, ModelReport};
use ukego::seed::{derive_seed, streams};
use ukego::trend::{build_surrogate, SelectionTrace};

#[derive(Debug, Parser)]
#[command(name = "ukego", version, about = "Universal Kriging EGO with automatic trend selection")]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one surrogate on an LHS design and report LOOCV, trend terms and θ.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run EGO on one problem, once or repeated, and write per-run CSVs.
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare variants on one or more problems with shared initial designs.
    Benchmark {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        run: RunArgs,
    },
}

/// Failure classes mapped to distinct exit codes.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

trait ConfigContext<T> {
    fn config_err(self) -> std::result::Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ConfigContext<T> for std::result::Result<T, E> {
    fn config_err(self) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }
}

trait RuntimeContext<T> {
    fn runtime_err(self) -> std::result::Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> RuntimeContext<T> for std::result::Result<T, E> {
    fn runtime_err(self) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, err) = match &f {
                Failure::Config(e) => ("configuration error", e),
                Failure::Runtime(e) => ("error", e),
            };
            eprintln!("ukego: {kind}: {err:#}");
            ExitCode::from(f.code())
        }
    }
}

fn settings(config: Option<&Path>, common: &CommonArgs, run: &RunArgs) -> std::result::Result<Settings, Failure> {
    let file = match config {
        Some(p) => FileConfig::load(p).config_err()?,
        None => FileConfig::default(),
    };
    resolve(file, common, run).config_err()
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Fit { common } => {
            let s = settings(cli.config.as_deref(), common, &RunArgs::default())?;
            cmd_fit(&s)
        }
        Command::Optimize { common, run } => {
            let s = settings(cli.config.as_deref(), common, run)?;
            cmd_optimize(&s)
        }
        Command::Benchmark { common, run } => {
            let s = settings(cli.config.as_deref(), common, run)?;
            cmd_benchmark(&s)
        }
    }
}

fn single_problem(s: &Settings) -> Result<Problem> {
    match s.problems.as_slice() {
        [p] => Ok(*p),
        [] => bail!("--problem is required"),
        _ => bail!("exactly one --problem is expected for this command"),
    }
}

fn default_algos(s: &Settings, problem: Problem) -> Result<Vec<Algorithm>> {
    if s.algos.is_empty() {
        Ok(vec![Algorithm::pck(problem.pck_scheme())?])
    } else {
        s.algorithms_for(problem)
    }
}

#[derive(Serialize)]
struct FitReport {
    problem: Problem,
    algorithm: Algorithm,
    surrogate: String,
    seed: u64,
    n: usize,
    loocv_rmse: Option<f64>,
    trend_terms: Vec<String>,
    theta: Vec<f64>,
    model: ModelReport,
    trace: Option<SelectionTrace>,
}

fn cmd_fit(s: &Settings) -> std::result::Result<(), Failure> {
    let problem = single_problem(s).config_err()?;
    let algos = default_algos(s, problem).config_err()?;
    let [algorithm] = algos[..] else {
        return Err(Failure::Config(anyhow!("fit takes exactly one --algo")));
    };
    let mut c = s.experiment(problem, vec![algorithm], 1, 0);
    c.n_upd = 0;
    c.validate().config_err()?;
    let unit = c.initial_design(0).runtime_err()?;
    let bounds = problem.bounds();
    let points = scale_to_bounds(&unit, &bounds);
    let y = points.iter().map(|x| problem.objective(x)).collect::<Result<Vec<_>, _>>().runtime_err()?;
    let design = ExperimentalDesign::from_raw(&points, &bounds, &y).runtime_err()?;
    let strategy = c.tune_strategy(derive_seed(c.rep_seed(0), streams::TUNE));
    let surrogate = build_surrogate(algorithm.surrogate_kind(c.p_max), &design, &strategy)
        .with_context(|| format!("fitting {algorithm} on {problem}"))
        .runtime_err()?;
    let model = surrogate.model.report();
    let report = FitReport {
        problem,
        algorithm,
        surrogate: surrogate.kind.to_string(),
        seed: c.seed,
        n: c.n_int,
        loocv_rmse: model.loocv_rmse,
        trend_terms: model.index_set.clone(),
        theta: model.theta.clone(),
        model,
        trace: surrogate.trace,
    };
    println!("problem     {problem}");
    println!("surrogate   {} ({algorithm})", report.surrogate);
    println!("samples     {}", report.n);
    match report.loocv_rmse {
        Some(v) => println!("loocv_rmse  {v:.6e}"),
        None => println!("loocv_rmse  n/a"),
    }
    println!("trend       {}", report.trend_terms.join(" "));
    println!("theta       {}", report.theta.iter().map(|t| format!("{t:.6e}")).collect::<Vec<_>>().join(" "));
    if let Some(out) = &s.out {
        std::fs::create_dir_all(out).runtime_err()?;
        let path = out.join("fit_report.json");
        let json = serde_json::to_string_pretty(&report).runtime_err()? + "\n";
        std::fs::write(&path, json).runtime_err()?;
        println!("report      {}", path.display());
    }
    Ok(())
}

fn out_dir(s: &Settings) -> PathBuf {
    s.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

fn report_outcome(outcome: &ExperimentOutcome, dir: &Path) {
    let c = &outcome.manifest.config;
    println!("{}: {} runs written to {}", c.problem, outcome.records.len(), dir.display());
    for b in &outcome.final_boxplots {
        println!("  {:<11} median final I = {:.6e} (n = {})", b.algorithm.id(), b.stats.median, b.n);
    }
    if outcome.failures() > 0 {
        println!("  {} run(s) failed; see manifest.json", outcome.failures());
    }
}

fn execute(configs: &[(ExperimentConfig, PathBuf)], jobs: usize) -> std::result::Result<(), Failure> {
    let mut failures = 0;
    for (c, dir) in configs {
        let outcome = run_experiment(c, jobs).runtime_err()?;
        write_outcome(&outcome, dir).with_context(|| format!("writing results to {}", dir.display())).runtime_err()?;
        report_outcome(&outcome, dir);
        failures += outcome.failures();
    }
    if failures > 0 {
        return Err(Failure::Runtime(anyhow!("{failures} run(s) failed")));
    }
    Ok(())
}

fn cmd_optimize(s: &Settings) -> std::result::Result<(), Failure> {
    if s.preset.is_some() {
        return Err(Failure::Config(anyhow!("--preset applies to the benchmark command")));
    }
    let problem = single_problem(s).config_err()?;
    let algos = default_algos(s, problem).config_err()?;
    let c = s.experiment(problem, algos, 1, 0);
    c.validate().config_err()?;
    execute(&[(c, out_dir(s))], s.jobs)
}

fn cmd_benchmark(s: &Settings) -> std::result::Result<(), Failure> {
    let problems = match (&s.preset, s.problems.is_empty()) {
        (Some(_), true) => Problem::ALL.to_vec(),
        (_, false) => s.problems.clone(),
        (None, true) => return Err(Failure::Config(anyhow!("--problem or --preset is required"))),
    };
    if s.preset.is_none() && s.algos.is_empty() {
        return Err(Failure::Config(anyhow!("no algorithms given: pass --algo (repeatable) or use --preset")));
    }
    let root = out_dir(s);
    let mut configs = Vec::new();
    for p in problems {
        let algos = if s.algos.is_empty() { paper_algorithms(p) } else { s.algorithms_for(p).config_err()? };
        let c = s.experiment(p, algos, 20, BENCHMARK_DEFAULT_NV);
        c.validate().config_err()?;
        configs.push((c, root.join(p.name())));
    }
    execute(&configs, s.jobs)
}
