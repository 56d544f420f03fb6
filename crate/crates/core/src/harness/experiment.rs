//! Repeated EGO experiments with shared initial designs and CSV/JSON output.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ego::{ego_step, EgoConfig, EgoState};
use crate::error::{Error, Result};
use crate::harness::{boxplot_stats, improvement, lhs_sample, scale_to_bounds, validation_rmse, BoxplotStats, Problem};
use crate::hyperopt::{GaConfig, TuneKind, TuneStrategy};
use crate::kriging::{normalize_point, ExperimentalDesign};
use crate::par::{self, Exec};
use crate::poly::{generate_index_set, Scheme};
use crate::seed::{derive_seed, streams};
use crate::trend::{build_surrogate, SelectionTrace, Surrogate, SurrogateKind};

/// Offset of per-algorithm seed streams, clear of the shared stream labels.
const ALGORITHM_STREAM_BASE: u64 = 16;

/// EGO variants compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "uk1")]
    Uk1,
    #[serde(rename = "uk2")]
    Uk2,
    #[serde(rename = "bk")]
    Bk,
    #[serde(rename = "pck-to")]
    PckTo,
    #[serde(rename = "pck-tf")]
    PckTf,
    #[serde(rename = "pck-tensor")]
    PckTensor,
    #[serde(rename = "uk1-freq")]
    Uk1Freq,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Ok,
        Algorithm::Uk1,
        Algorithm::Uk2,
        Algorithm::Bk,
        Algorithm::PckTo,
        Algorithm::PckTf,
        Algorithm::PckTensor,
        Algorithm::Uk1Freq,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Ok => "ok",
            Algorithm::Uk1 => "uk1",
            Algorithm::Uk2 => "uk2",
            Algorithm::Bk => "bk",
            Algorithm::PckTo => "pck-to",
            Algorithm::PckTf => "pck-tf",
            Algorithm::PckTensor => "pck-tensor",
            Algorithm::Uk1Freq => "uk1-freq",
        }
    }

    /// The PCK variant using `scheme` (hyperbolic truncation has no id).
    pub fn pck(scheme: Scheme) -> Result<Self> {
        match scheme {
            Scheme::TotalOrder => Ok(Algorithm::PckTo),
            Scheme::TwoFactor => Ok(Algorithm::PckTf),
            Scheme::TensorProduct => Ok(Algorithm::PckTensor),
            other => Err(Error::InvalidArgument(format!("no PCK variant for scheme {other}"))),
        }
    }

    /// Surrogate built by this variant for trend orders up to `p_max`.
    pub fn surrogate_kind(self, p_max: u32) -> SurrogateKind {
        match self {
            Algorithm::Ok => SurrogateKind::Ordinary,
            Algorithm::Uk1 => SurrogateKind::UniversalFixed { p: 1 },
            Algorithm::Uk2 => SurrogateKind::UniversalFixed { p: 2 },
            Algorithm::Bk => SurrogateKind::Blind { p_max },
            Algorithm::PckTo => SurrogateKind::PolynomialChaos { scheme: Scheme::TotalOrder, p_max },
            Algorithm::PckTf => SurrogateKind::PolynomialChaos { scheme: Scheme::TwoFactor, p_max },
            Algorithm::PckTensor => SurrogateKind::PolynomialChaos { scheme: Scheme::TensorProduct, p_max },
            Algorithm::Uk1Freq => SurrogateKind::Frequentist { p: 1 },
        }
    }

    /// Rejects fixed trends with more terms than initial samples.
    pub fn validate_for(self, problem: Problem, n_int: usize) -> Result<()> {
        let p = match self {
            Algorithm::Uk1 | Algorithm::Uk1Freq => 1,
            Algorithm::Uk2 => 2,
            _ => return Ok(()),
        };
        let size = generate_index_set(problem.dim(), p, Scheme::TotalOrder)?.len();
        if size > n_int {
            return Err(Error::InvalidArgument(format!(
                "algorithm {} on {problem}: the order-{p} polynomial has {size} terms, which exceeds the sample size {n_int}",
                self.id()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = Algorithm::ALL.iter().map(|a| a.id()).collect();
            Error::InvalidArgument(format!("unknown algorithm '{s}' (expected one of: {})", ids.join(", ")))
        })
    }
}

/// GA budgets for θ tuning and EI search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub tune_population: usize,
    pub tune_generations: usize,
    pub ei_population: usize,
    pub ei_generations: usize,
}

impl Default for Budget {
    fn default() -> Self {
        let ga = GaConfig::default();
        Budget {
            tune_population: ga.population,
            tune_generations: ga.generations,
            ei_population: ga.population,
            ei_generations: ga.generations,
        }
    }
}

/// Settings of a repeated experiment on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub algorithms: Vec<Algorithm>,
    pub p_max: u32,
    pub tune: TuneKind,
    pub n_int: usize,
    pub n_upd: usize,
    pub reps: usize,
    pub seed: u64,
    /// Validation points for the initial-surrogate RMSE; 0 disables it.
    pub n_v: usize,
    pub budget: Budget,
}

/// Default size of the uniform validation set.
pub const DEFAULT_N_V: usize = 10_000;

impl ExperimentConfig {
    /// Published defaults for `problem` with the given variants.
    pub fn for_problem(problem: Problem, algorithms: Vec<Algorithm>) -> Self {
        ExperimentConfig {
            problem,
            algorithms,
            p_max: problem.p_max(),
            tune: TuneKind::default(),
            n_int: problem.n_int(),
            n_upd: problem.n_upd(),
            reps: 20,
            seed: 0,
            n_v: DEFAULT_N_V,
            budget: Budget::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("no algorithms selected".into()));
        }
        let unique: BTreeSet<_> = self.algorithms.iter().collect();
        if unique.len() != self.algorithms.len() {
            return Err(Error::InvalidArgument("algorithm list contains duplicates".into()));
        }
        if self.n_int < 2 {
            return Err(Error::InvalidArgument(format!("n_int must be at least 2, got {}", self.n_int)));
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        for a in &self.algorithms {
            a.validate_for(self.problem, self.n_int)?;
        }
        self.tune_strategy(0).validate()?;
        self.ego_config(Algorithm::Ok).ei.ga.validate()
    }

    /// Tuning strategy with this experiment's budget.
    pub fn tune_strategy(&self, seed: u64) -> TuneStrategy {
        let mut s = TuneStrategy::new(self.tune, seed);
        s.ga.population = self.budget.tune_population;
        s.ga.generations = self.budget.tune_generations;
        s
    }

    fn ego_config(&self, algorithm: Algorithm) -> EgoConfig {
        let mut cfg = EgoConfig::new(algorithm.surrogate_kind(self.p_max), self.tune_strategy(0), self.n_upd);
        cfg.ei.ga.population = self.budget.ei_population;
        cfg.ei.ga.generations = self.budget.ei_generations;
        cfg
    }

    /// Seed of repetition `rep`.
    pub fn rep_seed(&self, rep: usize) -> u64 {
        derive_seed(self.seed, rep as u64)
    }

    /// Unit-cube initial design shared by all variants of repetition `rep`.
    pub fn initial_design(&self, rep: usize) -> Result<DMatrix<f64>> {
        lhs_sample(self.n_int, self.problem.dim(), derive_seed(self.rep_seed(rep), streams::LHS))
    }
}

/// Whether a row belongs to the initial design or to an infill update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Update,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Update => "update",
        }
    }
}

/// One objective evaluation; `iteration` is 0 for the initial design and
/// the update index afterwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub iteration: usize,
    pub phase: Phase,
    pub x: Vec<f64>,
    pub y_raw: f64,
}

/// Complete history of one EGO run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub problem: Problem,
    pub algorithm: Algorithm,
    pub rep: usize,
    pub seed: u64,
    pub evaluations: Vec<Evaluation>,
    /// Best raw value after the initial design (entry 0) and each update.
    pub best_trajectory: Vec<f64>,
    pub improvement_trajectory: Vec<f64>,
    /// Validation RMSE of the surrogate fitted to the initial design.
    pub initial_rmse: Option<f64>,
    pub selection_traces: Vec<Option<SelectionTrace>>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn completed(&self) -> bool {
        self.error.is_none()
    }

    /// Running best after every evaluation, in row order.
    pub fn running_best(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.evaluations
            .iter()
            .map(|e| {
                best = best.min(e.y_raw);
                best
            })
            .collect()
    }

    /// Writes the evaluation table.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let m = self.problem.dim();
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = ["problem", "algorithm", "rep", "iteration", "phase"].map(String::from).to_vec();
        header.extend((1..=m).map(|j| format!("x_{j}")));
        header.extend(["y_raw", "best_so_far", "improvement"].map(String::from));
        w.write_record(&header)?;
        let optimum = self.problem.optimum();
        for (e, best) in self.evaluations.iter().zip(self.running_best()) {
            let mut row = vec![
                self.problem.name().to_string(),
                self.algorithm.id().to_string(),
                self.rep.to_string(),
                e.iteration.to_string(),
                e.phase.as_str().to_string(),
            ];
            row.extend(e.x.iter().map(|v| v.to_string()));
            row.push(e.y_raw.to_string());
            row.push(best.to_string());
            row.push(improvement(best, optimum)?.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs one variant of one repetition on the shared initial design.
pub fn run_single(config: &ExperimentConfig, algorithm: Algorithm, rep: usize, unit: &DMatrix<f64>) -> RunRecord {
    let problem = config.problem;
    let seed = derive_seed(config.rep_seed(rep), ALGORITHM_STREAM_BASE + algorithm as u64);
    let mut record = RunRecord {
        problem,
        algorithm,
        rep,
        seed,
        evaluations: Vec::new(),
        best_trajectory: Vec::new(),
        improvement_trajectory: Vec::new(),
        initial_rmse: None,
        selection_traces: Vec::new(),
        error: None,
    };
    if let Err(e) = drive(config, algorithm, rep, unit, seed, &mut record) {
        warn!("{problem}/{algorithm} rep {rep} failed: {e}");
        record.error = Some(e.to_string());
    }
    record
}

fn push_best(record: &mut RunRecord, y_raw: f64) -> Result<()> {
    let best = record.best_trajectory.last().copied().unwrap_or(f64::INFINITY).min(y_raw);
    record.best_trajectory.push(best);
    record.improvement_trajectory.push(improvement(best, record.problem.optimum())?);
    Ok(())
}

fn drive(
    config: &ExperimentConfig,
    algorithm: Algorithm,
    rep: usize,
    unit: &DMatrix<f64>,
    seed: u64,
    record: &mut RunRecord,
) -> Result<()> {
    let problem = config.problem;
    let bounds = problem.bounds();
    let points = scale_to_bounds(unit, &bounds);
    let mut responses = Vec::with_capacity(points.len());
    for x in &points {
        let y_raw = problem.raw(x)?;
        record.evaluations.push(Evaluation { iteration: 0, phase: Phase::Init, x: x.clone(), y_raw });
        responses.push(problem.transform(y_raw)?);
    }
    let init_best = record.evaluations.iter().map(|e| e.y_raw).fold(f64::INFINITY, f64::min);
    push_best(record, init_best)?;
    let design = ExperimentalDesign::from_raw(&points, &bounds, &responses)?;
    let ego = config.ego_config(algorithm);
    let mut state = EgoState::new(design)?;
    let validation_seed = derive_seed(config.rep_seed(rep), streams::VALIDATION);
    let rmse_of = |s: &Surrogate| {
        validation_rmse(problem, config.n_v, validation_seed, |x| s.model.predict(&normalize_point(x, &bounds)?))
    };
    if config.n_upd == 0 && config.n_v > 0 {
        let mut strategy = ego.tune;
        strategy.seed = derive_seed(derive_seed(seed, 0), streams::TUNE);
        let s = build_surrogate(ego.surrogate, &state.design, &strategy)?;
        record.initial_rmse = Some(rmse_of(&s)?);
    }
    let objective = |x: &[f64]| problem.objective(x);
    for k in 0..config.n_upd {
        let surrogate = ego_step(&mut state, &ego, &objective, seed)?;
        if k == 0 && config.n_v > 0 {
            record.initial_rmse = Some(rmse_of(&surrogate)?);
        }
        let step = state.history.last().expect("a successful step is recorded");
        let y_raw = problem.raw(&step.point)?;
        record.evaluations.push(Evaluation { iteration: k + 1, phase: Phase::Update, x: step.point.clone(), y_raw });
        record.selection_traces.push(step.trace.clone());
        push_best(record, y_raw)?;
    }
    Ok(())
}

/// Per-iteration statistics of the improvement metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub iteration: usize,
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
}

/// Boxplot statistics of one variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub stats: BoxplotStats,
}

/// Run status as echoed in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEntry {
    pub algorithm: Algorithm,
    pub rep: usize,
    pub seed: u64,
    pub file: String,
    pub evaluations: usize,
    pub error: Option<String>,
}

/// Seeds of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepSeeds {
    pub rep: usize,
    pub seed: u64,
    pub lhs_seed: u64,
    pub validation_seed: u64,
}

/// Reproducibility record of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub software: String,
    pub version: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub reps: Vec<RepSeeds>,
    pub runs: Vec<RunEntry>,
    pub failures: usize,
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub final_boxplots: Vec<BoxplotRow>,
    pub rmse_boxplots: Vec<BoxplotRow>,
    pub manifest: Manifest,
}

impl ExperimentOutcome {
    pub fn failures(&self) -> usize {
        self.manifest.failures
    }

    /// Records of one variant, ordered by repetition.
    pub fn records_of(&self, algorithm: Algorithm) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.algorithm == algorithm)
    }

    /// Median final improvement of a variant over completed runs.
    pub fn median_final_improvement(&self, algorithm: Algorithm) -> Option<f64> {
        self.final_boxplots.iter().find(|b| b.algorithm == algorithm).map(|b| b.stats.median)
    }
}

/// File name of a run's evaluation table.
pub fn run_file_name(problem: Problem, algorithm: Algorithm, rep: usize) -> String {
    format!("{}_{}_rep{:03}.csv", problem.name(), algorithm.id(), rep)
}

/// Runs every (repetition, variant) pair on `threads` workers (0 = all
/// cores). Variants of a repetition share its initial design. Individual run
/// failures are recorded, not propagated.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    config.validate()?;
    let designs: Vec<DMatrix<f64>> = (0..config.reps).map(|r| config.initial_design(r)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, Algorithm)> =
        (0..config.reps).flat_map(|r| config.algorithms.iter().map(move |&a| (r, a))).collect();
    info!("{}: {} runs of {} evaluations each", config.problem, jobs.len(), config.n_int + config.n_upd);
    let exec = if threads == 1 { Exec::Sequential } else { Exec::Parallel };
    let records = par::with_threads(threads, || {
        par::map(exec, &jobs, |&(rep, a)| run_single(config, a, rep, &designs[rep]))
    });
    summarize(config, records)
}

/// Sequential reduction of run records into summary tables and manifest.
pub fn summarize(config: &ExperimentConfig, records: Vec<RunRecord>) -> Result<ExperimentOutcome> {
    let mut summary = Vec::new();
    let mut final_boxplots = Vec::new();
    let mut rmse_boxplots = Vec::new();
    for &a in &config.algorithms {
        let runs: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm == a).collect();
        for it in 0..=config.n_upd {
            let vals: Vec<f64> = runs.iter().filter_map(|r| r.improvement_trajectory.get(it).copied()).collect();
            if vals.is_empty() {
                continue;
            }
            let b = boxplot_stats(&vals)?;
            summary.push(SummaryRow {
                algorithm: a,
                iteration: it,
                n: vals.len(),
                median: b.median,
                q1: b.q1,
                q3: b.q3,
                mean: b.mean,
            });
        }
        let finals: Vec<f64> =
            runs.iter().filter(|r| r.completed()).filter_map(|r| r.improvement_trajectory.last().copied()).collect();
        if !finals.is_empty() {
            final_boxplots.push(BoxplotRow { algorithm: a, n: finals.len(), stats: boxplot_stats(&finals)? });
        }
        let rmses: Vec<f64> = runs.iter().filter_map(|r| r.initial_rmse).collect();
        if !rmses.is_empty() {
            rmse_boxplots.push(BoxplotRow { algorithm: a, n: rmses.len(), stats: boxplot_stats(&rmses)? });
        }
    }
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.seed,
        config: config.clone(),
        reps: (0..config.reps)
            .map(|r| {
                let seed = config.rep_seed(r);
                RepSeeds {
                    rep: r,
                    seed,
                    lhs_seed: derive_seed(seed, streams::LHS),
                    validation_seed: derive_seed(seed, streams::VALIDATION),
                }
            })
            .collect(),
        runs: records
            .iter()
            .map(|r| RunEntry {
                algorithm: r.algorithm,
                rep: r.rep,
                seed: r.seed,
                file: format!("runs/{}", run_file_name(r.problem, r.algorithm, r.rep)),
                evaluations: r.evaluations.len(),
                error: r.error.clone(),
            })
            .collect(),
        failures: records.iter().filter(|r| !r.completed()).count(),
    };
    Ok(ExperimentOutcome { records, summary, final_boxplots, rmse_boxplots, manifest })
}

fn write_boxplots(path: &Path, problem: Problem, rows: &[BoxplotRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "problem",
        "algorithm",
        "n",
        "q1",
        "median",
        "q3",
        "whisker_low",
        "whisker_high",
        "mean",
        "outliers",
    ])?;
    for r in rows {
        let s = &r.stats;
        let outliers: Vec<String> = s.outliers.iter().map(|v| v.to_string()).collect();
        w.write_record([
            problem.name().to_string(),
            r.algorithm.id().to_string(),
            r.n.to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.q3.to_string(),
            s.whisker_low.to_string(),
            s.whisker_high.to_string(),
            s.mean.to_string(),
            outliers.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes per-run CSVs and selection traces under `dir/runs`, plus
/// `summary.csv`, `final_boxplot.csv`, `rmse_boxplot.csv` and
/// `manifest.json` under `dir`. Returns the paths written.
pub fn write_outcome(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let problem = outcome.manifest.config.problem;
    let runs_dir = dir.join("runs");
    fs::create_dir_all(&runs_dir)?;
    let mut written = Vec::new();
    for r in &outcome.records {
        let path = runs_dir.join(run_file_name(problem, r.algorithm, r.rep));
        r.write_csv(&path)?;
        written.push(path);
        if r.selection_traces.iter().any(Option::is_some) {
            let path = runs_dir.join(run_file_name(problem, r.algorithm, r.rep).replace(".csv", "_traces.json"));
            fs::write(&path, serde_json::to_string_pretty(&r.selection_traces)?)?;
            written.push(path);
        }
    }
    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["problem", "algorithm", "iteration", "n", "median", "q1", "q3", "mean"])?;
    for s in &outcome.summary {
        w.write_record([
            problem.name().to_string(),
            s.algorithm.id().to_string(),
            s.iteration.to_string(),
            s.n.to_string(),
            s.median.to_string(),
            s.q1.to_string(),
            s.q3.to_string(),
            s.mean.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);
    let path = dir.join("final_boxplot.csv");
    write_boxplots(&path, problem, &outcome.final_boxplots)?;
    written.push(path);
    let path = dir.join("rmse_boxplot.csv");
    write_boxplots(&path, problem, &outcome.rmse_boxplots)?;
    written.push(path);
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&outcome.manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(problem: Problem, algorithms: Vec<Algorithm>) -> ExperimentConfig {
        let mut c = ExperimentConfig::for_problem(problem, algorithms);
        c.reps = 3;
        c.n_upd = 2;
        c.n_v = 200;
        c.p_max = 2;
        c.seed = 9;
        c.budget = Budget { tune_population: 12, tune_generations: 8, ei_population: 12, ei_generations: 8 };
        c
    }

    #[test]
    fn ids_round_trip_and_uk2_is_rejected_on_borehole() {
        for a in Algorithm::ALL {
            assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
        }
        assert!("uk3".parse::<Algorithm>().is_err());
        let err = Algorithm::Uk2.validate_for(Problem::Borehole, 40).unwrap_err();
        assert!(err.to_string().contains("45 terms"), "{err}");
        assert!(Algorithm::Uk1.validate_for(Problem::Borehole, 40).is_ok());
        let c = tiny(Problem::Branin, vec![]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn variants_share_initial_designs_and_runs_are_complete() {
        let c = tiny(Problem::Branin, vec![Algorithm::Ok, Algorithm::Uk1]);
        let out = run_experiment(&c, 2).unwrap();
        assert_eq!(out.records.len(), 6);
        assert_eq!(out.failures(), 0);
        for rep in 0..3 {
            let rows: Vec<&RunRecord> = out.records.iter().filter(|r| r.rep == rep).collect();
            assert_eq!(rows[0].evaluations[..20], rows[1].evaluations[..20]);
        }
        for r in &out.records {
            assert_eq!(r.evaluations.len(), 22);
            assert_eq!(r.best_trajectory.len(), 3);
            assert!(r.improvement_trajectory.windows(2).all(|w| w[1] <= w[0]));
            assert!(r.initial_rmse.unwrap() > 0.0);
        }
        assert_eq!(out.summary.len(), 6);
    }

    #[test]
    fn outputs_are_reproducible() {
        let c = tiny(Problem::Hosaki, vec![Algorithm::Ok, Algorithm::PckTensor]);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let wa = write_outcome(&run_experiment(&c, 0).unwrap(), a.path()).unwrap();
        let wb = write_outcome(&run_experiment(&c, 1).unwrap(), b.path()).unwrap();
        assert_eq!(wa.len(), wb.len());
        for (pa, pb) in wa.iter().zip(&wb) {
            assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap(), "{}", pa.display());
        }
        let csv = fs::read_to_string(a.path().join("runs/hosaki_ok_rep000.csv")).unwrap();
        assert!(csv.starts_with("problem,algorithm,rep,iteration,phase,x_1,x_2,y_raw,best_so_far,improvement\n"));
        assert_eq!(csv.lines().count(), 1 + 14);
    }
}
