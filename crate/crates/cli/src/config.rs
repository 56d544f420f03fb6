//! Command settings merged from a TOML file and command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use ukego::harness::{Algorithm, Budget, ExperimentConfig, Problem, DEFAULT_N_V};
use ukego::hyperopt::TuneKind;
use ukego::poly::Scheme;

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Benchmark problem (branin, sasena, hosaki, hartman6, borehole); repeatable for `benchmark`.
    #[arg(long = "problem")]
    pub problems: Vec<String>,
    /// Algorithm id (ok, uk1, uk2, bk, pck, pck-to, pck-tf, pck-tensor, uk1-freq); repeatable.
    #[arg(long = "algo")]
    pub algos: Vec<String>,
    /// Maximum trend order for BK/PCK.
    #[arg(long)]
    pub pmax: Option<u32>,
    /// Candidate scheme for `--algo pck` (total-order, two-factor, tensor).
    #[arg(long)]
    pub scheme: Option<String>,
    /// Initial sample size.
    #[arg(long = "n-init", visible_alias = "n")]
    pub n_init: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Hyperparameter tuning strategy (exhaustive, simplified, bfgs).
    #[arg(long)]
    pub tune: Option<String>,
    /// Output directory; every file is written inside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flags of the EGO-running subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Number of infill updates.
    #[arg(long = "n-upd")]
    pub n_upd: Option<usize>,
    /// Repetitions with independent initial designs.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Validation points for the initial-surrogate RMSE (0 disables).
    #[arg(long)]
    pub nv: Option<usize>,
    /// Named preset; `paper-synthetic` runs the five synthetic problems with their published sizes.
    #[arg(long)]
    pub preset: Option<String>,
}

/// Config-file schema; keys mirror the long flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default, alias = "problems")]
    pub problem: Option<OneOrMany>,
    #[serde(default, alias = "algos")]
    pub algo: Option<OneOrMany>,
    pub pmax: Option<u32>,
    pub scheme: Option<String>,
    #[serde(alias = "n-init")]
    pub n_init: Option<usize>,
    #[serde(alias = "n-upd")]
    pub n_upd: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub tune: Option<String>,
    pub nv: Option<usize>,
    pub preset: Option<String>,
    pub budget: Option<Budget>,
}

/// A string or a list of strings.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub problems: Vec<Problem>,
    /// Raw algorithm ids; `pck` is resolved per problem.
    pub algos: Vec<String>,
    pub pmax: Option<u32>,
    pub scheme: Option<Scheme>,
    pub n_init: Option<usize>,
    pub n_upd: Option<usize>,
    pub reps: Option<usize>,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub tune: TuneKind,
    pub nv: Option<usize>,
    pub preset: Option<String>,
    pub budget: Budget,
}

pub const PAPER_SYNTHETIC: &str = "paper-synthetic";

pub fn parse_scheme(s: &str) -> Result<Scheme> {
    Ok(match s {
        "total-order" | "to" => Scheme::TotalOrder,
        "two-factor" | "tf" => Scheme::TwoFactor,
        "tensor" | "tensor-product" => Scheme::TensorProduct,
        other => bail!("unknown scheme '{other}' (expected total-order, two-factor or tensor)"),
    })
}

pub fn parse_tune(s: &str) -> Result<TuneKind> {
    Ok(match s {
        "exhaustive" => TuneKind::ExhaustiveGaBfgs,
        "simplified" => TuneKind::SimplifiedGaBfgs,
        "bfgs" => TuneKind::BfgsOnly,
        other => bail!("unknown tune strategy '{other}' (expected exhaustive, simplified or bfgs)"),
    })
}

/// Merges flags over the file config.
pub fn resolve(file: FileConfig, common: &CommonArgs, run: &RunArgs) -> Result<Settings> {
    let problems = if common.problems.is_empty() {
        file.problem.map(OneOrMany::into_vec).unwrap_or_default()
    } else {
        common.problems.clone()
    };
    let problems = problems.iter().map(|p| p.parse::<Problem>()).collect::<Result<Vec<_>, _>>()?;
    let algos =
        if common.algos.is_empty() { file.algo.map(OneOrMany::into_vec).unwrap_or_default() } else { common.algos.clone() };
    let scheme = common.scheme.clone().or(file.scheme).map(|s| parse_scheme(&s)).transpose()?;
    let tune = common.tune.clone().or(file.tune).map(|s| parse_tune(&s)).transpose()?.unwrap_or_default();
    let preset = run.preset.clone().or(file.preset);
    if let Some(p) = &preset {
        if p != PAPER_SYNTHETIC {
            bail!("unknown preset '{p}' (expected {PAPER_SYNTHETIC})");
        }
    }
    Ok(Settings {
        problems,
        algos,
        pmax: common.pmax.or(file.pmax),
        scheme,
        n_init: common.n_init.or(file.n_init),
        n_upd: run.n_upd.or(file.n_upd),
        reps: run.reps.or(file.reps),
        seed: common.seed.or(file.seed).unwrap_or(0),
        jobs: run.jobs.or(file.jobs).unwrap_or(0),
        out: common.out.clone().or(file.out),
        tune,
        nv: run.nv.or(file.nv),
        preset,
        budget: file.budget.unwrap_or_default(),
    })
}

/// Resolves an algorithm id for `problem`; `pck` takes the configured scheme
/// or the problem's default.
pub fn resolve_algorithm(id: &str, problem: Problem, scheme: Option<Scheme>) -> Result<Algorithm> {
    if id == "pck" {
        return Ok(Algorithm::pck(scheme.unwrap_or_else(|| problem.pck_scheme()))?);
    }
    Ok(id.parse::<Algorithm>()?)
}

/// Variants compared on `problem` when none are given with the preset.
pub fn paper_algorithms(problem: Problem) -> Vec<Algorithm> {
    let mut v = vec![Algorithm::Ok, Algorithm::Uk1];
    if Algorithm::Uk2.validate_for(problem, problem.n_int()).is_ok() {
        v.push(Algorithm::Uk2);
    }
    v.push(Algorithm::Bk);
    if problem.dim() == 2 {
        v.push(Algorithm::PckTensor);
    } else {
        v.extend([Algorithm::PckTo, Algorithm::PckTf]);
    }
    v
}

impl Settings {
    /// Experiment on one problem with the given variants and defaults.
    pub fn experiment(&self, problem: Problem, algorithms: Vec<Algorithm>, default_reps: usize, default_nv: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::for_problem(problem, algorithms);
        c.p_max = self.pmax.unwrap_or(c.p_max);
        c.tune = self.tune;
        c.n_int = self.n_init.unwrap_or(c.n_int);
        c.n_upd = self.n_upd.unwrap_or(c.n_upd);
        c.reps = self.reps.unwrap_or(default_reps);
        c.seed = self.seed;
        c.n_v = self.nv.unwrap_or(default_nv);
        c.budget = self.budget;
        c
    }

    pub fn algorithms_for(&self, problem: Problem) -> Result<Vec<Algorithm>> {
        self.algos.iter().map(|a| resolve_algorithm(a, problem, self.scheme)).collect()
    }
}

pub const BENCHMARK_DEFAULT_NV: usize = DEFAULT_N_V;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str(
            "problem = \"hosaki\"\nalgo = [\"ok\", \"bk\"]\nseed = 4\nreps = 3\n[budget]\ntune_population = 10\ntune_generations = 5\nei_population = 10\nei_generations = 5\n",
        )
        .unwrap();
        let common = CommonArgs { seed: Some(9), ..CommonArgs::default() };
        let s = resolve(file, &common, &RunArgs::default()).unwrap();
        assert_eq!(s.problems, vec![Problem::Hosaki]);
        assert_eq!(s.algos, vec!["ok", "bk"]);
        assert_eq!((s.seed, s.reps), (9, Some(3)));
        assert_eq!(s.budget.tune_population, 10);
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
    }

    #[test]
    fn pck_alias_and_paper_sets() {
        assert_eq!(resolve_algorithm("pck", Problem::Branin, None).unwrap(), Algorithm::PckTensor);
        assert_eq!(resolve_algorithm("pck", Problem::Borehole, None).unwrap(), Algorithm::PckTo);
        assert_eq!(resolve_algorithm("pck", Problem::Borehole, Some(Scheme::TwoFactor)).unwrap(), Algorithm::PckTf);
        assert!(!paper_algorithms(Problem::Borehole).contains(&Algorithm::Uk2));
        assert!(paper_algorithms(Problem::Hartman6).contains(&Algorithm::Uk2));
    }
}
