//! Maximum-likelihood tuning of the correlation parameters θ.

mod bfgs;
mod ga;

pub use bfgs::{bfgs_maximize, BfgsConfig, BfgsResult};
pub use ga::{ga_maximize, GaConfig, GaResult};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kriging::{ExperimentalDesign, Hyperparameters, LikelihoodObjective, LOG10_THETA_BOUNDS};
use crate::par::Exec;
use crate::poly::BasisSpec;

/// Composite tuning strategy used inside trend-selection scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TuneKind {
    /// GA followed by BFGS for every fit.
    #[serde(rename = "exhaustive")]
    ExhaustiveGaBfgs,
    /// GA+BFGS on the first fit, warm-started BFGS afterwards and a GA+BFGS
    /// re-polish of the final trend.
    #[default]
    #[serde(rename = "simplified")]
    SimplifiedGaBfgs,
    /// BFGS from a random start for every fit.
    #[serde(rename = "bfgs")]
    BfgsOnly,
}

/// Strategy and budgets for θ tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneStrategy {
    pub kind: TuneKind,
    pub ga: GaConfig,
    pub bfgs: BfgsConfig,
    pub seed: u64,
    /// Parallelism of GA population evaluation.
    pub exec: Exec,
}

impl TuneStrategy {
    pub fn new(kind: TuneKind, seed: u64) -> Self {
        TuneStrategy { kind, ga: GaConfig::default(), bfgs: BfgsConfig::default(), seed, exec: Exec::Sequential }
    }

    pub fn validate(&self) -> Result<()> {
        self.ga.validate()
    }
}

/// Warm-start memory of the simplified strategy, confined to one scan.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TuneState {
    pub last_optimum_log_theta: Option<Vec<f64>>,
    pub iteration: usize,
}

/// Where a fit sits inside a trend-selection scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TunePhase {
    /// First fit of a scan (the constant-trend model).
    First,
    /// Any later candidate trend.
    Subsequent,
    /// Re-tune of the selected trend.
    Final,
}

/// Tuned hyperparameters and the attained concentrated log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuned {
    pub theta: Hyperparameters,
    pub log_likelihood: f64,
    pub evaluations: usize,
}

fn log_bounds(m: usize) -> Vec<(f64, f64)> {
    vec![LOG10_THETA_BOUNDS; m]
}

fn finish(x: Vec<f64>, value: f64, evaluations: usize) -> Result<Tuned> {
    if !value.is_finite() {
        return Err(Error::Degenerate("the likelihood is undefined for every θ tried".into()));
    }
    Ok(Tuned { theta: Hyperparameters::from_log10(&x)?, log_likelihood: value, evaluations })
}

fn ga_bfgs(obj: &LikelihoodObjective<'_>, strategy: &TuneStrategy) -> Result<(Vec<f64>, f64, usize)> {
    let bounds = log_bounds(obj.dim());
    let f = |x: &[f64]| obj.eval_log10(x);
    let ga = ga_maximize(&f, &bounds, &strategy.ga, strategy.seed, strategy.exec)?;
    let local = bfgs_maximize(&f, &ga.best, &bounds, &strategy.bfgs);
    Ok((local.x, local.value, ga.evaluations + local.evaluations))
}

/// GA then BFGS on the concentrated log-likelihood.
pub fn tune_exhaustive(design: &ExperimentalDesign, basis: &BasisSpec, strategy: &TuneStrategy) -> Result<Tuned> {
    strategy.validate()?;
    let obj = LikelihoodObjective::new(design, basis)?;
    let (x, v, evals) = ga_bfgs(&obj, strategy)?;
    finish(x, v, evals)
}

/// One step of the simplified strategy; updates `state` with the optimum.
pub fn tune_simplified(
    state: &mut TuneState,
    design: &ExperimentalDesign,
    basis: &BasisSpec,
    is_first_trend_iteration: bool,
    is_final_trend: bool,
    strategy: &TuneStrategy,
) -> Result<Tuned> {
    strategy.validate()?;
    let obj = LikelihoodObjective::new(design, basis)?;
    let bounds = log_bounds(obj.dim());
    let f = |x: &[f64]| obj.eval_log10(x);
    let warm = state.last_optimum_log_theta.clone().filter(|w| w.len() == obj.dim());
    let (x, v, evals) = match (is_first_trend_iteration || is_final_trend, warm) {
        (false, Some(start)) => {
            let r = bfgs_maximize(&f, &start, &bounds, &strategy.bfgs);
            (r.x, r.value, r.evaluations)
        }
        (_, warm) => {
            let (mut x, mut v, mut evals) = ga_bfgs(&obj, strategy)?;
            // The re-polish keeps the warm optimum if the global search did not beat it.
            if let (true, Some(start)) = (is_final_trend, warm) {
                let r = bfgs_maximize(&f, &start, &bounds, &strategy.bfgs);
                evals += r.evaluations;
                if r.value > v {
                    (x, v) = (r.x, r.value);
                }
            }
            (x, v, evals)
        }
    };
    let tuned = finish(x, v, evals)?;
    state.last_optimum_log_theta = Some(tuned.theta.to_log10());
    state.iteration += 1;
    Ok(tuned)
}

/// BFGS from a random start drawn from the strategy seed and the state counter.
pub fn tune_bfgs_only(
    state: &mut TuneState,
    design: &ExperimentalDesign,
    basis: &BasisSpec,
    strategy: &TuneStrategy,
) -> Result<Tuned> {
    let obj = LikelihoodObjective::new(design, basis)?;
    let bounds = log_bounds(obj.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(strategy.seed ^ (state.iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let start: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
    let f = |x: &[f64]| obj.eval_log10(x);
    let r = bfgs_maximize(&f, &start, &bounds, &strategy.bfgs);
    let tuned = finish(r.x, r.value, r.evaluations)?;
    state.last_optimum_log_theta = Some(tuned.theta.to_log10());
    state.iteration += 1;
    Ok(tuned)
}

/// Dispatches one fit of a scan to the configured strategy.
pub fn tune(
    strategy: &TuneStrategy,
    state: &mut TuneState,
    design: &ExperimentalDesign,
    basis: &BasisSpec,
    phase: TunePhase,
) -> Result<Tuned> {
    match strategy.kind {
        TuneKind::ExhaustiveGaBfgs => {
            let t = tune_exhaustive(design, basis, strategy)?;
            state.last_optimum_log_theta = Some(t.theta.to_log10());
            state.iteration += 1;
            Ok(t)
        }
        TuneKind::SimplifiedGaBfgs => {
            tune_simplified(state, design, basis, phase == TunePhase::First, phase == TunePhase::Final, strategy)
        }
        TuneKind::BfgsOnly => tune_bfgs_only(state, design, basis, strategy),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kriging::concentrated_log_likelihood;
    use nalgebra::DMatrix;

    fn sin_design(n: usize) -> ExperimentalDesign {
        let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (3.0 * v).sin()).collect();
        ExperimentalDesign::from_normalized(DMatrix::from_column_slice(n, 1, &x), vec![(0.0, 1.0)], &y).unwrap()
    }

    #[test]
    fn exhaustive_beats_random_search() {
        let d = sin_design(5);
        let basis = BasisSpec::constant(1);
        let s = TuneStrategy::new(TuneKind::ExhaustiveGaBfgs, 3);
        let t = tune_exhaustive(&d, &basis, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let th = Hyperparameters::from_log10(&[rng.random_range(-3.0..3.0)]).unwrap();
            assert!(t.log_likelihood >= concentrated_log_likelihood(&d, &basis, &th) - 1e-9);
        }
        assert_eq!(t, tune_exhaustive(&d, &basis, &s).unwrap());
    }

    #[test]
    fn minimal_design_completes() {
        let d = sin_design(2);
        let t = tune_exhaustive(&d, &BasisSpec::constant(1), &TuneStrategy::new(TuneKind::ExhaustiveGaBfgs, 1)).unwrap();
        assert!(t.theta.values()[0] >= 1e-3 && t.theta.values()[0] <= 1e3);
    }

    #[test]
    fn simplified_first_step_equals_exhaustive_and_warm_start_ascends() {
        let d = sin_design(7);
        let basis = BasisSpec::constant(1);
        let s = TuneStrategy::new(TuneKind::SimplifiedGaBfgs, 8);
        let mut state = TuneState::default();
        let first = tune_simplified(&mut state, &d, &basis, true, false, &s).unwrap();
        assert_eq!(first, tune_exhaustive(&d, &basis, &s).unwrap());
        let second = tune_simplified(&mut state, &d, &basis, false, false, &s).unwrap();
        assert!(second.log_likelihood >= first.log_likelihood);
        assert_eq!(state.iteration, 2);
    }
}
