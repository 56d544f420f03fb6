//! Expected-improvement infill and the efficient global optimization loop.

mod ei;

pub use ei::{expected_improvement, expected_improvement_normal, normal_cdf, normal_pdf};

use log::debug;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hyperopt::{bfgs_maximize, ga_maximize, BfgsConfig, GaConfig, TuneStrategy};
use crate::kriging::{denormalize_point, ExperimentalDesign, KrigingModel};
use crate::par::Exec;
use crate::seed::{derive_seed, streams};
use crate::trend::{build_surrogate, SelectionTrace, Surrogate, SurrogateKind};

/// Minimum distance (normalized units) between design points.
pub const GUARD_RADIUS: f64 = 1e-8;

/// Predictive standard deviations below this fraction of the response scale
/// count as zero in EI.
pub const EI_S_FLOOR: f64 = 1e-12;

/// EI of a fitted model at a normalized point, in raw response units.
#[derive(Debug, Clone, Copy)]
pub struct AcquisitionContext<'a> {
    pub model: &'a KrigingModel,
    /// Best observed raw response.
    pub y_min: f64,
}

impl<'a> AcquisitionContext<'a> {
    pub fn new(model: &'a KrigingModel) -> Self {
        AcquisitionContext { model, y_min: model.design().best().1 }
    }

    /// EI in standardized units (raw EI divided by the response scale).
    pub fn ei_std(&self, u: &[f64]) -> f64 {
        let d = self.model.design();
        let Ok((mean, factor)) = self.model.predict_std(u) else { return f64::NEG_INFINITY };
        let s = (self.model.sigma2() * factor.max(0.0)).sqrt();
        if s < EI_S_FLOOR {
            return 0.0;
        }
        expected_improvement(mean, s, (self.y_min - d.mean_y()) / d.std_y())
    }

    /// EI in raw response units.
    pub fn ei(&self, u: &[f64]) -> f64 {
        self.ei_std(u) * self.model.design().std_y()
    }
}

/// Budgets of the GA + quasi-Newton EI search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EiSearch {
    pub ga: GaConfig,
    pub bfgs: BfgsConfig,
    pub exec: Exec,
}

impl Default for EiSearch {
    fn default() -> Self {
        EiSearch { ga: GaConfig::default(), bfgs: BfgsConfig::default(), exec: Exec::Sequential }
    }
}

/// Maximizes EI over `[-1, 1]^m`: GA, then a bounded BFGS polish from the GA
/// incumbent. Returns the normalized point and its raw EI.
pub fn maximize_ei(model: &KrigingModel, search: &EiSearch, seed: u64) -> Result<(Vec<f64>, f64)> {
    let ctx = AcquisitionContext::new(model);
    let bounds = vec![(-1.0, 1.0); model.design().dim()];
    let f = |u: &[f64]| ctx.ei_std(u);
    let ga = ga_maximize(&f, &bounds, &search.ga, seed, search.exec)?;
    let polished = bfgs_maximize(&f, &ga.best, &bounds, &search.bfgs);
    let (x, v) = if polished.value > ga.value { (polished.x, polished.value) } else { (ga.best, ga.value) };
    Ok((x, v.max(0.0) * model.design().std_y()))
}

/// Moves `u` away from any design point closer than `radius`, along a random
/// direction, to exactly guard distance from that point.
pub fn apply_guard(design: &ExperimentalDesign, u: &[f64], radius: f64, seed: u64) -> Vec<f64> {
    if design.min_distance(u) >= radius {
        return u.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nearest = (0..design.n())
        .map(|i| design.point(i))
        .min_by(|a, b| dist(a, u).total_cmp(&dist(b, u)))
        .expect("designs have at least two points");
    let step = radius * (1.0 + 1e-6);
    for _ in 0..100 {
        let dir: Vec<f64> = (0..u.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let cand: Vec<f64> = nearest.iter().zip(&dir).map(|(p, d)| p + step * d / norm).collect();
        if cand.iter().all(|v| (-1.0..=1.0).contains(v)) && design.min_distance(&cand) >= radius {
            return cand;
        }
    }
    // Corner case: fall back to the reflected coordinate-wise step.
    nearest.iter().map(|&p| if p + step <= 1.0 { p + step } else { p - step }).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Settings of one EGO run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoConfig {
    pub surrogate: SurrogateKind,
    pub tune: TuneStrategy,
    pub ei: EiSearch,
    pub n_upd: usize,
    pub guard_radius: f64,
}

impl EgoConfig {
    pub fn new(surrogate: SurrogateKind, tune: TuneStrategy, n_upd: usize) -> Self {
        EgoConfig { surrogate, tune, ei: EiSearch::default(), n_upd, guard_radius: GUARD_RADIUS }
    }
}

/// One infill step.
#[derive(Debug, Clone)]
pub struct EgoStep {
    pub iteration: usize,
    /// Added point in raw coordinates.
    pub point: Vec<f64>,
    /// Objective value (as optimized) at the added point.
    pub value: f64,
    pub best_value: f64,
    pub ei: f64,
    pub trace: Option<SelectionTrace>,
    /// Whether the duplicate guard moved the proposal.
    pub guarded: bool,
}

/// Evolving state of an EGO run.
#[derive(Debug, Clone)]
pub struct EgoState {
    pub design: ExperimentalDesign,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub iteration: usize,
    pub history: Vec<EgoStep>,
}

impl EgoState {
    pub fn new(design: ExperimentalDesign) -> Result<Self> {
        let (i, v) = design.best();
        let best_point = denormalize_point(&design.point(i), design.bounds())?;
        Ok(EgoState { design, best_point, best_value: v, iteration: 0, history: Vec::new() })
    }
}

/// Builds the surrogate, maximizes EI, guards against duplicates, evaluates
/// the objective (raw coordinates) and grows the design. Returns the
/// surrogate the proposal was made with. On error the state is left unchanged.
pub fn ego_step<F>(state: &mut EgoState, config: &EgoConfig, objective: &F, seed: u64) -> Result<Surrogate>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let iter_seed = derive_seed(seed, state.iteration as u64);
    let mut tune = config.tune;
    tune.seed = derive_seed(iter_seed, streams::TUNE);
    let surrogate = build_surrogate(config.surrogate, &state.design, &tune)?;
    let (u, ei) = maximize_ei(&surrogate.model, &config.ei, derive_seed(iter_seed, streams::EI))?;
    let guarded_u = apply_guard(&state.design, &u, config.guard_radius, derive_seed(iter_seed, streams::GUARD));
    let guarded = guarded_u != u;
    let x = denormalize_point(&guarded_u, state.design.bounds())?;
    let y = objective(&x)?;
    if !y.is_finite() {
        return Err(Error::Objective(format!("non-finite objective value at {x:?}")));
    }
    let design = state.design.with_point(&guarded_u, y)?;
    debug!("iteration {}: y = {y}, EI = {ei:e}", state.iteration + 1);
    state.design = design;
    state.iteration += 1;
    if y < state.best_value {
        state.best_value = y;
        state.best_point = x.clone();
    }
    state.history.push(EgoStep {
        iteration: state.iteration,
        point: x,
        value: y,
        best_value: state.best_value,
        ei,
        trace: surrogate.trace.clone(),
        guarded,
    });
    Ok(surrogate)
}

/// Runs `config.n_upd` EGO steps from an evaluated initial design. On failure
/// returns the partial state alongside the error.
pub fn ego_loop<F>(
    design: ExperimentalDesign,
    config: &EgoConfig,
    objective: &F,
    seed: u64,
) -> std::result::Result<EgoState, (Box<EgoState>, Error)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut state = match EgoState::new(design.clone()) {
        Ok(s) => s,
        Err(e) => {
            let (_, v) = design.best();
            let state = EgoState { design, best_point: Vec::new(), best_value: v, iteration: 0, history: Vec::new() };
            return Err((Box::new(state), e));
        }
    };
    for _ in 0..config.n_upd {
        if let Err(e) = ego_step(&mut state, config, objective, seed) {
            return Err((Box::new(state), e));
        }
    }
    Ok(state)
}
