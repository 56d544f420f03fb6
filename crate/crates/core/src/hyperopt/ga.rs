use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Settings of the real-coded genetic algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    /// Maximum number of generations.
    pub generations: usize,
    /// Stop after this many generations without a strict improvement of the
    /// elite (`None` runs all generations).
    pub stall_generations: Option<usize>,
    /// Mutation standard deviation as a fraction of each coordinate's width.
    pub mutation_scale: f64,
    /// BLX-α crossover extension.
    pub blend_alpha: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 100,
            generations: 200,
            stall_generations: Some(50),
            mutation_scale: 0.1 / 6.0,
            blend_alpha: 0.5,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::InvalidArgument(format!("GA population must be >= 4, got {}", self.population)));
        }
        if self.generations < 1 {
            return Err(Error::InvalidArgument("GA needs at least one generation".into()));
        }
        if !(self.mutation_scale >= 0.0 && self.blend_alpha >= 0.0) {
            return Err(Error::InvalidArgument("GA mutation scale and blend α must be non-negative".into()));
        }
        Ok(())
    }
}

/// Outcome of a GA run.
#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub best: Vec<f64>,
    pub value: f64,
    /// Elite objective value after each generation (non-decreasing).
    pub history: Vec<f64>,
    pub evaluations: usize,
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::InvalidArgument("search space must have at least one dimension".into()));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!("invalid search bound [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Maximizes `objective` over the box `bounds` with an elitist real-coded GA:
/// size-2 tournaments, BLX-α blend crossover, Gaussian mutation at rate `1/m`.
///
/// NaN objective values are treated as `-∞`. Deterministic for a given seed
/// regardless of `exec`, since all random draws happen sequentially.
pub fn ga_maximize<F>(objective: &F, bounds: &[(f64, f64)], config: &GaConfig, seed: u64, exec: Exec) -> Result<GaResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    check_bounds(bounds)?;
    let m = bounds.len();
    let np = config.population;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng, &(lo, hi): &(f64, f64)| if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let mut pop: Vec<Vec<f64>> = (0..np).map(|_| bounds.iter().map(|b| sample(&mut rng, b)).collect()).collect();
    let mut fit: Vec<f64> = par::map(exec, &pop, |x| score(objective(x)));
    let mut evaluations = np;
    let elite_of = |fit: &[f64]| {
        let mut best = 0;
        for (i, &v) in fit.iter().enumerate() {
            if v > fit[best] {
                best = i;
            }
        }
        best
    };
    let mut elite = elite_of(&fit);
    let mut history = Vec::with_capacity(config.generations);
    let mut stall = 0;
    let mutation_rate = 1.0 / m as f64;
    let sigmas: Vec<f64> = bounds.iter().map(|(lo, hi)| (hi - lo) * config.mutation_scale).collect();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    for _ in 0..config.generations {
        let tournament = |rng: &mut ChaCha8Rng, fit: &[f64]| {
            let a = rng.random_range(0..np);
            let b = rng.random_range(0..np);
            if fit[b] > fit[a] || (fit[b] == fit[a] && b < a) {
                b
            } else {
                a
            }
        };
        let mut children = Vec::with_capacity(np - 1);
        while children.len() < np - 1 {
            let pa = &pop[tournament(&mut rng, &fit)];
            let pb = &pop[tournament(&mut rng, &fit)];
            let child: Vec<f64> = (0..m)
                .map(|k| {
                    let (lo, hi) = bounds[k];
                    let (a, b) = (pa[k].min(pb[k]), pa[k].max(pb[k]));
                    let ext = config.blend_alpha * (b - a);
                    let u: f64 = rng.random();
                    let mut v = a - ext + u * (b - a + 2.0 * ext);
                    if rng.random::<f64>() < mutation_rate {
                        v += sigmas[k] * std_normal.sample(&mut rng);
                    }
                    v.clamp(lo, hi)
                })
                .collect();
            children.push(child);
        }
        let child_fit = par::map(exec, &children, |x| score(objective(x)));
        evaluations += children.len();
        let prev_best = fit[elite];
        let mut next_pop = Vec::with_capacity(np);
        let mut next_fit = Vec::with_capacity(np);
        next_pop.push(pop[elite].clone());
        next_fit.push(fit[elite]);
        next_pop.extend(children);
        next_fit.extend(child_fit);
        pop = next_pop;
        fit = next_fit;
        elite = elite_of(&fit);
        history.push(fit[elite]);
        if fit[elite] > prev_best {
            stall = 0;
        } else {
            stall += 1;
            if config.stall_generations.is_some_and(|s| stall >= s) {
                break;
            }
        }
    }
    Ok(GaResult { best: pop[elite].clone(), value: fit[elite], history, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bowl(x: &[f64]) -> f64 {
        -x.iter().zip([0.7, -1.2]).map(|(a, c)| (a - c).powi(2)).sum::<f64>()
    }

    #[test]
    fn finds_interior_optimum() {
        let r = ga_maximize(&bowl, &[(-3.0, 3.0); 2], &GaConfig::default(), 11, Exec::Sequential).unwrap();
        assert!((r.best[0] - 0.7).abs() < 0.05 && (r.best[1] + 1.2).abs() < 0.05, "{:?}", r.best);
    }

    #[test]
    fn elitism_and_determinism() {
        let cfg = GaConfig { generations: 30, stall_generations: None, ..GaConfig::default() };
        let a = ga_maximize(&bowl, &[(-3.0, 3.0); 2], &cfg, 5, Exec::Sequential).unwrap();
        let b = ga_maximize(&bowl, &[(-3.0, 3.0); 2], &cfg, 5, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(a.history.len(), 30);
    }

    #[test]
    fn rejects_tiny_population() {
        let cfg = GaConfig { population: 1, ..GaConfig::default() };
        assert!(ga_maximize(&bowl, &[(-3.0, 3.0); 2], &cfg, 0, Exec::Sequential).is_err());
    }

    #[test]
    fn survives_sentinel_regions() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NEG_INFINITY } else { -x[0] * x[0] + x[0] };
        let r = ga_maximize(&f, &[(-3.0, 3.0)], &GaConfig::default(), 2, Exec::Sequential).unwrap();
        assert!((r.best[0] - 0.5).abs() < 0.05);
    }
}
