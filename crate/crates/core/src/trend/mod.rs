//! Automatic trend selection: blind Kriging forward selection, polynomial-chaos
//! Kriging via LARS, a frequentist coefficient-magnitude ranking, and fixed
//! universal Kriging, all compared by leave-one-out error.

mod bk;
mod lars;

pub use bk::{
    bk_k_factors, bk_posterior_beta, candidate_matrix, k_diag_entry, k_factors_from_corr, BkPosterior,
    TAU2_OVER_SIGMA2,
};
pub use lars::{lars_select, standardize_columns, LarsPath};

use std::fmt;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperopt::{tune, TuneKind, TunePhase, TuneState, TuneStrategy};
use crate::kriging::{ExperimentalDesign, KrigingModel};
use crate::par;
use crate::poly::{generate_index_set, BasisSpec, Family, MultiIndex, MultiIndexSet, Scheme};

/// Number of consecutive strict LOOCV increases that stops a forward scan.
pub const EARLY_STOP_INCREASES: usize = 3;

/// Surrogate construction recipe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SurrogateKind {
    /// Ordinary Kriging (constant trend).
    Ordinary,
    /// Universal Kriging with the full total-order Legendre basis of order `p`.
    UniversalFixed { p: u32 },
    /// Blind Kriging over orders `1..=p_max` of the two-factor dictionary.
    Blind { p_max: u32 },
    /// Optimal polynomial-chaos Kriging over orders `1..=p_max`.
    PolynomialChaos { scheme: Scheme, p_max: u32 },
    /// Frequentist ranking of the total-order basis of order `p`.
    Frequentist { p: u32 },
}

impl fmt::Display for SurrogateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurrogateKind::Ordinary => write!(f, "OK"),
            SurrogateKind::UniversalFixed { p } => write!(f, "UK-{p}"),
            SurrogateKind::Blind { p_max } => write!(f, "BK(pmax={p_max})"),
            SurrogateKind::PolynomialChaos { scheme, p_max } => write!(f, "PCK-{scheme}(pmax={p_max})"),
            SurrogateKind::Frequentist { p } => write!(f, "UK-{p}(F)"),
        }
    }
}

/// One forward scan at a fixed candidate order `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderScan {
    pub p: u32,
    /// Selected non-constant terms in order of entry.
    pub ordered_terms: Vec<MultiIndex>,
    /// LOOCV RMSE per step; entry 0 is the constant-only model.
    pub loocv_per_step: Vec<f64>,
    /// Terms whose model could not be fitted (singular trend, degenerate fit).
    pub rejected_terms: Vec<MultiIndex>,
    pub early_stopped: bool,
    /// Set when this order's dictionary equals that of an earlier order, in
    /// which case the scan is not repeated.
    pub duplicate_of: Option<u32>,
    /// Blind-Kriging posteriors at each selection step.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bk_posteriors: Vec<BkPosterior>,
}

impl OrderScan {
    fn new(p: u32, ok_loocv: f64) -> Self {
        OrderScan {
            p,
            ordered_terms: Vec::new(),
            loocv_per_step: vec![ok_loocv],
            rejected_terms: Vec::new(),
            early_stopped: false,
            duplicate_of: None,
            bk_posteriors: Vec::new(),
        }
    }

    /// Index of the lowest LOOCV (earliest on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.loocv_per_step.iter().enumerate() {
            if v < self.loocv_per_step[best] {
                best = i;
            }
        }
        best
    }
}

/// Record of a trend-selection run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionTrace {
    pub scans: Vec<OrderScan>,
    pub p_chosen: u32,
    /// Number of non-constant terms in the chosen trend.
    pub chosen_prefix_length: usize,
    /// LOOCV of the chosen step during the scan.
    pub chosen_loocv: f64,
    /// LOOCV of the returned model (after any final re-tune).
    pub final_loocv: f64,
    /// Set when every non-constant candidate failed to fit.
    pub fallback_to_ok: bool,
}

/// A fitted surrogate and, for selection-based kinds, its trace.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub kind: SurrogateKind,
    pub model: KrigingModel,
    pub trace: Option<SelectionTrace>,
}

/// Candidate dictionary of order `p`. `TwoFactor` needs quadratic terms, so
/// orders below 2 fall back to the total-order set of that order.
pub fn candidate_set(m: usize, p: u32, scheme: Scheme) -> Result<MultiIndexSet> {
    if p == 0 {
        return Ok(MultiIndexSet::constant(m));
    }
    match scheme {
        Scheme::TwoFactor if p < 2 => generate_index_set(m, p, Scheme::TotalOrder),
        s => generate_index_set(m, p, s),
    }
}

struct Step {
    model: KrigingModel,
    loocv: f64,
}

fn fit_tuned(
    design: &ExperimentalDesign,
    basis: &BasisSpec,
    strategy: &TuneStrategy,
    state: &mut TuneState,
    phase: TunePhase,
) -> Result<KrigingModel> {
    let tuned = tune(strategy, state, design, basis, phase)?;
    KrigingModel::fit(design, basis, &tuned.theta)
}

fn fit_ok(design: &ExperimentalDesign, strategy: &TuneStrategy) -> Result<(Step, TuneState)> {
    let mut state = TuneState::default();
    let model = fit_tuned(design, &BasisSpec::constant(design.dim()), strategy, &mut state, TunePhase::First)?;
    let loocv = model.loocv_rmse()?;
    Ok((Step { model, loocv }, state))
}

/// Largest number of non-constant terms whose models still admit LOOCV.
fn max_terms(design: &ExperimentalDesign) -> usize {
    design.n().saturating_sub(3)
}

type NextTerm<'a> = dyn FnMut(&KrigingModel, &[MultiIndex], &[MultiIndex], &mut OrderScan) -> Result<Option<MultiIndex>> + 'a;

/// Grows the trend one term at a time, refitting and re-tuning at each step,
/// until the proposer is exhausted, the size limit is hit, or the LOOCV
/// increased [`EARLY_STOP_INCREASES`] times in a row.
fn forward_scan(
    design: &ExperimentalDesign,
    family: Family,
    ok: &Step,
    ok_state: &TuneState,
    strategy: &TuneStrategy,
    limit: usize,
    scan: &mut OrderScan,
    next: &mut NextTerm<'_>,
) -> Result<Option<Step>> {
    let mut state = ok_state.clone();
    let mut current = ok.model.clone();
    let mut best: Option<Step> = None;
    let mut increases = 0;
    let mut selected: Vec<MultiIndex> = Vec::new();
    while selected.len() < limit {
        let rejected = scan.rejected_terms.clone();
        let Some(term) = next(&current, &selected, &rejected, scan)? else { break };
        let mut trial = selected.clone();
        trial.push(term.clone());
        let basis = BasisSpec::new(family, MultiIndexSet::from_ordered_terms(design.dim(), &trial)?);
        let mut trial_state = state.clone();
        let fitted = fit_tuned(design, &basis, strategy, &mut trial_state, TunePhase::Subsequent)
            .and_then(|model| model.loocv_rmse().map(|l| (model, l)));
        match fitted {
            Ok((model, loocv)) => {
                state = trial_state;
                selected = trial;
                let prev = *scan.loocv_per_step.last().expect("scan starts with OK");
                scan.ordered_terms.push(term);
                scan.loocv_per_step.push(loocv);
                if best.as_ref().is_none_or(|b| loocv < b.loocv) {
                    best = Some(Step { model: model.clone(), loocv });
                }
                current = model;
                if loocv > prev {
                    increases += 1;
                    if increases >= EARLY_STOP_INCREASES {
                        scan.early_stopped = true;
                        break;
                    }
                } else {
                    increases = 0;
                }
            }
            Err(e) => {
                debug!("p={} term {term} rejected: {e}", scan.p);
                scan.rejected_terms.push(term);
            }
        }
    }
    Ok(best)
}

/// Proposer replaying a precomputed ordering.
fn replay(order: Vec<MultiIndex>) -> impl FnMut(&KrigingModel, &[MultiIndex], &[MultiIndex], &mut OrderScan) -> Result<Option<MultiIndex>> {
    let mut it = order.into_iter();
    move |_, _, _, _| Ok(it.next())
}

/// Picks the lowest-LOOCV step over all scans (ties: fewer terms, then lower
/// order), optionally re-tunes it, and assembles the trace.
fn finish_selection(
    kind: SurrogateKind,
    design: &ExperimentalDesign,
    strategy: &TuneStrategy,
    ok: Step,
    results: Vec<(OrderScan, Option<Step>)>,
) -> Surrogate {
    let mut chosen: (f64, usize, u32) = (ok.loocv, 0, results.first().map_or(0, |r| r.0.p));
    let mut chosen_model = ok.model;
    let mut any_accepted = false;
    let mut any_attempted = false;
    let mut scans = Vec::with_capacity(results.len());
    for (scan, best) in results {
        any_accepted |= !scan.ordered_terms.is_empty();
        any_attempted |= !scan.ordered_terms.is_empty() || !scan.rejected_terms.is_empty();
        if let Some(step) = best {
            let prefix = scan.argmin();
            let key = (step.loocv, prefix, scan.p);
            if key.0 < chosen.0 || (key.0 == chosen.0 && (key.1, key.2) < (chosen.1, chosen.2)) {
                chosen = key;
                chosen_model = step.model;
            }
        }
        scans.push(scan);
    }
    let mut final_model = chosen_model;
    if strategy.kind == TuneKind::SimplifiedGaBfgs && chosen.1 > 0 {
        let mut state = TuneState { last_optimum_log_theta: Some(final_model.theta().to_log10()), iteration: 1 };
        match fit_tuned(design, &final_model.basis().clone(), strategy, &mut state, TunePhase::Final) {
            Ok(m) if m.loocv_rmse().is_ok() => final_model = m,
            Ok(_) => {}
            Err(e) => debug!("final re-tune failed, keeping the scan model: {e}"),
        }
    }
    let final_loocv = final_model.loocv_rmse().unwrap_or(chosen.0);
    Surrogate {
        kind,
        model: final_model,
        trace: Some(SelectionTrace {
            scans,
            p_chosen: chosen.2,
            chosen_prefix_length: chosen.1,
            chosen_loocv: chosen.0,
            final_loocv,
            fallback_to_ok: any_attempted && !any_accepted,
        }),
    }
}

/// Distinct candidate dictionaries for `p_range`, with duplicates marked.
fn dictionaries(m: usize, p_range: &[u32], scheme: Scheme) -> Result<Vec<(u32, MultiIndexSet, Option<u32>)>> {
    let mut out: Vec<(u32, MultiIndexSet, Option<u32>)> = Vec::new();
    for &p in p_range {
        let set = candidate_set(m, p, scheme)?;
        let dup = out.iter().find(|(_, s, d)| d.is_none() && *s == set).map(|(q, _, _)| *q);
        out.push((p, set, dup));
    }
    Ok(out)
}

fn scan_orders<F>(
    design: &ExperimentalDesign,
    p_range: &[u32],
    scheme: Scheme,
    strategy: &TuneStrategy,
    ok: &Step,
    run: F,
) -> Result<Vec<(OrderScan, Option<Step>)>>
where
    F: Fn(&MultiIndexSet, &mut OrderScan) -> Result<Option<Step>> + Sync + Send,
{
    let dicts = dictionaries(design.dim(), p_range, scheme)?;
    let results = par::map(strategy.exec, &dicts, |(p, set, dup)| {
        let mut scan = OrderScan::new(*p, ok.loocv);
        if dup.is_some() || set.len() == 1 {
            scan.duplicate_of = *dup;
            return Ok((scan, None));
        }
        let best = run(set, &mut scan)?;
        Ok((scan, best))
    });
    results.into_iter().collect()
}

/// Blind Kriging: Bayesian forward selection over the encoded two-factor
/// dictionary, monic trend terms, LOOCV-based choice across `p_range`.
pub fn build_bk(design: &ExperimentalDesign, p_range: &[u32], strategy: &TuneStrategy) -> Result<Surrogate> {
    let kind = SurrogateKind::Blind { p_max: p_range.iter().copied().max().unwrap_or(0) };
    let (ok, ok_state) = fit_ok(design, strategy)?;
    let limit = max_terms(design);
    let results = scan_orders(design, p_range, Scheme::TwoFactor, strategy, &ok, |set, scan| {
        let cands: Vec<MultiIndex> = set.non_constant().to_vec();
        let mut next = |current: &KrigingModel, selected: &[MultiIndex], rejected: &[MultiIndex], scan: &mut OrderScan| {
            let remaining: Vec<MultiIndex> =
                cands.iter().filter(|c| !selected.contains(c) && !rejected.contains(c)).cloned().collect();
            if remaining.is_empty() {
                return Ok(None);
            }
            let post = bk_posterior_beta(current, &remaining)?;
            let pick = post.best().map(|i| remaining[i].clone());
            scan.bk_posteriors.push(post);
            Ok(pick)
        };
        forward_scan(design, Family::Monic, &ok, &ok_state, strategy, limit, scan, &mut next)
    })?;
    Ok(finish_selection(kind, design, strategy, ok, results))
}

/// Optimal polynomial-chaos Kriging: LARS ordering of the Legendre dictionary
/// and a full UK refit at every LARS step.
pub fn build_pck(design: &ExperimentalDesign, p_range: &[u32], scheme: Scheme, strategy: &TuneStrategy) -> Result<Surrogate> {
    let kind = SurrogateKind::PolynomialChaos { scheme, p_max: p_range.iter().copied().max().unwrap_or(0) };
    let (ok, ok_state) = fit_ok(design, strategy)?;
    let limit = max_terms(design);
    let results = scan_orders(design, p_range, scheme, strategy, &ok, |set, scan| {
        let dict = BasisSpec::new(Family::Legendre, set.clone());
        let full = dict.matrix(design.points())?;
        let x = full.columns(1, full.ncols() - 1).into_owned();
        let path = lars_select(&x, design.responses_std());
        let order: Vec<MultiIndex> = path.order.iter().map(|&j| set.non_constant()[j].clone()).collect();
        let mut next = replay(order);
        forward_scan(design, Family::Legendre, &ok, &ok_state, strategy, limit, scan, &mut next)
    })?;
    Ok(finish_selection(kind, design, strategy, ok, results))
}

/// Ranks the non-constant terms of the full total-order basis by the magnitude
/// of their GLS coefficients on standardized columns (stable: ties keep the
/// graded-lexicographic order).
pub fn frequentist_ranking(model: &KrigingModel) -> Vec<MultiIndex> {
    let f = model.trend_matrix();
    let n = f.nrows() as f64;
    let terms = model.basis().index_set.non_constant();
    let mut keyed: Vec<(f64, &MultiIndex)> = terms
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let col = f.column(j + 1);
            let mean = col.sum() / n;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            ((model.alpha()[j + 1] * sd).abs(), t)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    keyed.into_iter().map(|(_, t)| t.clone()).collect()
}

/// Frequentist UK: rank the order-`p` total-order terms once by GLS
/// coefficient magnitude, then choose the best prefix by LOOCV.
pub fn build_uk_frequentist(design: &ExperimentalDesign, p: u32, strategy: &TuneStrategy) -> Result<Surrogate> {
    let set = candidate_set(design.dim(), p, Scheme::TotalOrder)?;
    if set.len() >= design.n() {
        return Err(Error::InvalidArgument(format!(
            "frequentist ranking needs fewer terms than samples ({} terms, {} samples)",
            set.len(),
            design.n()
        )));
    }
    let kind = SurrogateKind::Frequentist { p };
    let (ok, ok_state) = fit_ok(design, strategy)?;
    let mut scan = OrderScan::new(p, ok.loocv);
    let best = if set.len() > 1 {
        let basis = BasisSpec::new(Family::Legendre, set);
        let mut state = ok_state.clone();
        match fit_tuned(design, &basis, strategy, &mut state, TunePhase::Subsequent) {
            Ok(full) => {
                let mut next = replay(frequentist_ranking(&full));
                forward_scan(design, Family::Legendre, &ok, &ok_state, strategy, max_terms(design), &mut scan, &mut next)?
            }
            Err(e) => {
                debug!("full-trend fit failed, falling back to OK: {e}");
                scan.rejected_terms = basis.index_set.non_constant().to_vec();
                None
            }
        }
    } else {
        None
    };
    Ok(finish_selection(kind, design, strategy, ok, vec![(scan, best)]))
}

/// UK with the complete total-order Legendre basis of order `p`.
pub fn build_uk_fixed(design: &ExperimentalDesign, p: u32, strategy: &TuneStrategy) -> Result<Surrogate> {
    let set = candidate_set(design.dim(), p, Scheme::TotalOrder)?;
    if set.len() > design.n() {
        return Err(Error::InvalidArgument(format!(
            "the order-{p} trend has {} terms, more than the {} samples",
            set.len(),
            design.n()
        )));
    }
    let basis = BasisSpec::new(Family::Legendre, set);
    let model = fit_tuned(design, &basis, strategy, &mut TuneState::default(), TunePhase::First)?;
    Ok(Surrogate { kind: SurrogateKind::UniversalFixed { p }, model, trace: None })
}

/// Ordinary Kriging.
pub fn build_ok(design: &ExperimentalDesign, strategy: &TuneStrategy) -> Result<Surrogate> {
    let basis = BasisSpec::constant(design.dim());
    let model = fit_tuned(design, &basis, strategy, &mut TuneState::default(), TunePhase::First)?;
    Ok(Surrogate { kind: SurrogateKind::Ordinary, model, trace: None })
}

/// Builds any surrogate kind.
pub fn build_surrogate(kind: SurrogateKind, design: &ExperimentalDesign, strategy: &TuneStrategy) -> Result<Surrogate> {
    strategy.validate()?;
    match kind {
        SurrogateKind::Ordinary => build_ok(design, strategy),
        SurrogateKind::UniversalFixed { p } => build_uk_fixed(design, p, strategy),
        SurrogateKind::Blind { p_max } => build_bk(design, &(1..=p_max).collect::<Vec<_>>(), strategy),
        SurrogateKind::PolynomialChaos { scheme, p_max } => {
            build_pck(design, &(1..=p_max).collect::<Vec<_>>(), scheme, strategy)
        }
        SurrogateKind::Frequentist { p } => build_uk_frequentist(design, p, strategy),
    }
}

#[cfg(test)]
mod tests;
