use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hyperopt::{GaConfig, TuneKind};
use crate::poly::legendre;

fn design(n: usize, m: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> ExperimentalDesign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<f64> = (0..n * m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let pts = DMatrix::from_row_slice(n, m, &pts);
    let y: Vec<f64> = (0..n).map(|i| f(&pts.row(i).iter().copied().collect::<Vec<_>>())).collect();
    ExperimentalDesign::from_normalized(pts, vec![(-1.0, 1.0); m], &y).unwrap()
}

fn quick(kind: TuneKind) -> TuneStrategy {
    let mut s = TuneStrategy::new(kind, 7);
    s.ga = GaConfig { population: 30, generations: 40, ..GaConfig::default() };
    s
}

fn check_argmin(trace: &SelectionTrace) {
    for scan in &trace.scans {
        assert_eq!(scan.loocv_per_step.len(), scan.ordered_terms.len() + 1);
        for &v in &scan.loocv_per_step {
            assert!(trace.chosen_loocv <= v);
        }
        assert!(trace.chosen_loocv <= scan.loocv_per_step[0]);
    }
}

#[test]
fn candidate_sets() {
    assert_eq!(candidate_set(2, 0, Scheme::TensorProduct).unwrap().len(), 1);
    assert_eq!(candidate_set(3, 1, Scheme::TwoFactor).unwrap().len(), 4);
    assert_eq!(candidate_set(3, 2, Scheme::TwoFactor).unwrap().len(), 19);
    assert_eq!(candidate_set(2, 4, Scheme::TensorProduct).unwrap().len(), 25);
}

#[test]
fn bk_picks_the_linear_term() {
    let d = design(10, 2, 1, |x| 3.0 + 2.0 * x[0] + 0.05 * (5.0 * x[1]).sin());
    let s = build_bk(&d, &[1, 2], &quick(TuneKind::SimplifiedGaBfgs)).unwrap();
    let trace = s.trace.unwrap();
    check_argmin(&trace);
    let first = &trace.scans[0];
    assert_eq!(first.ordered_terms[0], MultiIndex(vec![1, 0]));
    assert!(trace.chosen_loocv <= first.loocv_per_step[0]);
    assert_eq!(trace.scans[1].p, 2);
}

#[test]
fn pck_recovers_a_legendre_term() {
    let d = design(15, 2, 2, |x| legendre(2, x[0]).unwrap());
    let s = build_pck(&d, &[1, 2, 3], Scheme::TotalOrder, &quick(TuneKind::SimplifiedGaBfgs)).unwrap();
    let trace = s.trace.unwrap();
    check_argmin(&trace);
    assert!(s.model.basis().index_set.contains(&MultiIndex(vec![2, 0])), "{trace:?}");
    assert!(trace.final_loocv < 1e-3 * d.std_y(), "{}", trace.final_loocv);
}

#[test]
fn pck_order_zero_is_ok() {
    let d = design(8, 2, 3, |x| x[0].sin() + x[1]);
    let s = build_pck(&d, &[0], Scheme::TotalOrder, &quick(TuneKind::SimplifiedGaBfgs)).unwrap();
    assert_eq!(s.model.basis().len(), 1);
    assert_eq!(s.trace.unwrap().chosen_prefix_length, 0);
}

#[test]
fn two_factor_orders_above_two_are_not_rescanned() {
    let d = design(12, 2, 4, |x| x[0] * x[1] + x[0]);
    let s = build_pck(&d, &[1, 2, 3, 4], Scheme::TwoFactor, &quick(TuneKind::SimplifiedGaBfgs)).unwrap();
    let trace = s.trace.unwrap();
    assert_eq!(trace.scans[2].duplicate_of, Some(2));
    assert_eq!(trace.scans[3].duplicate_of, Some(2));
}

#[test]
fn frequentist_ranks_linear_term_first_and_rejects_large_sets() {
    let d = design(12, 2, 5, |x| 1.0 + 4.0 * x[1] + 0.1 * x[0] * x[0] + 0.05 * (3.0 * x[0]).cos());
    let s = build_uk_frequentist(&d, 1, &quick(TuneKind::SimplifiedGaBfgs)).unwrap();
    let trace = s.trace.unwrap();
    assert_eq!(trace.scans[0].ordered_terms[0], MultiIndex(vec![0, 1]));
    check_argmin(&trace);
    let small = design(5, 2, 6, |x| x[0] + x[1]);
    assert!(build_uk_frequentist(&small, 2, &quick(TuneKind::SimplifiedGaBfgs)).is_err());
}

#[test]
fn frequentist_ranking_uses_standardized_magnitudes() {
    let basis = BasisSpec::new(Family::Legendre, candidate_set(2, 1, Scheme::TotalOrder).unwrap());
    let t = crate::kriging::Hyperparameters::new(vec![1.0, 1.0]).unwrap();
    let d = design(12, 2, 9, |x| x[0] + 0.5 * x[1] + 0.2 * (4.0 * x[0]).sin());
    let m = KrigingModel::fit(&d, &basis, &t).unwrap();
    assert_eq!(frequentist_ranking(&m), vec![MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1])]);
}

#[test]
fn uk_fixed_sizes() {
    let d = design(10, 2, 7, |x| x[0].exp() + x[1]);
    let s = build_uk_fixed(&d, 1, &quick(TuneKind::ExhaustiveGaBfgs)).unwrap();
    assert_eq!(s.model.basis().len(), 3);
    let s0 = build_uk_fixed(&d, 0, &quick(TuneKind::ExhaustiveGaBfgs)).unwrap();
    assert_eq!(s0.model.basis().len(), 1);
    let d8 = design(40, 8, 8, |x| x.iter().sum());
    assert!(build_uk_fixed(&d8, 2, &quick(TuneKind::ExhaustiveGaBfgs)).is_err());
}

#[test]
fn selection_is_deterministic() {
    let d = design(14, 2, 10, |x| (2.0 * x[0]).sin() + x[1] * x[1]);
    for kind in [
        SurrogateKind::Blind { p_max: 2 },
        SurrogateKind::PolynomialChaos { scheme: Scheme::TensorProduct, p_max: 2 },
        SurrogateKind::Frequentist { p: 1 },
    ] {
        let a = build_surrogate(kind, &d, &quick(TuneKind::SimplifiedGaBfgs)).unwrap();
        let b = build_surrogate(kind, &d, &quick(TuneKind::SimplifiedGaBfgs)).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.model.theta(), b.model.theta());
    }
}
