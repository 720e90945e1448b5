mod common;

use aig_core::distributions::sample;
use aig_core::measures::achieved_information_gain;
use aig_core::monte_carlo::{estimate_aig, expected_aig, gaussian_measurement_model};
use aig_core::KnowledgeState;
use common::checks::*;

#[test]
fn error_shrinks_as_inverse_square_root() {
    let (slope, table) = mc_convergence_slope(48);
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}: {table:?}");
}

#[test]
fn million_sample_estimates_within_three_standard_errors() {
    let c = mc_large_n();
    assert!(c.ok(), "{}", c.summary());
}

#[test]
fn fixed_seed_is_bit_identical() {
    assert!(mc_reproducible());
}

#[test]
fn different_seeds_differ() {
    let a = KnowledgeState::gaussian_1d(0.0, 1.0).unwrap();
    let b = KnowledgeState::gaussian_1d(0.2, 0.5).unwrap();
    let o = KnowledgeState::gaussian_1d(0.0, 4.0).unwrap();
    let e1 = estimate_aig(&sample(&a, 1, 1000).unwrap(), &b, &o).unwrap();
    let e2 = estimate_aig(&sample(&a, 2, 1000).unwrap(), &b, &o).unwrap();
    assert_ne!(e1.estimate.value, e2.estimate.value);
}

#[test]
fn exact_builder_expected_gain_is_mutual_information() {
    // E over (s, d) of the conjugate posterior's gain is ½ ln(1 + r σ_s²/σ_n²).
    let model = gaussian_measurement_model(1.5, 1.0, 4).unwrap();
    let r = expected_aig(&model, 200_000, 77).unwrap();
    let mi = 0.5 * (4.0f64 * 2.25).ln_1p();
    assert!((r.estimate.value - mi).abs() < 3.0 * r.standard_error.value, "{r:?} vs {mi}");
}

#[test]
fn prior_builder_gains_nothing() {
    let model = gaussian_measurement_model(1.0, 1.0, 2).unwrap();
    let prior = model.prior.clone();
    let m = model.with_builder(move |_| Ok(prior.clone()));
    let r = expected_aig(&m, 1000, 3).unwrap();
    assert_eq!(r.estimate.value, 0.0);
}

#[test]
fn failing_builder_pairs_are_excluded() {
    let model = gaussian_measurement_model(1.0, 1.0, 1).unwrap();
    let exact = model.posterior_builder.clone();
    let m = model.with_builder(move |d: &Vec<f64>| {
        if d[0] > 1.0 {
            Err(aig_core::AigError::InvalidArgument("refused".into()))
        } else {
            exact(d)
        }
    });
    let r = expected_aig(&m, 2000, 4).unwrap();
    assert!(!r.excluded.is_empty());
    assert_eq!(r.n_samples + r.excluded.len(), 2000);
}

#[test]
fn estimate_agrees_with_closed_form_for_discrete_states() {
    let a = KnowledgeState::poisson(4.0).unwrap();
    let b = KnowledgeState::poisson(3.0).unwrap();
    let o = KnowledgeState::poisson(1.0).unwrap();
    let exact = achieved_information_gain(&a, &b, &o).unwrap().value;
    let r = estimate_aig(&sample(&a, 12, 200_000).unwrap(), &b, &o).unwrap();
    assert!((r.estimate.value - exact).abs() < 3.0 * r.standard_error.value);
}
