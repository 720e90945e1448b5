mod common;

use aig_core::sequential::{aig_trajectory, simulate_run, streamed_trajectory, trajectory_ensemble};
use common::checks::*;

#[test]
fn closed_form_matches_generic_gaussian_gain() {
    let c = incomplete_closed_form(6, 4096);
    assert!(c.ok(), "{}", c.summary());
}

#[test]
fn streamed_and_stored_trajectories_agree() {
    let run = simulate_run(3000, 1.3, 0.8, 99).unwrap();
    let stored = aig_trajectory(&run).unwrap();
    let (s_true, streamed) = streamed_trajectory(3000, 1.3, 0.8, 99).unwrap();
    assert_eq!(s_true, run.s_true);
    assert_eq!(stored, streamed);
}

#[test]
fn full_data_prefix_has_equal_achieved_and_apparent_gain() {
    let (_, t) = streamed_trajectory(1 << 12, 1.0, 1.0, 5).unwrap();
    let last = t.last().unwrap();
    assert!((last.achieved.value - last.apparent.value).abs() < 1e-10);
    assert!(last.remaining.value.abs() < 1e-12);
}

#[test]
fn ensemble_shows_negative_gains_and_growth() {
    let e = trajectory_ensemble(40, 1 << 12, 1.0, 1.0, 2024).unwrap();
    assert!(!e.runs_with_negative_achieved.is_empty());
    let first = &e.points[0];
    let last = e.points.last().unwrap();
    // mean gain grows roughly like ½ ln r_B
    assert!(last.achieved.mean > first.achieved.mean + 3.0);
    let half_log = 0.5 * ((1u64 << 12) as f64).ln();
    assert!((last.achieved.mean - first.achieved.mean - half_log).abs() < 1.5);
}

#[test]
fn ensemble_is_deterministic() {
    let a = trajectory_ensemble(8, 512, 1.0, 2.0, 11).unwrap();
    let b = trajectory_ensemble(8, 512, 1.0, 2.0, 11).unwrap();
    assert_eq!(a, b);
}
