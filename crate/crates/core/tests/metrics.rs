//! Aggregate and navigation metrics against brute-force references.

mod common;

use common::oracles::{self, record, scores};
use ogn_core::metrics::{dts, iqm, spl, stratified_bootstrap_ci};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn iqm_matches_rank_trim() {
    assert!(oracles::iqm_worst() < 1e-12);
    assert_eq!(iqm(&[3.0, 0.0, 2.0, 1.0]).unwrap(), 1.5);
}

#[test]
fn profile_matches_counting() {
    assert!(oracles::profile_worst() < 1e-12);
}

#[test]
fn poi_matches_double_loop() {
    assert!(oracles::poi_worst() < 1e-12);
}

#[test]
fn spl_matches_definition() {
    assert!(oracles::spl_worst() < 1e-12);
    assert_eq!(spl(&[record(true, 2.0, 1.0), record(false, 1.0, 1.0)]).unwrap(), 0.25);
    assert!(spl(&[record(true, 1.0, 0.0)]).is_err());
}

#[test]
fn dts_hand_values() {
    assert!((dts(0.45, false, 0.35, 0.0) - 0.10).abs() < 1e-12);
    assert_eq!(dts(0.35, false, 0.35, 0.0), 0.0);
    assert_eq!(dts(0.9, true, 0.35, 0.0), 0.0);
}

#[test]
fn bootstrap_coverage() {
    let coverage = oracles::bootstrap_coverage();
    assert!((coverage - 0.95).abs() <= 0.03, "coverage {coverage}");
}

#[test]
fn bootstrap_brackets_estimate_and_collapses_on_constants() {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let strata = vec![vec![2.0; 10], vec![2.0; 7]];
    let (lo, hi) = stratified_bootstrap_ci(&strata, 500, 0.95, &mut r, |s| iqm(s)).unwrap();
    assert_eq!((lo, hi), (2.0, 2.0));
    let strata = vec![scores(&mut r, 8), scores(&mut r, 8)];
    let pooled: Vec<f64> = strata.concat();
    let est = iqm(&pooled).unwrap();
    let (lo, hi) = stratified_bootstrap_ci(&strata, 2000, 0.95, &mut r, |s| iqm(s)).unwrap();
    assert!(lo <= est && est <= hi);
    assert!(stratified_bootstrap_ci(&strata[..1], 10, 0.95, &mut r, |s| iqm(s)).is_err());
}
