//! Acceptance gate: one test per shipped criterion, each delegating to
//! the named self-verification check so the test suite and the `verify`
//! command exercise identical code. Run with `--nocapture` to see the
//! per-criterion lines for passing tests too.

use jplus_core::verify::{run_check, GoldenValues};

fn criterion(number: usize, check: &str) {
    let outcome = run_check(check, &GoldenValues::default());
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    println!("criterion {number} [{check}]: {status} ({})", outcome.detail);
    assert!(
        outcome.passed,
        "criterion {number} [{check}]: {}",
        outcome.detail
    );
}

#[test]
fn criterion_01_standard_family_values() {
    criterion(1, "standard-family-values");
}

#[test]
fn criterion_02_worked_example_labels() {
    criterion(2, "worked-example-labels");
}

#[test]
fn criterion_03_inner_loop_bound() {
    criterion(3, "inner-loop-bound");
}

#[test]
fn criterion_04_rotation_equivalence() {
    criterion(4, "rotation-equivalence");
}

#[test]
fn criterion_05_interior_sum_identity() {
    criterion(5, "interior-sum-identity");
}

#[test]
fn criterion_06_tunnel_sum_identity() {
    criterion(6, "tunnel-sum-identity");
}

#[test]
fn criterion_07_loop_addition_identity() {
    criterion(7, "loop-addition-identity");
}

#[test]
fn criterion_08_walk_ledger() {
    criterion(8, "walk-ledger");
}

#[test]
fn criterion_09_solution_reconstructions() {
    criterion(9, "solution-reconstructions");
}

#[test]
fn criterion_10_geometry_oracle() {
    criterion(10, "geometry-oracle");
}

#[test]
fn criterion_11_round_trip_identities() {
    criterion(11, "round-trip-identities");
}
