//! Acceptance suite: one test per criterion.
//!
//! Run with `cargo test --release -p fama-lab --test acceptance -- --nocapture`
//! to see the measured numbers.

use fama_lab::acceptance::{run_criterion, CriterionOutcome};
use fama_lab::montecarlo::ExecOptions;

fn check(id: usize) {
    let outcome: CriterionOutcome = run_criterion(id, &ExecOptions::from_env())
        .unwrap_or_else(|e| panic!("criterion {id} errored: {e}"));
    println!("{}", outcome.headline());
    for d in &outcome.details {
        println!("    {d}");
    }
    assert!(outcome.passed, "{}\n{}", outcome.headline(), outcome.details.join("\n"));
}

#[test]
fn criterion_01_cross_form_identity() {
    check(1);
}

#[test]
fn criterion_02_exact_law_fit() {
    check(2);
}

#[test]
fn criterion_03_physical_fidelity() {
    check(3);
}

#[test]
fn criterion_04_nulling_and_gain_laws() {
    check(4);
}

#[test]
fn criterion_05_correlation_model() {
    check(5);
}

#[test]
fn criterion_06_outage_sandwich() {
    check(6);
}

#[test]
fn criterion_07_small_sir_asymptote() {
    check(7);
}

#[test]
fn criterion_08_large_sir_tail() {
    check(8);
}

#[test]
fn criterion_09_large_n_regime() {
    check(9);
}

#[test]
fn criterion_10_reproducibility() {
    check(10);
}
