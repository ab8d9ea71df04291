//! Acceptance suite: one test per verification criterion, each printing its
//! pass/fail line. Every tolerance is pinned inside `cli::verify`.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use entscat::cli::verify::{self, Check};

fn report(check: Check) {
    let status = if check.passed { "PASS" } else { "FAIL" };
    println!("{status}  {}: {}", check.name, check.detail);
    assert!(check.passed, "{}: {}", check.name, check.detail);
}

#[test]
fn criterion_01_closed_form_goldens() {
    report(verify::check_closed_form_goldens());
}

#[test]
fn criterion_02_reference_table() {
    report(verify::check_reference_table());
}

#[test]
fn criterion_03_mass_exchange_symmetry() {
    report(verify::check_mass_exchange_symmetry());
}

#[test]
fn criterion_04_unitarity_identity() {
    report(verify::check_unitarity_identity());
}

#[test]
fn criterion_05_purity_law() {
    report(verify::check_purity_law());
}

#[test]
fn criterion_06_second_order_onset() {
    report(verify::check_second_order_onset());
}

#[test]
fn criterion_07_anisotropy_null_result() {
    report(verify::check_anisotropy_null());
}

#[test]
fn criterion_08_boost_stability() {
    report(verify::check_boost_stability());
}

#[test]
fn criterion_09_scattering_length() {
    report(verify::check_scattering_length());
}

#[test]
fn criterion_10_packet_distance() {
    report(verify::check_packet_distance());
}
