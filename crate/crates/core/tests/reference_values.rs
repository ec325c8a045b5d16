//! Frozen steady-state reference values for the landmark parameter sets.
//!
//! Each number was computed by two independent routes (Liouvillian-kernel
//! extraction and long-time integration, which agree below 1e-6) and is
//! pinned here to catch regressions in any part of the pipeline.

use std::f64::consts::TAU;

use chiralpump::*;

fn steady(omega_s: f64, omega0_ratio: f64, gamma_phi: f64) -> DensityMatrix {
    let eta = TAU * 0.02;
    let delta = omega_s * omega_s / eta;
    let omega0 = omega0_ratio * omega_s;
    let omega_a = omega_s * omega0 / delta;
    let model = ModelParams::new(eta, omega0, omega_s, omega_a, 0.0, delta).unwrap();
    let rates = DecayRates::new(TAU * 0.1, TAU * 0.1, TAU * 0.5, gamma_phi).unwrap();
    let h = hamiltonian_interaction(&model).unwrap();
    let ops = collapse_operators(&rates, 4).unwrap();
    steady_state(&build_liouvillian(&h, &ops).unwrap()).unwrap()
}

#[test]
fn pumping_point_equal_couplings() {
    let ss = steady(TAU * 1.0, 1.0, TAU * 0.01);
    assert!((enantiomeric_excess(&ss).unwrap() - 0.973135).abs() < 1e-4);
    assert!((ss.population(0) - 0.985481).abs() < 1e-4);
    assert!((ss.population(1) - 0.013418).abs() < 1e-4);
}

#[test]
fn pumping_point_strong_coupling() {
    let ss = steady(TAU * 1.0, 5.0, TAU * 0.01);
    assert!((enantiomeric_excess(&ss).unwrap() - 0.996933).abs() < 1e-4);
    assert!((ss.population(0) - 0.997353).abs() < 1e-4);
    assert!((ss.population(1) - 0.001532).abs() < 1e-4);
}

#[test]
fn strong_dephasing_point() {
    let ss = steady(TAU * 2.0, 20.0, 30.0 * TAU * 0.1);
    assert!((enantiomeric_excess(&ss).unwrap() - 0.919853).abs() < 1e-4);
}
