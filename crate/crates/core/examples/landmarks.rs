//! Prints the reference-point observables; a development cross-check.

use std::f64::consts::TAU;
use std::time::Instant;

use chiralpump::*;

fn figure_model(omega_s: f64, w0r: f64, dr: f64) -> ModelParams {
    let eta = TAU * 0.02;
    let delta0 = omega_s * omega_s / eta;
    let delta = dr * delta0;
    let omega0 = w0r * omega_s;
    let omega_a = omega_s * omega0 / delta;
    ModelParams::new(eta, omega0, omega_s, omega_a, 0.0, delta).unwrap()
}

fn rates() -> DecayRates {
    DecayRates::new(TAU * 0.1, TAU * 0.1, TAU * 0.5, TAU * 0.01).unwrap()
}

fn main() {
    let rac = make_initial(&InitialStateSpec::racemic(), 4).unwrap();
    let cfg = SolverConfig::default();
    let tight = SolverConfig {
        steady_window_tol: 1e-7,
        ..cfg
    };

    for (name, omega_s, w0r, r) in [
        ("fig3a", TAU * 1.0, 1.0, rates()),
        ("fig3b", TAU * 1.0, 5.0, rates()),
        (
            "fig5",
            TAU * 2.0,
            20.0,
            DecayRates::new(TAU * 0.1, TAU * 0.1, TAU * 0.5, 30.0 * TAU * 0.1).unwrap(),
        ),
    ] {
        let p = figure_model(omega_s, w0r, 1.0);
        let h = hamiltonian_interaction(&p).unwrap();
        let ops = collapse_operators(&r, 4).unwrap();
        let l = build_liouvillian(&h, &ops).unwrap();
        let ss = steady_state(&l).unwrap();
        let eps_ss = enantiomeric_excess(&ss).unwrap();
        let t0 = Instant::now();
        let (s1, t1) = evolve_to_steady(&h, &ops, &rac, &cfg).unwrap();
        let dt1 = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let (s2, t2) = evolve_to_steady(&h, &ops, &rac, &tight).unwrap();
        let dt2 = t0.elapsed().as_secs_f64();
        println!(
            "{name}: ss eps={:.6} P_L={:.6} P_R={:.6} | default window: t_conv={:.0} eps={:.6} ({dt1:.2}s) | tight: t_conv={:.0} dist={:.2e} ({dt2:.2}s)",
            eps_ss,
            ss.population(0),
            ss.population(1),
            t1,
            enantiomeric_excess(&s1).unwrap(),
            t2,
            ss.trace_distance(&s2),
        );
    }
}
