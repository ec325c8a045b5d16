//! End-to-end tests of the `chiralpump` binary: exit codes, CSV output,
//! determinism, and agreement with the library API.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_chiralpump")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .env("CHIRALPUMP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const FIG3B_BODY: &str = "\
model.eta_mhz = 0.02
model.omega_s_mhz = 1.0
model.omega_0_mhz = 5.0
model.omega_a_mhz = matched
model.delta_mhz = 50.0
rates.gamma_s_mhz = 0.1
rates.gamma_a_mhz = 0.1
rates.gamma_sa_mhz = 0.5
rates.gamma_phi_mhz = 0.01
initial.kind = chiral_mix
initial.x = 0.5
";

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn parse_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().unwrap())
                .collect::<Vec<f64>>()
        })
        .collect();
    (header, rows)
}

#[test]
fn simulate_writes_expected_time_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &format!("{FIG3B_BODY}times.stop_us = 60.0\ntimes.points = 241\n"),
    );
    let out = run_in(dir.path(), &[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        "run.csv",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let (header, rows) = parse_csv(&dir.path().join("run.csv"));
    assert_eq!(header, ["t_us", "P_L", "P_R", "P_S", "P_A", "epsilon"]);
    assert_eq!(rows.len(), 241);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - 0.5).abs() < 1e-12);

    // Final row agrees with the library run of the same model.
    use chiralpump::*;
    use std::f64::consts::TAU;
    let p = matching_params(TAU * 0.02, TAU * 1.0, TAU * 5.0).unwrap();
    let h = hamiltonian_interaction(&p).unwrap();
    let rates = DecayRates::new(TAU * 0.1, TAU * 0.1, TAU * 0.5, TAU * 0.01).unwrap();
    let ops = collapse_operators(&rates, 4).unwrap();
    let rho0 = make_initial(&InitialStateSpec::racemic(), 4).unwrap();
    let times: Vec<f64> = (0..241).map(|k| 60.0 * k as f64 / 240.0).collect();
    let traj = evolve(&h, &ops, &rho0, &times, &SolverConfig::default()).unwrap();
    let last = traj.last();
    let csv_last = rows.last().unwrap();
    assert!((csv_last[1] - last.p_l).abs() < 1e-9);
    assert!((csv_last[5] - last.epsilon).abs() < 1e-9);
    assert!(last.epsilon > 0.95);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &format!("{FIG3B_BODY}times.stop_us = 10.0\ntimes.points = 41\n"),
    );
    let out = run_in(dir.path(), &[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        "a.csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let out = run_in(dir.path(), &[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        "b.csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn negative_rate_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let body = FIG3B_BODY.replace("rates.gamma_s_mhz = 0.1", "rates.gamma_s_mhz = -0.1");
    let cfg = write_config(
        dir.path(),
        "bad.cfg",
        &format!("{body}times.stop_us = 10.0\ntimes.points = 11\n"),
    );
    let out = run_in(dir.path(), &[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        "x.csv",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("rates.gamma_s_mhz"), "{}", stderr(&out));
}

#[test]
fn zero_detuning_reduced_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let body = FIG3B_BODY
        .replace("model.delta_mhz = 50.0", "model.delta_mhz = 0.0")
        .replace("model.omega_a_mhz = matched", "model.omega_a_mhz = 0.1");
    let cfg = write_config(
        dir.path(),
        "zero.cfg",
        &format!("{body}model.hamiltonian = reduced\ntimes.stop_us = 10.0\ntimes.points = 11\n"),
    );
    let out = run_in(dir.path(), &[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        "x.csv",
    ]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr(&out));

    // The full interaction-picture model still integrates at zero detuning.
    let body_ok = FIG3B_BODY
        .replace("model.delta_mhz = 50.0", "model.delta_mhz = 0.0")
        .replace("model.omega_a_mhz = matched", "model.omega_a_mhz = 0.1");
    let cfg_ok = write_config(
        dir.path(),
        "zero_full.cfg",
        &format!("{body_ok}times.stop_us = 1.0\ntimes.points = 11\n"),
    );
    let out = run_in(dir.path(), &[
        "simulate",
        cfg_ok.to_str().unwrap(),
        "--out",
        "y.csv",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
}

#[test]
fn steady_methods_agree_and_report_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "steady.cfg",
        &format!("{FIG3B_BODY}solver.steady_window_tol = 1e-7\n"),
    );
    let out = run_in(dir.path(), &[
        "steady",
        cfg.to_str().unwrap(),
        "--out",
        "null.csv",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let out = run_in(dir.path(), &[
        "steady",
        cfg.to_str().unwrap(),
        "--method",
        "integrate",
        "--out",
        "int.csv",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let (h_null, rows_null) = parse_csv(&dir.path().join("null.csv"));
    let (h_int, rows_int) = parse_csv(&dir.path().join("int.csv"));
    assert_eq!(h_null, ["P_L", "P_R", "P_S", "P_A", "epsilon"]);
    assert_eq!(
        h_int,
        ["P_L", "P_R", "P_S", "P_A", "epsilon", "converged_time_us"]
    );
    let eps_null = rows_null[0][4];
    let eps_int = rows_int[0][4];
    assert!(
        (eps_null - eps_int).abs() < 1e-6,
        "nullspace {eps_null} vs integrate {eps_int}"
    );
    assert!((eps_null - 0.9969).abs() < 1e-3);
    assert!(rows_int[0][5] > 0.0);
}

#[test]
fn steady_without_dissipation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let body = FIG3B_BODY
        .lines()
        .filter(|l| !l.starts_with("rates."))
        .collect::<Vec<_>>()
        .join("\n");
    let cfg = write_config(dir.path(), "unitary.cfg", &format!("{body}\n"));
    let out = run_in(dir.path(), &[
        "steady",
        cfg.to_str().unwrap(),
        "--out",
        "x.csv",
    ]);
    assert_eq!(exit_code(&out), 4, "stderr: {}", stderr(&out));
}

#[test]
fn figure_fig4b_writes_curve_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["figure", "fig4b", "--out-dir", "figs"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let curve = dir.path().join("figs/fig4b_delta_ratio_1.csv");
    let manifest = dir.path().join("figs/fig4b_manifest.txt");
    assert!(manifest.exists());
    let (header, rows) = parse_csv(&curve);
    assert_eq!(header[0], "Omega0_over_OmegaS");
    assert_eq!(rows.len(), 60);
    let (k_max, _) = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1[5].partial_cmp(&b.1[5]).unwrap())
        .unwrap();
    let argmax = rows[k_max][0];
    assert!(argmax > 1.0 && argmax < 20.0, "argmax at {argmax}");
    assert!(rows[0][6].is_nan());
}

#[test]
fn figure_rejects_unknown_id_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["figure", "fig9x", "--out-dir", "."]);
    assert_eq!(exit_code(&out), 2);
    let out = run_in(dir.path(), &[
        "figure", "fig4a", "--override", "Delta_ratio=0.9", "--out-dir", ".",
    ]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn sweep_peaks_at_matched_detuning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.cfg",
        &format!(
            "{}model.omega_a_mhz = 0.02\nsweep.parameter = delta\nsweep.start = 40.0\n\
             sweep.stop = 60.0\nsweep.points = 5\n",
            FIG3B_BODY
                .replace("model.omega_0_mhz = 5.0", "model.omega_0_mhz = 1.0")
                .replace("model.omega_a_mhz = matched\n", "")
        ),
    );
    let out = run_in(dir.path(), &[
        "sweep",
        cfg.to_str().unwrap(),
        "--out",
        "sweep.csv",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let (header, rows) = parse_csv(&dir.path().join("sweep.csv"));
    assert_eq!(header[0], "delta");
    assert_eq!(rows.len(), 5);
    // Middle point is the matched detuning (50 MHz in rad/us).
    let (k_max, _) = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1[5].partial_cmp(&b.1[5]).unwrap())
        .unwrap();
    assert_eq!(k_max, 2);
    assert!(rows[2][6].is_nan());
    // Excess falls on both sides of the peak.
    assert!(rows[0][5] < rows[2][5] && rows[4][5] < rows[2][5]);
}

#[test]
fn lab_config_with_rates_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lab.cfg",
        &format!("{FIG3B_BODY}model.hamiltonian = lab\ntimes.stop_us = 1.0\ntimes.points = 5\n"),
    );
    let out = run_in(dir.path(), &["simulate", cfg.to_str().unwrap(), "--out", "x.csv"]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn shipped_configs_parse_and_run() {
    // The lab cross-check config is the cheapest full run; exercise it
    // end to end and verify the populations stay near the racemic start.
    let dir = tempfile::tempdir().unwrap();
    let manifest_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = manifest_dir.join("../../configs/lab_crosscheck.cfg");
    let out = run_in(dir.path(), &[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        "lab.csv",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let (_, rows) = parse_csv(&dir.path().join("lab.csv"));
    assert_eq!(rows.len(), 81);
    for row in &rows {
        assert!((row[1] - 0.5).abs() < 0.05);
    }
}
