//! Named, parameterized reproductions of the reference figures: initial-state
//! construction, observable extraction, parameter sweeps, and plot-ready
//! dataset assembly.

use rayon::prelude::*;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::dissipation::{collapse_operators, DecayRates};
use crate::dynamics::{evolve, steady_state, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::model::{hamiltonian_interaction, ModelParams};
use crate::quantum::{build_liouvillian, DensityMatrix};

/// Initial-state families used by the figure runs.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum InitialStateSpec {
    /// `x |L><L| + (1-x) |R><R|`.
    ChiralMix(f64),
    /// `x |+><+| + (1-x) |-><-|` with `|+-> = (|L> +- |R>)/sqrt(2)`.
    PmMix(f64),
}

impl InitialStateSpec {
    /// The racemic mixture.
    pub fn racemic() -> Self {
        InitialStateSpec::ChiralMix(0.5)
    }

    fn x(&self) -> f64 {
        match self {
            InitialStateSpec::ChiralMix(x) | InitialStateSpec::PmMix(x) => *x,
        }
    }
}

/// Build the initial density matrix embedded in dimension 3 or 4; the
/// excited states start unpopulated.
pub fn make_initial(spec: &InitialStateSpec, dim: usize) -> Result<DensityMatrix> {
    if dim != 3 && dim != 4 {
        return Err(Error::invalid(format!(
            "make_initial supports dim 3 or 4, got {dim}"
        )));
    }
    let x = spec.x();
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!(
            "initial-state weight x must lie in [0, 1], got {x}"
        )));
    }
    let mut m = Array2::<C64>::zeros((dim, dim));
    match spec {
        InitialStateSpec::ChiralMix(_) => {
            m[(0, 0)] = C64::new(x, 0.0);
            m[(1, 1)] = C64::new(1.0 - x, 0.0);
        }
        InitialStateSpec::PmMix(_) => {
            // Diagonal 1/2 each; L-R coherence x - 1/2 (real).
            m[(0, 0)] = C64::new(0.5, 0.0);
            m[(1, 1)] = C64::new(0.5, 0.0);
            m[(0, 1)] = C64::new(x - 0.5, 0.0);
            m[(1, 0)] = C64::new(x - 0.5, 0.0);
        }
    }
    DensityMatrix::new(m)
}

/// Enantiomeric excess `(P_L - P_R)/(P_L + P_R)`.
pub fn enantiomeric_excess(rho: &DensityMatrix) -> Result<f64> {
    let p_l = rho.population(0);
    let p_r = rho.population(1);
    let denom = p_l + p_r;
    if denom <= 0.0 {
        return Err(Error::UndefinedObservable(format!(
            "P_L + P_R = {denom:.3e}"
        )));
    }
    Ok((p_l - p_r) / denom)
}

/// A plain columnar dataset, serialized as CSV with 12 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                let _ = write!(out, "{}", format_sig12(*v));
                first = false;
            }
            out.push('\n');
        }
        out
    }

    /// Values of a named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

fn format_sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Time-series columns shared by all trajectory datasets.
const TIME_SERIES_COLUMNS: [&str; 6] = ["t_us", "P_L", "P_R", "P_S", "P_A", "epsilon"];

fn trajectory_dataset(traj: &Trajectory) -> Dataset {
    let rows = traj
        .times
        .iter()
        .zip(&traj.observables)
        .map(|(t, o)| vec![*t, o.p_l, o.p_r, o.p_s, o.p_a, o.epsilon])
        .collect();
    Dataset {
        columns: TIME_SERIES_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}

fn steady_columns(param: &str) -> Vec<String> {
    [
        param,
        "P_L",
        "P_R",
        "P_S",
        "P_A",
        "epsilon",
        "converged_time_us",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Swept parameter of a generic steady-state sweep.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    /// Detuning `delta` (rad/us).
    Delta,
    /// Coupling `omega0` (rad/us).
    Omega0,
    /// Dephasing rate `gamma_phi` (rad/us).
    GammaPhi,
    /// Initial-state weight `x` (dimensionless).
    InitX,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Delta => "delta",
            SweepParameter::Omega0 => "omega0",
            SweepParameter::GammaPhi => "gammaPhi",
            SweepParameter::InitX => "initX",
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(SweepParameter::Delta),
            "omega0" => Ok(SweepParameter::Omega0),
            "gammaPhi" | "gamma_phi" => Ok(SweepParameter::GammaPhi),
            "initX" | "init_x" => Ok(SweepParameter::InitX),
            other => Err(Error::invalid(format!("unknown sweep parameter '{other}'"))),
        }
    }
}

/// A steady-state sweep: one run per grid value on top of a base model.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    /// Strictly ascending grid, in the parameter's natural units
    /// (rad/us for frequencies and rates, dimensionless for `initX`).
    pub grid: Vec<f64>,
    pub base_model: ModelParams,
    pub base_rates: DecayRates,
    pub base_initial: InitialStateSpec,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("sweep grid must be non-empty"));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sweep grid must be strictly ascending"));
        }
        self.base_model.validate()?;
        self.base_rates.validate()
    }
}

fn steady_row(model: &ModelParams, rates: &DecayRates, param_value: f64) -> Result<Vec<f64>> {
    let h = hamiltonian_interaction(model)?;
    let ops = collapse_operators(rates, 4)?;
    let l = build_liouvillian(&h, &ops)?;
    let ss = steady_state(&l)?;
    let eps = enantiomeric_excess(&ss)?;
    Ok(vec![
        param_value,
        ss.population(0),
        ss.population(1),
        ss.population(2),
        ss.population(3),
        eps,
        // The null-space route has no integration clock.
        f64::NAN,
    ])
}

/// Run a steady-state sweep; rows are computed independently (in parallel)
/// and assembled in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<Dataset> {
    spec.validate()?;
    let rows: Vec<Result<Vec<f64>>> = spec
        .grid
        .par_iter()
        .map(|&v| {
            let mut model = spec.base_model;
            let mut rates = spec.base_rates;
            match spec.parameter {
                SweepParameter::Delta => model.delta = v,
                SweepParameter::Omega0 => model.omega0 = v,
                SweepParameter::GammaPhi => rates.gamma_phi = v,
                SweepParameter::InitX => {
                    // The kernel is initial-state independent; the value only
                    // labels the row.
                }
            }
            steady_row(&model, &rates, v).map_err(|e| Error::SweepPoint {
                parameter: spec.parameter.name().to_string(),
                value: v,
                source: Box::new(e),
            })
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        out.push(r?);
    }
    Ok(Dataset {
        columns: steady_columns(spec.parameter.name()),
        rows: out,
    })
}

/// Identifiers of the bundled figure presets.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5,
    Fig6a,
    Fig6b,
}

impl FigureId {
    pub const ALL: [FigureId; 9] = [
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig5,
        FigureId::Fig6a,
        FigureId::Fig6b,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6a => "fig6a",
            FigureId::Fig6b => "fig6b",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .iter()
            .find(|id| id.as_str() == s)
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown figure id '{s}'")))
    }
}

/// One labeled curve of a figure panel.
#[derive(Clone, Debug)]
pub struct Curve {
    pub label: String,
    pub data: Dataset,
}

/// All curves of one figure panel plus a parameter manifest.
#[derive(Clone, Debug)]
pub struct FigureRun {
    pub id: FigureId,
    pub curves: Vec<Curve>,
    /// Exact parameters used, one block per curve; plain text.
    pub manifest: String,
}

/// Reference tunneling strength (rad/us).
fn base_eta() -> f64 {
    TAU * 0.02
}

/// Reference decay/dephasing rates (rad/us).
fn base_rates() -> DecayRates {
    DecayRates {
        gamma_s: TAU * 0.1,
        gamma_a: TAU * 0.1,
        gamma_sa: TAU * 0.5,
        gamma_phi: TAU * 0.01,
    }
}

/// Model with `delta = ratio * omega_s^2/eta` and `omega_a` slaved to
/// `omega_s * omega0 / delta`, the constraint every figure preset applies.
fn figure_model(omega_s: f64, omega0_ratio: f64, delta_ratio: f64) -> Result<ModelParams> {
    let eta = base_eta();
    let delta0 = omega_s * omega_s / eta;
    let delta = delta_ratio * delta0;
    let omega0 = omega0_ratio * omega_s;
    let omega_a = omega_s * omega0 / delta;
    ModelParams::new(eta, omega0, omega_s, omega_a, 0.0, delta)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|k| a + step * k as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.log10(), b.log10(), n)
        .into_iter()
        .map(|x| 10f64.powf(x))
        .collect()
}

fn time_grid(t_max: f64, points: usize) -> Vec<f64> {
    linspace(0.0, t_max, points)
}

struct CurveSpec {
    label: String,
    model: ModelParams,
    rates: Option<DecayRates>,
    initial: InitialStateSpec,
}

fn manifest_block(out: &mut String, curve: &CurveSpec, times: &(f64, usize)) {
    let m = &curve.model;
    let _ = writeln!(out, "curve: {}", curve.label);
    let _ = writeln!(
        out,
        "  model: eta={} omega0={} omega_s={} omega_a={} phi={} delta={} (rad/us)",
        format_sig12(m.eta),
        format_sig12(m.omega0),
        format_sig12(m.omega_s),
        format_sig12(m.omega_a),
        format_sig12(m.phi),
        format_sig12(m.delta),
    );
    match &curve.rates {
        Some(r) => {
            let _ = writeln!(
                out,
                "  rates: gamma_s={} gamma_a={} gamma_sa={} gamma_phi={} (rad/us)",
                format_sig12(r.gamma_s),
                format_sig12(r.gamma_a),
                format_sig12(r.gamma_sa),
                format_sig12(r.gamma_phi),
            );
        }
        None => {
            let _ = writeln!(out, "  rates: none (closed system)");
        }
    }
    let init = match curve.initial {
        InitialStateSpec::ChiralMix(x) => format!("chiral_mix x={}", format_sig12(x)),
        InitialStateSpec::PmMix(x) => format!("pm_mix x={}", format_sig12(x)),
    };
    let _ = writeln!(out, "  initial: {init}");
    let _ = writeln!(out, "  times: 0 .. {} us, {} points", times.0, times.1);
}

fn run_time_series_curves(
    id: FigureId,
    specs: Vec<CurveSpec>,
    t_max: f64,
    points: usize,
) -> Result<FigureRun> {
    let times = time_grid(t_max, points);
    let cfg = SolverConfig::default();
    let curves: Vec<Result<Curve>> = specs
        .par_iter()
        .map(|spec| {
            let h = hamiltonian_interaction(&spec.model)?;
            let ops = match &spec.rates {
                Some(r) => collapse_operators(r, 4)?,
                None => Vec::new(),
            };
            let rho0 = make_initial(&spec.initial, 4)?;
            let traj = evolve(&h, &ops, &rho0, &times, &cfg)?;
            Ok(Curve {
                label: spec.label.clone(),
                data: trajectory_dataset(&traj),
            })
        })
        .collect();
    let mut out = Vec::with_capacity(curves.len());
    for c in curves {
        out.push(c?);
    }
    let mut manifest = format!("figure: {}\n", id.as_str());
    for spec in &specs {
        manifest_block(&mut manifest, spec, &(t_max, points));
    }
    Ok(FigureRun {
        id,
        curves: out,
        manifest,
    })
}

#[derive(Copy, Clone)]
struct Overrides {
    delta_ratio: Option<f64>,
    omega0_ratio: Option<f64>,
}

fn parse_overrides(id: FigureId, overrides: &[(String, f64)]) -> Result<Overrides> {
    let allowed: &[&str] = match id {
        FigureId::Fig2a | FigureId::Fig2b | FigureId::Fig3a | FigureId::Fig3b => {
            &["Delta_ratio", "Omega0_ratio"]
        }
        _ => &[],
    };
    let mut out = Overrides {
        delta_ratio: None,
        omega0_ratio: None,
    };
    for (key, value) in overrides {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::invalid(format!(
                "figure {} does not accept override '{key}' (allowed: {})",
                id.as_str(),
                if allowed.is_empty() {
                    "none".to_string()
                } else {
                    allowed.join(", ")
                }
            )));
        }
        match key.as_str() {
            "Delta_ratio" => out.delta_ratio = Some(*value),
            "Omega0_ratio" => out.omega0_ratio = Some(*value),
            _ => unreachable!(),
        }
    }
    Ok(out)
}

/// Run a figure preset. Every curve of the panel is produced with the
/// preset parameters; `overrides` may adjust the declared knobs
/// (`Delta_ratio`, `Omega0_ratio` for the time-evolution panels).
pub fn run_figure(id: FigureId, overrides: &[(String, f64)]) -> Result<FigureRun> {
    let ov = parse_overrides(id, overrides)?;
    let racemic = InitialStateSpec::racemic();
    match id {
        FigureId::Fig2a | FigureId::Fig2b => {
            let base_ratio = if id == FigureId::Fig2a { 1.0 } else { 5.0 };
            let w0r = ov.omega0_ratio.unwrap_or(base_ratio);
            let dr = ov.delta_ratio.unwrap_or(1.0);
            let spec = CurveSpec {
                label: format!("Omega0_ratio={w0r}"),
                model: figure_model(TAU * 1.0, w0r, dr)?,
                rates: None,
                initial: racemic,
            };
            run_time_series_curves(id, vec![spec], 100.0, 2001)
        }
        FigureId::Fig3a | FigureId::Fig3b => {
            let base_ratio = if id == FigureId::Fig3a { 1.0 } else { 5.0 };
            let w0r = ov.omega0_ratio.unwrap_or(base_ratio);
            let ratios: Vec<f64> = match ov.delta_ratio {
                Some(r) => vec![r],
                None => vec![0.9, 1.0, 1.1],
            };
            let specs = ratios
                .iter()
                .map(|&dr| {
                    Ok(CurveSpec {
                        label: format!("Delta_ratio={dr}"),
                        model: figure_model(TAU * 1.0, w0r, dr)?,
                        rates: Some(base_rates()),
                        initial: racemic,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            run_time_series_curves(id, specs, 300.0, 3001)
        }
        FigureId::Fig4a => {
            let grid = linspace(0.5, 1.5, 101);
            let mut curves = Vec::new();
            let mut manifest = format!("figure: {}\n", id.as_str());
            for w0r in [1.0, 5.0] {
                let rows: Vec<Result<Vec<f64>>> = grid
                    .par_iter()
                    .map(|&dr| {
                        let model = figure_model(TAU * 1.0, w0r, dr)?;
                        steady_row(&model, &base_rates(), dr)
                    })
                    .collect();
                let mut out = Vec::with_capacity(rows.len());
                for r in rows {
                    out.push(r?);
                }
                let label = format!("Omega0_ratio={w0r}");
                let _ = writeln!(
                    manifest,
                    "curve: {label}\n  Delta_ratio grid: 0.5 .. 1.5, 101 points; rates as reference; racemic initial state",
                );
                curves.push(Curve {
                    label,
                    data: Dataset {
                        columns: steady_columns("Delta_ratio"),
                        rows: out,
                    },
                });
            }
            Ok(FigureRun {
                id,
                curves,
                manifest,
            })
        }
        FigureId::Fig4b => {
            let grid = logspace(0.1, 50.0, 60);
            let rows: Vec<Result<Vec<f64>>> = grid
                .par_iter()
                .map(|&w0r| {
                    let model = figure_model(TAU * 1.0, w0r, 1.0)?;
                    steady_row(&model, &base_rates(), w0r)
                })
                .collect();
            let mut out = Vec::with_capacity(rows.len());
            for r in rows {
                out.push(r?);
            }
            Ok(FigureRun {
                id,
                curves: vec![Curve {
                    label: "Delta_ratio=1".to_string(),
                    data: Dataset {
                        columns: steady_columns("Omega0_over_OmegaS"),
                        rows: out,
                    },
                }],
                manifest: format!(
                    "figure: {}\ncurve: Delta_ratio=1\n  Omega0/OmegaS grid: 0.1 .. 50, 60 log-spaced points; rates as reference; racemic initial state\n",
                    id.as_str()
                ),
            })
        }
        FigureId::Fig5 => {
            let omega_s = TAU * 2.0;
            let rates0 = base_rates();
            let grid = linspace(0.0, 30.0, 61);
            let mut curves = Vec::new();
            let mut manifest = format!("figure: {}\n", id.as_str());
            for w0r in [1.0, 5.0, 10.0, 20.0] {
                let rows: Vec<Result<Vec<f64>>> = grid
                    .par_iter()
                    .map(|&phi_ratio| {
                        let model = figure_model(omega_s, w0r, 1.0)?;
                        let rates = DecayRates {
                            gamma_phi: phi_ratio * rates0.gamma_s,
                            ..rates0
                        };
                        steady_row(&model, &rates, phi_ratio)
                    })
                    .collect();
                let mut out = Vec::with_capacity(rows.len());
                for r in rows {
                    out.push(r?);
                }
                let label = format!("Omega0_ratio={w0r}");
                let _ = writeln!(
                    manifest,
                    "curve: {label}\n  gamma_phi/gamma_s grid: 0 .. 30, 61 points; omega_s = 2*2pi rad/us; racemic initial state",
                );
                curves.push(Curve {
                    label,
                    data: Dataset {
                        columns: steady_columns("gamma_phi_over_gamma_s"),
                        rows: out,
                    },
                });
            }
            Ok(FigureRun {
                id,
                curves,
                manifest,
            })
        }
        FigureId::Fig6a | FigureId::Fig6b => {
            let xs: [f64; 3] = if id == FigureId::Fig6a {
                [0.3, 0.5, 0.7]
            } else {
                [0.0, 0.5, 1.0]
            };
            let specs = xs
                .iter()
                .map(|&x| {
                    let initial = if id == FigureId::Fig6a {
                        InitialStateSpec::ChiralMix(x)
                    } else {
                        InitialStateSpec::PmMix(x)
                    };
                    Ok(CurveSpec {
                        label: format!("x={x}"),
                        model: figure_model(TAU * 1.0, 1.0, 1.0)?,
                        rates: Some(base_rates()),
                        initial,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            run_time_series_curves(id, specs, 300.0, 3001)
        }
    }
}
