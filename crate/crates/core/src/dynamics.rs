//! Time evolution of the master equation (closed and open) plus steady-state
//! extraction, on the vectorized state with an embedded Dormand-Prince 5(4)
//! integrator.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantum::{
    build_liouvillian, devectorize, extract_kernel, min_eigenvalue_raw, vectorize, DensityMatrix,
    Liouvillian, Operator, DENSITY_EIG_FLOOR, DENSITY_HERM_TOL, DENSITY_TRACE_TOL,
};

/// Lookahead used by the steady-state convergence window (us).
pub const STEADY_WINDOW_US: f64 = 10.0;

/// Default cap on the steady-state integration time (us).
pub const STEADY_TIME_CAP_US: f64 = 1e4;

/// Adaptive-integrator configuration.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative tolerance of the embedded error estimate.
    pub rel_tol: f64,
    /// Absolute tolerance of the embedded error estimate.
    pub abs_tol: f64,
    /// Largest step the controller may take (us).
    pub max_step: f64,
    /// Re-symmetrize `rho <- (rho + rho+)/2` after every accepted step.
    pub hermitize_each_step: bool,
    /// Steady-state window threshold: converged once the state moves less
    /// than this (Frobenius) over a [`STEADY_WINDOW_US`] lookahead.
    pub steady_window_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            hermitize_each_step: true,
            steady_window_tol: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 || self.abs_tol.is_nan() || self.abs_tol <= 0.0 {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        if self.max_step.is_nan() || self.max_step <= 0.0 {
            return Err(Error::invalid("max_step must be positive"));
        }
        if self.steady_window_tol.is_nan() || self.steady_window_tol <= 0.0 {
            return Err(Error::invalid("steady_window_tol must be positive"));
        }
        Ok(())
    }
}

/// Per-time observables of a trajectory. For three-level runs `p_s` is 0.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Observables {
    pub p_l: f64,
    pub p_r: f64,
    pub p_s: f64,
    pub p_a: f64,
    /// Enantiomeric excess `(P_L - P_R)/(P_L + P_R)`.
    pub epsilon: f64,
}

impl Observables {
    fn from_state(rho: &DensityMatrix, t_us: f64) -> Result<Self> {
        let dim = rho.dim();
        let p_l = rho.population(0);
        let p_r = rho.population(1);
        let (p_s, p_a) = match dim {
            4 => (rho.population(2), rho.population(3)),
            3 => (0.0, rho.population(2)),
            _ => (0.0, 0.0),
        };
        let denom = p_l + p_r;
        if denom <= 0.0 {
            return Err(Error::UndefinedObservable(format!(
                "P_L + P_R = {denom:.3e} at t = {t_us} us"
            )));
        }
        Ok(Self {
            p_l,
            p_r,
            p_s,
            p_a,
            epsilon: (p_l - p_r) / denom,
        })
    }
}

/// Time grid, per-time observables, and the full states of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub observables: Vec<Observables>,
    pub states: Option<Vec<DensityMatrix>>,
}

impl Trajectory {
    /// Observables of the final grid point.
    pub fn last(&self) -> &Observables {
        self.observables.last().expect("trajectory is non-empty")
    }
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// b5 - b4: the embedded error weights.
const ERR_W: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C_NODES: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

struct Stepper {
    n: usize,
    k: Vec<Vec<C64>>,
    ytmp: Vec<C64>,
    ynew: Vec<C64>,
    h: f64,
}

impl Stepper {
    fn new(n: usize, cfg: &SolverConfig) -> Self {
        Self {
            n,
            k: (0..7).map(|_| vec![C64::new(0.0, 0.0); n]).collect(),
            ytmp: vec![C64::new(0.0, 0.0); n],
            ynew: vec![C64::new(0.0, 0.0); n],
            h: cfg.max_step,
        }
    }

    /// Advance `y` from `t0` to `t1` with adaptive steps. `hermitize_dim`,
    /// when set, re-symmetrizes the column-stacked state after each accepted
    /// step.
    fn integrate<F>(
        &mut self,
        rhs: &mut F,
        t0: f64,
        t1: f64,
        y: &mut [C64],
        cfg: &SolverConfig,
        hermitize_dim: Option<usize>,
    ) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let mut t = t0;
        let span = t1 - t0;
        debug_assert!(span > 0.0);
        self.h = self.h.min(cfg.max_step).min(span);
        loop {
            let remaining = t1 - t;
            if remaining <= 1e-14 * t1.abs().max(1.0) {
                return Ok(());
            }
            let h = self.h.min(remaining);
            if h < 1e-13 * t.abs().max(1.0) {
                return Err(Error::IntegrationFailure {
                    t_us: t,
                    what: "step size underflow",
                    magnitude: h,
                });
            }

            rhs(t, y, &mut self.k[0]);
            self.stage(y, h, &A2, 1);
            rhs(t + C_NODES[1] * h, &self.ytmp, &mut self.k[1]);
            self.stage(y, h, &A3, 2);
            rhs(t + C_NODES[2] * h, &self.ytmp, &mut self.k[2]);
            self.stage(y, h, &A4, 3);
            rhs(t + C_NODES[3] * h, &self.ytmp, &mut self.k[3]);
            self.stage(y, h, &A5, 4);
            rhs(t + C_NODES[4] * h, &self.ytmp, &mut self.k[4]);
            self.stage(y, h, &A6, 5);
            rhs(t + C_NODES[5] * h, &self.ytmp, &mut self.k[5]);
            // 5th-order solution.
            for (i, (ynew_i, y_i)) in self.ynew.iter_mut().zip(y.iter()).enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (j, w) in B5.iter().enumerate().take(6) {
                    if *w != 0.0 {
                        acc += self.k[j][i] * *w;
                    }
                }
                *ynew_i = y_i + acc * h;
            }
            rhs(t + h, &self.ynew, &mut self.k[6]);

            // Weighted RMS error of the embedded 4th-order difference.
            let mut err_sq = 0.0;
            for (i, (y_i, ynew_i)) in y.iter().zip(self.ynew.iter()).enumerate() {
                let mut e = C64::new(0.0, 0.0);
                for (j, w) in ERR_W.iter().enumerate() {
                    if *w != 0.0 {
                        e += self.k[j][i] * *w;
                    }
                }
                let scale = cfg.abs_tol + cfg.rel_tol * y_i.norm().max(ynew_i.norm());
                let r = e.norm() * h / scale;
                err_sq += r * r;
            }
            let err = (err_sq / self.n as f64).sqrt();

            if err <= 1.0 {
                t += h;
                y.copy_from_slice(&self.ynew);
                if let Some(dim) = hermitize_dim {
                    hermitize_vec(y, dim);
                }
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                self.h = (h * grow).min(cfg.max_step);
            } else {
                self.h = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
    }

    fn stage(&mut self, y: &[C64], h: f64, coeffs: &[f64], _next: usize) {
        for (i, (ytmp_i, y_i)) in self.ytmp.iter_mut().zip(y.iter()).enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, a) in coeffs.iter().enumerate() {
                if *a != 0.0 {
                    acc += self.k[j][i] * *a;
                }
            }
            *ytmp_i = y_i + acc * h;
        }
    }
}

/// In-place `(rho + rho+)/2` on a column-stacked state.
fn hermitize_vec(y: &mut [C64], dim: usize) {
    for i in 0..dim {
        let d = y[i * dim + i];
        y[i * dim + i] = C64::new(d.re, 0.0);
        for j in (i + 1)..dim {
            let a = y[j * dim + i];
            let b = y[i * dim + j];
            let avg = (a + b.conj()) * 0.5;
            y[j * dim + i] = avg;
            y[i * dim + j] = avg.conj();
        }
    }
}

/// Audit a raw state against the density-matrix invariants; returns the
/// validated wrapper or an integration-failure diagnostic.
fn audit_state(m: Array2<C64>, t_us: f64) -> Result<DensityMatrix> {
    let tr: C64 = m.diag().iter().sum();
    let tr_dev = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
    if tr_dev > DENSITY_TRACE_TOL {
        return Err(Error::IntegrationFailure {
            t_us,
            what: "trace",
            magnitude: tr_dev,
        });
    }
    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let dag = m.t().mapv(|z| z.conj());
    let herm_dev = (&m - &dag).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        / scale.max(f64::MIN_POSITIVE);
    if herm_dev > DENSITY_HERM_TOL {
        return Err(Error::IntegrationFailure {
            t_us,
            what: "Hermiticity",
            magnitude: herm_dev,
        });
    }
    let lam = min_eigenvalue_raw(&m);
    if lam < DENSITY_EIG_FLOOR {
        return Err(Error::IntegrationFailure {
            t_us,
            what: "positivity",
            magnitude: lam,
        });
    }
    Ok(DensityMatrix::new_unchecked(m))
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("times must be non-empty"));
    }
    if times[0] != 0.0 {
        return Err(Error::invalid(format!(
            "times must start at 0, got {}",
            times[0]
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("times must be strictly ascending"));
    }
    Ok(())
}

/// Integrate `d rho/dt = -i[H, rho] + sum_c D[c] rho` from `rho0` over the
/// given output grid. An empty collapse list is the closed Liouville
/// equation.
pub fn evolve(
    h: &Operator,
    collapse: &[Operator],
    rho0: &DensityMatrix,
    times: &[f64],
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_times(times)?;
    if h.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho0.dim(),
            context: "evolve initial state",
        });
    }
    let l = build_liouvillian(h, collapse)?;
    let mut rhs = |_t: f64, y: &[C64], out: &mut [C64]| l.apply_vec(y, out);
    evolve_grid(&mut rhs, rho0, times, cfg)
}

/// Integrate the explicitly time-dependent lab-frame Liouville equation
/// `d rho/dt = -i[H_s(t), rho]` (unitary only; a cross-validation tool).
/// Basis-state populations match the interaction-picture run because the
/// frame change is diagonal.
pub fn evolve_lab(
    p: &ModelParams,
    rho0: &DensityMatrix,
    times: &[f64],
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_times(times)?;
    // Surface lab-frame parameter problems before integrating.
    crate::model::hamiltonian_lab(p, 0.0)?;
    if rho0.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho0.dim(),
            context: "evolve_lab initial state",
        });
    }
    let pp = *p;
    let mut rhs = move |t: f64, y: &[C64], out: &mut [C64]| {
        let h = crate::model::lab_hamiltonian_entries(&pp, t);
        let mi = C64::new(0.0, -1.0);
        for j in 0..4 {
            for i in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..4 {
                    acc += h[i][k] * y[k + 4 * j] - y[i + 4 * k] * h[k][j];
                }
                out[i + 4 * j] = acc * mi;
            }
        }
    };
    evolve_grid(&mut rhs, rho0, times, cfg)
}

fn evolve_grid<F>(
    rhs: &mut F,
    rho0: &DensityMatrix,
    times: &[f64],
    cfg: &SolverConfig,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let dim = rho0.dim();
    let n = dim * dim;
    let mut y: Vec<C64> = vectorize(rho0.data()).to_vec();
    let mut stepper = Stepper::new(n, cfg);
    let hermitize = cfg.hermitize_each_step.then_some(dim);

    let mut observables = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    observables.push(Observables::from_state(rho0, 0.0)?);
    states.push(rho0.clone());

    for w in times.windows(2) {
        stepper.integrate(rhs, w[0], w[1], &mut y, cfg, hermitize)?;
        let m = devectorize(&ndarray::Array1::from_vec(y.clone()), dim)?;
        let state = audit_state(m, w[1])?;
        observables.push(Observables::from_state(&state, w[1])?);
        states.push(state);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        observables,
        states: Some(states),
    })
}

/// The t -> infinity state: the unique unit-trace kernel element of the
/// Liouvillian, from the singular vector of its smallest singular value.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let kernel = extract_kernel(l)?;
    DensityMatrix::new(kernel.state)
}

/// Integrate until the state moves less than `cfg.steady_window_tol`
/// (Frobenius) across a [`STEADY_WINDOW_US`] lookahead, up to
/// [`STEADY_TIME_CAP_US`]. Returns the converged state and the start time of
/// the first quiet window.
///
/// The window difference bottoms out at the integrator's own noise floor
/// (around 1e-8 at the default tolerances); window thresholds below that
/// floor end in [`Error::SteadyStateTimeout`] rather than converging.
pub fn evolve_to_steady(
    h: &Operator,
    collapse: &[Operator],
    rho0: &DensityMatrix,
    cfg: &SolverConfig,
) -> Result<(DensityMatrix, f64)> {
    evolve_to_steady_with_cap(h, collapse, rho0, cfg, STEADY_TIME_CAP_US)
}

/// [`evolve_to_steady`] with an explicit time cap (us).
pub fn evolve_to_steady_with_cap(
    h: &Operator,
    collapse: &[Operator],
    rho0: &DensityMatrix,
    cfg: &SolverConfig,
    cap_us: f64,
) -> Result<(DensityMatrix, f64)> {
    cfg.validate()?;
    if h.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho0.dim(),
            context: "evolve_to_steady initial state",
        });
    }
    if cap_us.is_nan() || cap_us <= 0.0 {
        return Err(Error::invalid("time cap must be positive"));
    }
    let l = build_liouvillian(h, collapse)?;
    let dim = rho0.dim();
    let n = dim * dim;
    let mut rhs = |_t: f64, y: &[C64], out: &mut [C64]| l.apply_vec(y, out);
    let mut stepper = Stepper::new(n, cfg);
    let hermitize = cfg.hermitize_each_step.then_some(dim);

    let mut y: Vec<C64> = vectorize(rho0.data()).to_vec();
    let mut prev = y.clone();
    let mut t = 0.0;
    let mut last_diff = f64::INFINITY;
    while t < cap_us {
        let t_next = t + STEADY_WINDOW_US;
        stepper.integrate(&mut rhs, t, t_next, &mut y, cfg, hermitize)?;
        let diff = prev
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let m = devectorize(&ndarray::Array1::from_vec(y.clone()), dim)?;
        let state = audit_state(m, t_next)?;
        if diff < cfg.steady_window_tol {
            return Ok((state, t));
        }
        last_diff = diff;
        prev.copy_from_slice(&y);
        t = t_next;
    }
    Err(Error::SteadyStateTimeout { cap_us, last_diff })
}
