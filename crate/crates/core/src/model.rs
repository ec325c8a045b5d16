//! Hamiltonians of the four-level chiral-molecule model with tunneling: the
//! lab-frame form, the interaction-picture form, the adiabatic-elimination
//! generator and its second-order effective Hamiltonian, the reduced
//! three-level form, and the parameter matching that makes the excitation
//! chiral-state-selective.
//!
//! Basis order is fixed: `(L, R, S, A)` for four-level matrices and
//! `(L, R, A)` for three-level ones. All frequencies are angular (rad/us);
//! a value quoted as an ordinary frequency `f` in MHz enters as `2*pi*f`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quantum::Operator;

/// Named basis states of the four-level model.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum State {
    /// Left-handed chiral ground state.
    L,
    /// Right-handed chiral ground state.
    R,
    /// Symmetric achiral excited state (eliminated in the reduced model).
    S,
    /// Asymmetric achiral excited state.
    A,
}

impl State {
    /// Index of the state in a basis of the given dimension, or `None` if the
    /// state is absent (S in the three-level basis).
    pub fn index(self, dim: usize) -> Option<usize> {
        match (self, dim) {
            (State::L, _) => Some(0),
            (State::R, _) => Some(1),
            (State::S, 4) => Some(2),
            (State::S, _) => None,
            (State::A, 4) => Some(3),
            (State::A, 3) => Some(2),
            (State::A, _) => None,
        }
    }
}

/// Default lab-frame energy of `|S>` used for cross-validation runs (rad/us).
pub const LAB_OMEGA_S_DEFAULT: f64 = std::f64::consts::TAU * 500.0;
/// Default lab-frame energy of `|A>` used for cross-validation runs (rad/us).
pub const LAB_OMEGA_A_DEFAULT: f64 = std::f64::consts::TAU * 1500.0;

/// Physical inputs of the model. Couplings are real and non-negative; the
/// sign structure of the `|Q> <-> |A>` couplings is carried by `phi`
/// (`phi_L = phi`, `phi_R = phi + pi`).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Tunneling strength between `|L>` and `|R>` (rad/us).
    pub eta: f64,
    /// Coupling strength of the `|S> <-> |A>` field (rad/us).
    pub omega0: f64,
    /// Coupling strength of the `|Q> <-> |S>` field (rad/us).
    pub omega_s: f64,
    /// Coupling strength of the `|Q> <-> |A>` field (rad/us).
    pub omega_a: f64,
    /// Overall loop phase (radians).
    pub phi: f64,
    /// One-photon detuning of the `|Q> <-> |S>` transition (rad/us).
    pub delta: f64,
    /// Lab-frame energy of `|S>` (rad/us); only cross-validation runs use it.
    pub lab_omega_s: f64,
    /// Lab-frame energy of `|A>` (rad/us).
    pub lab_omega_a: f64,
}

impl ModelParams {
    /// Bundle parameters with default lab-frame energies.
    pub fn new(
        eta: f64,
        omega0: f64,
        omega_s: f64,
        omega_a: f64,
        phi: f64,
        delta: f64,
    ) -> Result<Self> {
        let p = Self {
            eta,
            omega0,
            omega_s,
            omega_a,
            phi,
            delta,
            lab_omega_s: LAB_OMEGA_S_DEFAULT,
            lab_omega_a: LAB_OMEGA_A_DEFAULT,
        };
        p.validate()?;
        Ok(p)
    }

    /// Check the coupling-sign invariants.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta", self.eta),
            ("omega0", self.omega0),
            ("omega_s", self.omega_s),
            ("omega_a", self.omega_a),
        ] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::invalid(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !self.phi.is_finite() || !self.delta.is_finite() {
            return Err(Error::invalid("phi and delta must be finite"));
        }
        Ok(())
    }

    fn validate_lab(&self) -> Result<()> {
        if !(self.lab_omega_a > self.lab_omega_s && self.lab_omega_s > 0.0) {
            return Err(Error::invalid(format!(
                "lab-frame energies need lab_omega_a > lab_omega_s > 0, got {} and {}",
                self.lab_omega_a, self.lab_omega_s
            )));
        }
        Ok(())
    }

    /// Field angular frequencies `(omega_1, omega_2, omega_0_field)` fixed by
    /// the resonance conditions: `omega_2 = lab_omega_a`,
    /// `omega_1 = lab_omega_s - delta`, `omega_0_field = omega_2 - omega_1`.
    pub fn field_frequencies(&self) -> (f64, f64, f64) {
        let w1 = self.lab_omega_s - self.delta;
        let w2 = self.lab_omega_a;
        (w1, w2, w2 - w1)
    }
}

/// Quantities defined by the second-order elimination of `|S>`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DerivedParams {
    /// Light shift of the chiral ground states: `-omega_s^2 / delta`.
    pub lambda: f64,
    /// Light shift of `|A>`: `-omega0^2 / delta`.
    pub lambda_tilde: f64,
    /// Shifted detuning of `|S>`: `delta - 2*lambda - lambda_tilde`.
    pub delta_tilde: f64,
    /// Effective `|L> <-> |A>` coupling `omega_a e^{i phi} - omega_s omega0 / delta`.
    pub omega_tilde_l: C64,
    /// Effective `|R> <-> |A>` coupling `omega_a e^{i (phi+pi)} - omega_s omega0 / delta`.
    pub omega_tilde_r: C64,
    /// Matching detuning `omega_s^2 / eta`; undefined when `eta = 0`.
    pub delta0: Option<f64>,
    /// Residual two-level detuning `lambda - lambda_tilde`.
    pub small_delta: f64,
}

/// Evaluate the elimination formulas. Fails when `delta = 0`.
pub fn derive(p: &ModelParams) -> Result<DerivedParams> {
    p.validate()?;
    if p.delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let lambda = -p.omega_s * p.omega_s / p.delta;
    let lambda_tilde = -p.omega0 * p.omega0 / p.delta;
    let cross = p.omega_s * p.omega0 / p.delta;
    let phase_l = C64::from_polar(1.0, p.phi);
    let phase_r = C64::from_polar(1.0, p.phi + std::f64::consts::PI);
    Ok(DerivedParams {
        lambda,
        lambda_tilde,
        delta_tilde: p.delta - 2.0 * lambda - lambda_tilde,
        omega_tilde_l: phase_l * p.omega_a - cross,
        omega_tilde_r: phase_r * p.omega_a - cross,
        delta0: (p.eta > 0.0).then(|| p.omega_s * p.omega_s / p.eta),
        small_delta: lambda - lambda_tilde,
    })
}

/// Parameters satisfying the selectivity matching conditions
/// `delta = omega_s^2 / eta`, `phi = 0`, `omega_a = omega_s omega0 / delta`,
/// so that `eta + lambda = 0` and the effective `|L> <-> |A>` coupling
/// vanishes while `|R>` couples at strength `2 omega_a`.
pub fn matching_params(eta: f64, omega_s: f64, omega0: f64) -> Result<ModelParams> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::invalid(format!(
            "matching requires eta > 0, got {eta}"
        )));
    }
    if omega_s.is_nan() || omega_s <= 0.0 {
        return Err(Error::invalid(format!(
            "matching requires omega_s > 0, got {omega_s}"
        )));
    }
    let delta = omega_s * omega_s / eta;
    let omega_a = omega_s * omega0 / delta;
    ModelParams::new(eta, omega0, omega_s, omega_a, 0.0, delta)
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn set_pair(m: &mut Array2<C64>, i: usize, j: usize, v: C64) {
    m[(i, j)] += v;
    m[(j, i)] += v.conj();
}

const L4: usize = 0;
const R4: usize = 1;
const S4: usize = 2;
const A4: usize = 3;

/// Interaction-picture Hamiltonian on `(L, R, S, A)`: detuning on `|S>`,
/// tunneling, and the three field couplings with loop phases `phi` and
/// `phi + pi`.
pub fn hamiltonian_interaction(p: &ModelParams) -> Result<Operator> {
    p.validate()?;
    let mut h = Array2::<C64>::zeros((4, 4));
    h[(S4, S4)] = c(p.delta);
    set_pair(&mut h, L4, R4, c(p.eta));
    set_pair(&mut h, S4, A4, c(p.omega0));
    for (q, phi_q) in [(L4, p.phi), (R4, p.phi + std::f64::consts::PI)] {
        set_pair(&mut h, q, S4, c(p.omega_s));
        set_pair(&mut h, q, A4, C64::from_polar(p.omega_a, phi_q));
    }
    Operator::hermitian(h)
}

/// Anti-Hermitian generator of the elimination:
/// `S = (1/delta)[omega_s (|L> + |R>)<S| + omega0 |A><S| - h.c.]`.
pub fn frohlich_generator(p: &ModelParams) -> Result<Operator> {
    p.validate()?;
    if p.delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let mut s = Array2::<C64>::zeros((4, 4));
    let ws = c(p.omega_s / p.delta);
    let w0 = c(p.omega0 / p.delta);
    s[(L4, S4)] = ws;
    s[(R4, S4)] = ws;
    s[(A4, S4)] = w0;
    s[(S4, L4)] = -ws;
    s[(S4, R4)] = -ws;
    s[(S4, A4)] = -w0;
    Operator::new(s)
}

/// Second-order effective Hamiltonian on `(L, R, S, A)`; `|S>` is decoupled
/// and carries only the shifted detuning.
pub fn hamiltonian_effective(p: &ModelParams) -> Result<Operator> {
    let d = derive(p)?;
    let mut h = Array2::<C64>::zeros((4, 4));
    h[(S4, S4)] = c(d.delta_tilde);
    h[(A4, A4)] = c(d.lambda_tilde);
    h[(L4, L4)] = c(d.lambda);
    h[(R4, R4)] = c(d.lambda);
    set_pair(&mut h, L4, R4, c(p.eta + d.lambda));
    set_pair(&mut h, L4, A4, d.omega_tilde_l);
    set_pair(&mut h, R4, A4, d.omega_tilde_r);
    Operator::hermitian(h)
}

/// Reduced three-level Hamiltonian on `(L, R, A)`: the effective Hamiltonian
/// with the `|S>` row and column deleted.
pub fn hamiltonian_reduced(p: &ModelParams) -> Result<Operator> {
    let eff = hamiltonian_effective(p)?;
    let full = eff.data();
    let keep = [L4, R4, A4];
    let mut h = Array2::<C64>::zeros((3, 3));
    for (i, &fi) in keep.iter().enumerate() {
        for (j, &fj) in keep.iter().enumerate() {
            h[(i, j)] = full[(fi, fj)];
        }
    }
    Operator::hermitian(h)
}

/// Lab-frame Hamiltonian entries at time `t` (us) as a stack matrix; the
/// integrator hot path. Assumes the parameters were validated up front.
pub(crate) fn lab_hamiltonian_entries(p: &ModelParams, t: f64) -> [[C64; 4]; 4] {
    let (w1, w2, w0f) = p.field_frequencies();
    let zero = C64::new(0.0, 0.0);
    let mut h = [[zero; 4]; 4];
    h[S4][S4] = c(p.lab_omega_s);
    h[A4][A4] = c(p.lab_omega_a);
    h[L4][R4] = c(p.eta);
    h[R4][L4] = c(p.eta);
    let sa = C64::from_polar(p.omega0, w0f * t);
    h[S4][A4] = sa;
    h[A4][S4] = sa.conj();
    for (q, phi_q) in [(L4, p.phi), (R4, p.phi + std::f64::consts::PI)] {
        let qs = C64::from_polar(p.omega_s, w1 * t);
        h[q][S4] = qs;
        h[S4][q] = qs.conj();
        let qa = C64::from_polar(p.omega_a, phi_q + w2 * t);
        h[q][A4] = qa;
        h[A4][q] = qa.conj();
    }
    h
}

/// Lab-frame Hamiltonian at time `t` (us), with explicit field phase factors.
/// The field frequencies follow from the resonance conditions; see
/// [`ModelParams::field_frequencies`].
pub fn hamiltonian_lab(p: &ModelParams, t: f64) -> Result<Operator> {
    p.validate()?;
    p.validate_lab()?;
    let entries = lab_hamiltonian_entries(p, t);
    let mut h = Array2::<C64>::zeros((4, 4));
    for (i, row) in entries.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            h[(i, j)] = *v;
        }
    }
    Operator::hermitian(h)
}
