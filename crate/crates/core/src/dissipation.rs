//! Collapse-operator sets for the open four-level model: population decay
//! from the achiral excited states and state-independent pure dephasing.
//!
//! Each channel quoted with rate `gamma` enters as a single collapse operator
//! `sqrt(gamma) * o`; the dephasing operators are `sigma^z_pq = |p><p| - |q><q|`,
//! so each listed pair's coherence decays at `2 gamma_phi` per operator.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quantum::Operator;

/// Decay and dephasing rates, all angular (rad/us) and non-negative.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DecayRates {
    /// Decay rate of `|S>` to each chiral ground state.
    pub gamma_s: f64,
    /// Decay rate of `|A>` to each chiral ground state.
    pub gamma_a: f64,
    /// Decay rate of `|A>` to `|S>`.
    pub gamma_sa: f64,
    /// State-independent pure dephasing rate.
    pub gamma_phi: f64,
}

impl DecayRates {
    pub fn new(gamma_s: f64, gamma_a: f64, gamma_sa: f64, gamma_phi: f64) -> Result<Self> {
        let r = Self {
            gamma_s,
            gamma_a,
            gamma_sa,
            gamma_phi,
        };
        r.validate()?;
        Ok(r)
    }

    /// Closed-system limit.
    pub fn zero() -> Self {
        Self {
            gamma_s: 0.0,
            gamma_a: 0.0,
            gamma_sa: 0.0,
            gamma_phi: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_s", self.gamma_s),
            ("gamma_a", self.gamma_a),
            ("gamma_sa", self.gamma_sa),
            ("gamma_phi", self.gamma_phi),
        ] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::invalid(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

// Four-level indices.
const L: usize = 0;
const R: usize = 1;
const S: usize = 2;
const A: usize = 3;

/// Dephasing pairs (p, q) of the four-level model, in listing order.
const DEPHASING_PAIRS_4: [(usize, usize); 6] = [(S, L), (S, R), (A, L), (A, R), (A, S), (R, L)];

fn sigma_z(dim: usize, p: usize, q: usize, scale: f64) -> Operator {
    let mut m = ndarray::Array2::<C64>::zeros((dim, dim));
    m[(p, p)] = C64::new(scale, 0.0);
    m[(q, q)] = C64::new(-scale, 0.0);
    Operator::new(m).expect("sigma_z is square")
}

fn jump(dim: usize, p: usize, q: usize, rate: f64) -> Operator {
    Operator::ketbra(dim, p, q)
        .expect("jump indices in range")
        .scaled(C64::new(rate.sqrt(), 0.0))
}

/// Build the collapse-operator list for the full (`dim = 4`) or reduced
/// (`dim = 3`, basis `(L, R, A)`) model. Channels with zero rate are
/// omitted; with all four rates nonzero the four-level list has exactly
/// 11 operators (5 decay + 6 dephasing).
pub fn collapse_operators(rates: &DecayRates, dim: usize) -> Result<Vec<Operator>> {
    rates.validate()?;
    let mut ops = Vec::new();
    match dim {
        4 => {
            if rates.gamma_s > 0.0 {
                ops.push(jump(4, L, S, rates.gamma_s));
                ops.push(jump(4, R, S, rates.gamma_s));
            }
            if rates.gamma_sa > 0.0 {
                ops.push(jump(4, S, A, rates.gamma_sa));
            }
            if rates.gamma_a > 0.0 {
                ops.push(jump(4, L, A, rates.gamma_a));
                ops.push(jump(4, R, A, rates.gamma_a));
            }
            if rates.gamma_phi > 0.0 {
                let s = rates.gamma_phi.sqrt();
                for (p, q) in DEPHASING_PAIRS_4 {
                    ops.push(sigma_z(4, p, q, s));
                }
            }
        }
        3 => {
            // (L, R, A) with A at index 2; every |S> channel is absent.
            let a = 2;
            if rates.gamma_a > 0.0 {
                ops.push(jump(3, L, a, rates.gamma_a));
                ops.push(jump(3, R, a, rates.gamma_a));
            }
            if rates.gamma_phi > 0.0 {
                let s = rates.gamma_phi.sqrt();
                for (p, q) in [(a, L), (a, R), (R, L)] {
                    ops.push(sigma_z(3, p, q, s));
                }
            }
        }
        other => {
            return Err(Error::invalid(format!(
                "collapse_operators supports dim 3 or 4, got {other}"
            )));
        }
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{build_liouvillian, dissipator, DensityMatrix, Operator};
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn reference_rates() -> DecayRates {
        DecayRates::new(TAU * 0.1, TAU * 0.1, TAU * 0.5, TAU * 0.01).unwrap()
    }

    #[test]
    fn zero_rates_give_empty_list() {
        assert!(collapse_operators(&DecayRates::zero(), 4).unwrap().is_empty());
        assert!(collapse_operators(&DecayRates::zero(), 3).unwrap().is_empty());
    }

    #[test]
    fn reference_rates_give_eleven_operators() {
        let ops = collapse_operators(&reference_rates(), 4).unwrap();
        assert_eq!(ops.len(), 11);
        // The |S><A| jump has Frobenius norm sqrt(gamma_sa).
        let sa = &ops[2];
        assert_relative_eq!(sa.frobenius_norm(), (TAU * 0.5).sqrt(), max_relative = 1e-12);
        assert!(sa.data()[(2, 3)].norm() > 0.0);
    }

    #[test]
    fn reduced_set_has_five_operators() {
        let ops = collapse_operators(&reference_rates(), 3).unwrap();
        assert_eq!(ops.len(), 5);
        for op in &ops {
            assert_eq!(op.dim(), 3);
        }
    }

    #[test]
    fn rejects_negative_rate_and_bad_dim() {
        assert!(DecayRates::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(collapse_operators(&reference_rates(), 2).is_err());
        assert!(collapse_operators(&reference_rates(), 5).is_err());
    }

    #[test]
    fn total_outflow_from_excited_state() {
        // d tr(|A><A| rho)/dt = -(2 gamma_a + gamma_sa) starting from |A><A|,
        // verified by brute-force right-hand-side evaluation with the full
        // Hamiltonian present.
        let rates = reference_rates();
        let p = crate::model::matching_params(TAU * 0.02, TAU * 1.0, TAU * 1.0).unwrap();
        let h = crate::model::hamiltonian_interaction(&p).unwrap();
        let ops = collapse_operators(&rates, 4).unwrap();
        let l = build_liouvillian(&h, &ops).unwrap();
        let rho_a = DensityMatrix::pure(4, 3).unwrap();
        let drho = l.apply(&rho_a).unwrap();
        assert_relative_eq!(
            drho[(3, 3)].re,
            -(2.0 * rates.gamma_a + rates.gamma_sa),
            max_relative = 1e-12
        );

        // Same number from the dissipator sum alone.
        let mut direct = 0.0;
        for op in &ops {
            direct += dissipator(op, &rho_a).unwrap().data()[(3, 3)].re;
        }
        assert_relative_eq!(
            direct,
            -(2.0 * rates.gamma_a + rates.gamma_sa),
            max_relative = 1e-12
        );
    }

    #[test]
    fn every_channel_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ops = collapse_operators(&reference_rates(), 4).unwrap();
        for _ in 0..50 {
            let mut a = Array2::<C64>::zeros((4, 4));
            for i in 0..4 {
                for j in 0..4 {
                    a[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let adag = a.t().mapv(|z| z.conj());
            let mut rho = a.dot(&adag);
            let tr: C64 = rho.diag().iter().sum();
            rho.mapv_inplace(|z| z / tr);
            let rho = DensityMatrix::new(rho).unwrap();
            for op in &ops {
                let d = dissipator(op, &rho).unwrap();
                let tr: C64 = d.data().diag().iter().sum();
                assert!(tr.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_states_stay_diagonal_without_dephasing() {
        // gamma_phi = 0: the generator restricted to diagonal states is a
        // classical rate equation.
        let rates = DecayRates::new(TAU * 0.1, TAU * 0.1, TAU * 0.5, 0.0).unwrap();
        let ops = collapse_operators(&rates, 4).unwrap();
        let mut rho = Array2::<C64>::zeros((4, 4));
        rho[(0, 0)] = C64::new(0.1, 0.0);
        rho[(1, 1)] = C64::new(0.2, 0.0);
        rho[(2, 2)] = C64::new(0.3, 0.0);
        rho[(3, 3)] = C64::new(0.4, 0.0);
        let rho = DensityMatrix::new(rho).unwrap();
        let l = build_liouvillian(&Operator::zeros(4), &ops).unwrap();
        let d = l.apply(&rho).unwrap();
        for (idx, v) in d.indexed_iter() {
            if idx.0 != idx.1 {
                assert!(v.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dephasing_operators_hermitian_traceless_on_support() {
        let ops = collapse_operators(&reference_rates(), 4).unwrap();
        for op in &ops[5..] {
            assert!(op.hermiticity_deviation() <= 1e-15);
            let tr: C64 = op.data().diag().iter().sum();
            assert!(tr.norm() < 1e-15);
        }
    }
}
