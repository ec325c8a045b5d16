//! Basis-agnostic complex operator algebra, the Lindblad dissipator, and
//! superoperator vectorization for small finite-dimensional systems.
//!
//! Conventions used throughout the crate:
//! - Hamiltonian-like operators carry units of rad/us; time is in us.
//! - `vectorize` column-stacks: column `j` of a `dim x dim` matrix occupies
//!   entries `j*dim .. (j+1)*dim` of the vector.
//! - A rate-`gamma` channel with jump structure `o` enters as the single
//!   collapse operator `sqrt(gamma) * o`, so the dissipator is the standard
//!   form `D[c] rho = c rho c+ - 1/2 {c+c, rho}`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative Hermiticity tolerance for Hamiltonian-flagged operators
/// (max-abs norm).
pub const HAMILTONIAN_HERM_TOL: f64 = 1e-12;

/// Relative Hermiticity tolerance for density matrices (Frobenius norm).
pub const DENSITY_HERM_TOL: f64 = 1e-10;

/// Absolute tolerance on `|tr(rho) - 1|`.
pub const DENSITY_TRACE_TOL: f64 = 1e-9;

/// Lower bound on the smallest eigenvalue of a density matrix.
pub const DENSITY_EIG_FLOOR: f64 = -1e-8;

/// Relative singular-value threshold separating the Liouvillian kernel from
/// the slowest decaying mode.
const NULLSPACE_SV_TOL: f64 = 1e-12;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A complex square matrix on a fixed ordered basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    data: Array2<C64>,
}

impl Operator {
    /// Wrap a square matrix.
    pub fn new(data: Array2<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::invalid(format!(
                "operator must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data })
    }

    /// Wrap a square matrix that must be Hermitian (a Hamiltonian).
    pub fn hermitian(data: Array2<C64>) -> Result<Self> {
        let op = Self::new(data)?;
        let dev = op.hermiticity_deviation();
        if dev > HAMILTONIAN_HERM_TOL {
            return Err(Error::NonHermitian {
                deviation: dev,
                context: "Operator::hermitian",
            });
        }
        Ok(op)
    }

    /// Zero operator of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    /// Identity operator.
    pub fn identity(dim: usize) -> Self {
        Self {
            data: Array2::eye(dim),
        }
    }

    /// Rank-one operator `|p><q|`.
    pub fn ketbra(dim: usize, p: usize, q: usize) -> Result<Self> {
        if p >= dim || q >= dim {
            return Err(Error::invalid(format!(
                "ketbra indices ({p}, {q}) out of range for dim {dim}"
            )));
        }
        let mut m = Array2::zeros((dim, dim));
        m[(p, q)] = c(1.0);
        Ok(Self { data: m })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<C64> {
        self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            data: self.data.t().mapv(|z| z.conj()),
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim(), "matmul")?;
        Ok(Self {
            data: self.data.dot(&other.data),
        })
    }

    /// `self * s` for a complex scalar.
    pub fn scaled(&self, s: C64) -> Self {
        Self {
            data: self.data.mapv(|z| z * s),
        }
    }

    /// Entry-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim(), "add")?;
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max|M - M+| / max|M|` (0 for the zero matrix).
    pub fn hermiticity_deviation(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                let d = (self.data[(i, j)] - self.data[(j, i)].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev / scale
    }

    pub fn is_hermitian_within(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_dims(expected: usize, found: usize, context: &'static str) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            expected,
            found,
            context,
        });
    }
    Ok(())
}

/// A Hermitian, unit-trace, positive-semidefinite state.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    data: Array2<C64>,
}

impl DensityMatrix {
    /// Validate and wrap a candidate state. Enforces Hermiticity within
    /// [`DENSITY_HERM_TOL`] (relative, Frobenius), trace within
    /// [`DENSITY_TRACE_TOL`] of 1, and smallest eigenvalue at least
    /// [`DENSITY_EIG_FLOOR`].
    pub fn new(data: Array2<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::invalid(format!(
                "density matrix must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let herm = herm_deviation_frobenius(&data);
        if herm > DENSITY_HERM_TOL {
            return Err(Error::NonHermitian {
                deviation: herm,
                context: "DensityMatrix::new",
            });
        }
        let tr = trace(&data);
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::invalid(format!(
                "density matrix trace {:.12} + {:.3e}i is not 1 within {:.0e}",
                tr.re, tr.im, DENSITY_TRACE_TOL
            )));
        }
        let state = Self { data };
        let lam = min_eigenvalue(&state);
        if lam < DENSITY_EIG_FLOOR {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {lam:.3e}"
            )));
        }
        Ok(state)
    }

    /// Wrap without re-validating; the caller has already audited the data.
    pub(crate) fn new_unchecked(data: Array2<C64>) -> Self {
        Self { data }
    }

    /// Pure basis state `|k><k|`.
    pub fn pure(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::invalid(format!(
                "basis index {k} out of range for dim {dim}"
            )));
        }
        let mut m = Array2::zeros((dim, dim));
        m[(k, k)] = c(1.0);
        Ok(Self { data: m })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    /// Population `<k|rho|k>`.
    pub fn population(&self, k: usize) -> f64 {
        self.data[(k, k)].re
    }

    pub fn coherence(&self, p: usize, q: usize) -> C64 {
        self.data[(p, q)]
    }

    pub fn trace(&self) -> C64 {
        trace(&self.data)
    }

    /// Purity `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.data.dot(&self.data).diag().iter().map(|z| z.re).sum()
    }

    /// Frobenius norm of the difference of two states.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.data - &other.data)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Trace distance `1/2 tr|rho - sigma|`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let diff = &self.data - &other.data;
        let herm = hermitize(&diff);
        let (vals, _) = herm
            .eigh(UPLO::Lower)
            .expect("trace_distance: eigh failed on Hermitian matrix");
        0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
    }
}

fn trace(m: &Array2<C64>) -> C64 {
    m.diag().iter().sum()
}

/// `(M + M+)/2`.
pub(crate) fn hermitize(m: &Array2<C64>) -> Array2<C64> {
    let dag = m.t().mapv(|z| z.conj());
    (m + &dag).mapv(|z| z * 0.5)
}

fn herm_deviation_frobenius(m: &Array2<C64>) -> f64 {
    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return 0.0;
    }
    let dag = m.t().mapv(|z| z.conj());
    let dev = (m - &dag).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    dev / scale
}

/// Column-stack a `dim x dim` matrix into a `dim^2` vector.
pub fn vectorize(m: &Array2<C64>) -> Array1<C64> {
    let d = m.nrows();
    let mut v = Array1::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[j * d + i] = m[(i, j)];
        }
    }
    v
}

/// Inverse of [`vectorize`]; bit-for-bit.
pub fn devectorize(v: &Array1<C64>, dim: usize) -> Result<Array2<C64>> {
    if v.len() != dim * dim {
        return Err(Error::invalid(format!(
            "vector length {} does not match dim {}^2",
            v.len(),
            dim
        )));
    }
    let mut m = Array2::zeros((dim, dim));
    for j in 0..dim {
        for i in 0..dim {
            m[(i, j)] = v[j * dim + i];
        }
    }
    Ok(m)
}

/// Commutator `[A, B] = AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_dims(a.dim(), b.dim(), "commutator")?;
    let ab = a.data().dot(b.data());
    let ba = b.data().dot(a.data());
    Operator::new(ab - ba)
}

/// Lindblad dissipator `D[c] rho = c rho c+ - 1/2 {c+c, rho}` for a single
/// collapse operator. The output is traceless and Hermitian whenever `rho` is.
pub fn dissipator(collapse: &Operator, rho: &DensityMatrix) -> Result<Operator> {
    check_dims(collapse.dim(), rho.dim(), "dissipator")?;
    let cd = collapse.dagger();
    let cdc = cd.data().dot(collapse.data());
    let c_rho_cd = collapse.data().dot(rho.data()).dot(cd.data());
    let acomm = cdc.dot(rho.data()) + rho.data().dot(&cdc);
    Operator::new(c_rho_cd - acomm.mapv(|z| z * 0.5))
}

/// Vectorized generator of `d rho/dt = -i[H, rho] + sum_c D[c] rho`, acting
/// on column-stacked states.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    dim: usize,
    matrix: Array2<C64>,
}

impl Liouvillian {
    /// Hilbert-space dimension (the matrix is `dim^2 x dim^2`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// `devectorize(L . vectorize(rho))`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Array2<C64>> {
        check_dims(self.dim, rho.dim(), "Liouvillian::apply")?;
        let v = vectorize(rho.data());
        let out = self.matrix.dot(&v);
        devectorize(&out, self.dim)
    }

    /// `out = L . v` on raw column-stacked slices; the integrator hot loop.
    pub(crate) fn apply_vec(&self, v: &[C64], out: &mut [C64]) {
        let n = self.dim * self.dim;
        debug_assert_eq!(v.len(), n);
        debug_assert_eq!(out.len(), n);
        let m = self
            .matrix
            .as_slice()
            .expect("Liouvillian matrix is contiguous row-major");
        for (i, o) in out.iter_mut().enumerate() {
            let row = &m[i * n..(i + 1) * n];
            let mut acc = C64::new(0.0, 0.0);
            for (l, x) in row.iter().zip(v.iter()) {
                acc += l * x;
            }
            *o = acc;
        }
    }
}

fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    ndarray::linalg::kron(a, b)
}

/// Build the vectorized Liouvillian
/// `L = -i(I (x) H - H^T (x) I) + sum_c [ conj(c) (x) c - 1/2 (I (x) c+c + (c+c)^T (x) I) ]`
/// for column-stacked states.
pub fn build_liouvillian(h: &Operator, collapse: &[Operator]) -> Result<Liouvillian> {
    let dim = h.dim();
    let dev = h.hermiticity_deviation();
    if dev > HAMILTONIAN_HERM_TOL {
        return Err(Error::NonHermitian {
            deviation: dev,
            context: "build_liouvillian",
        });
    }
    for op in collapse {
        check_dims(dim, op.dim(), "build_liouvillian collapse")?;
    }
    let eye = Array2::<C64>::eye(dim);
    let ht = h.data().t().to_owned();
    let mut l = kron(&eye, h.data()) - kron(&ht, &eye);
    l.mapv_inplace(|z| z * C64::new(0.0, -1.0));
    for op in collapse {
        let cconj = op.data().mapv(|z| z.conj());
        let cdc = op.dagger().data().dot(op.data());
        let cdct = cdc.t().to_owned();
        let jump = kron(&cconj, op.data());
        let anti = kron(&eye, &cdc) + kron(&cdct, &eye);
        l = l + jump - anti.mapv(|z| z * 0.5);
    }
    Ok(Liouvillian { dim, matrix: l })
}

/// Smallest eigenvalue of the Hermitized matrix `(rho + rho+)/2`.
pub fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    min_eigenvalue_raw(rho.data())
}

pub(crate) fn min_eigenvalue_raw(m: &Array2<C64>) -> f64 {
    let h = hermitize(m);
    let (vals, _) = h
        .eigh(UPLO::Lower)
        .expect("min_eigenvalue: eigh failed on Hermitian matrix");
    vals.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Result of a kernel extraction: the candidate state plus diagnostics.
#[derive(Debug)]
pub(crate) struct KernelExtraction {
    pub state: Array2<C64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub null_dim: usize,
    #[cfg_attr(not(test), allow(dead_code))]
    pub residual: f64,
}

/// Extract the (unique) unit-trace kernel element of a Liouvillian via SVD.
pub(crate) fn extract_kernel(l: &Liouvillian) -> Result<KernelExtraction> {
    let n = l.dim * l.dim;
    let (_, s, vt) = l
        .matrix
        .svd(false, true)
        .map_err(|e| Error::Linalg(format!("SVD failed: {e}")))?;
    let vt = vt.expect("SVD with compute_vt = true returns Vt");
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        // Zero generator: every state is stationary.
        return Err(Error::DegenerateSteadyState { dimension: n });
    }
    let null_dim = s.iter().filter(|&&sv| sv <= NULLSPACE_SV_TOL * smax).count();
    if null_dim != 1 {
        return Err(Error::DegenerateSteadyState { dimension: null_dim });
    }
    // Smallest singular value is last (descending order); its right singular
    // vector spans the kernel.
    let (idx, _) = s
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("singular values are finite"))
        .expect("non-empty singular spectrum");
    let v: Array1<C64> = vt.row(idx).mapv(|z| z.conj());
    let raw = devectorize(&v, l.dim)?;
    let mut rho = hermitize(&raw);
    let tr = trace(&rho);
    if tr.norm() < 1e-12 {
        // A traceless kernel vector cannot be normalized into a state.
        return Err(Error::DegenerateSteadyState { dimension: null_dim });
    }
    rho.mapv_inplace(|z| z / tr);
    let resid_vec = l.matrix.dot(&vectorize(&rho));
    let residual = resid_vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if residual > 1e-10 * smax.max(1.0) {
        return Err(Error::Linalg(format!(
            "steady-state residual {residual:.3e} exceeds tolerance"
        )));
    }
    Ok(KernelExtraction {
        state: rho,
        null_dim,
        residual,
    })
}
