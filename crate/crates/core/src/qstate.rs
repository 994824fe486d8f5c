//! Finite-dimensional quantum states and the linear-algebra primitives the
//! rest of the crate builds on.
//!
//! Matrices are dense with `Complex64` entries. Bipartite systems use the
//! row-major product basis: the basis vector `|i>_A |j>_B` of a system with
//! split `(dA, dB)` sits at index `i * dB + j`, which makes
//! [`DensityMatrix::tensor_product`] a plain Kronecker product.
//!
//! All states validate on construction: hermiticity and unit trace within
//! `1e-12`, positive semidefiniteness within `1e-10`, unit norm within
//! `1e-12` for pure states. Eigenvalues within `1e-12` of zero are clamped
//! to exactly zero before any division or support decision.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::tol;
use crate::{Error, Result};

/// Which tensor factor of a bipartite system an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order, values within `1e-12` of
/// zero are clamped to exactly zero, and each eigenvector column has its
/// first significant entry rotated to be real and positive so that the
/// decomposition is reproducible.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    /// Eigenvalues in descending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Matrix whose `k`-th column is the eigenvector of `values()[k]`.
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Number of strictly positive eigenvalues.
    pub fn rank(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    /// `V g(diag) V^dagger` for a scalar function `g` of the eigenvalues.
    pub fn apply_function(&self, g: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            let w = Complex64::new(g(lam), 0.0);
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += w * v[i] * v[j].conj();
                }
            }
        }
        out
    }

    /// `V diag V^dagger`; used by the reconstruction checks.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        self.apply_function(|x| x)
    }
}

/// Eigendecomposition of a Hermitian matrix with deterministic ordering
/// and zero clamping.
///
/// Fails with [`Error::InvalidState`] when the matrix is not Hermitian
/// within `1e-12` entrywise.
pub fn eig_hermitian(m: &DMatrix<Complex64>) -> Result<SpectralDecomposition> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eig_hermitian needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = hermitian_defect(m);
    if asym > tol::HERMITIAN_TOL {
        return Err(Error::InvalidState(format!(
            "matrix is not Hermitian: max |M - M^dagger| = {asym:.3e}"
        )));
    }
    // Symmetrize before decomposing so roundoff in the input cannot leak
    // imaginary parts into the eigenvalues.
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = sym.symmetric_eigen();
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut values = Vec::with_capacity(d);
    let mut vectors = DMatrix::<Complex64>::zeros(d, d);
    for (slot, &k) in order.iter().enumerate() {
        let mut lam = eig.eigenvalues[k];
        if lam.abs() <= tol::EIG_CLAMP {
            lam = 0.0;
        }
        values.push(lam);
        let mut col = eig.eigenvectors.column(k).clone_owned();
        phase_fix(&mut col);
        vectors.set_column(slot, &col);
    }
    Ok(SpectralDecomposition { values, vectors })
}

fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Rotates a vector by a global phase so its first significant entry is
/// real and positive.
fn phase_fix(v: &mut DVector<Complex64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8 * max).copied() {
        let factor = z.conj() / z.norm();
        for entry in v.iter_mut() {
            *entry *= factor;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    dim: usize,
    split: Option<(usize, usize)>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// A density matrix: Hermitian, positive semidefinite, unit trace.
///
/// The optional `split` records a bipartite structure `(dA, dB)` with
/// `dA * dB == dim`; it is required by the partial trace and the PPT test
/// and is propagated by tensor products.
///
/// Serializes as `{"dim": n, "split": [dA, dB] | null, "re": [[..]],
/// "im": [[..]]}` with row-major matrix entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    dim: usize,
    split: Option<(usize, usize)>,
    mat: DMatrix<Complex64>,
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(m: DensityMatrix) -> Self {
        let d = m.dim;
        DensityMatrixJson {
            dim: d,
            split: m.split,
            re: (0..d).map(|i| (0..d).map(|j| m.mat[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| m.mat[(i, j)].im).collect()).collect(),
        }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(j: DensityMatrixJson) -> Result<Self> {
        let d = j.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !shape_ok(&j.re) || !shape_ok(&j.im) {
            return Err(Error::InvalidState(format!(
                "matrix entries do not form a {d}x{d} array"
            )));
        }
        let mat = DMatrix::from_fn(d, d, |i, k| Complex64::new(j.re[i][k], j.im[i][k]));
        DensityMatrix::new(mat, j.split)
    }
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(mat: DMatrix<Complex64>, split: Option<(usize, usize)>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dim = mat.nrows();
        if dim == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        if let Some((da, db)) = split {
            if da * db != dim {
                return Err(Error::DimensionMismatch(format!(
                    "split ({da}, {db}) incompatible with dim {dim}"
                )));
            }
        }
        let asym = hermitian_defect(&mat);
        if asym > tol::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |M - M^dagger| = {asym:.3e}"
            )));
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > tol::TRACE_TOL || trace.im.abs() > tol::TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {} is not 1 within {:.0e}",
                trace,
                tol::TRACE_TOL
            )));
        }
        let state = Self { dim, split, mat };
        let eig = state.eig()?;
        if let Some(&min) = eig.values().last() {
            if min < -tol::PSD_TOL {
                return Err(Error::InvalidState(format!(
                    "not positive semidefinite: min eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(state)
    }

    /// Constructor for matrices that are valid by construction
    /// (spectral reassembly, Kronecker products of valid states, convex
    /// mixtures of projectors). Skips the eigenvalue check.
    pub(crate) fn new_unchecked(mat: DMatrix<Complex64>, split: Option<(usize, usize)>) -> Self {
        let dim = mat.nrows();
        Self { dim, split, mat }
    }

    /// Projector onto a pure state, carrying over its split.
    pub fn from_pure(psi: &PureState) -> Self {
        let outer = psi.amplitudes() * psi.amplitudes().adjoint();
        // Symmetrize away the roundoff from the outer product.
        let mat = (&outer + outer.adjoint()).map(|z| z * 0.5);
        Self::new_unchecked(mat, psi.split())
    }

    /// Diagonal density matrix from a probability vector.
    pub fn from_probabilities(p: &[f64], split: Option<(usize, usize)>) -> Result<Self> {
        check_probability_vector(p)?;
        let d = p.len();
        let mat = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(p[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(mat, split)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split(&self) -> Option<(usize, usize)> {
        self.split
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Returns a copy with a different (compatible) split annotation.
    pub fn with_split(&self, split: Option<(usize, usize)>) -> Result<Self> {
        if let Some((da, db)) = split {
            if da * db != self.dim {
                return Err(Error::DimensionMismatch(format!(
                    "split ({da}, {db}) incompatible with dim {}",
                    self.dim
                )));
            }
        }
        let mut out = self.clone();
        out.split = split;
        Ok(out)
    }

    /// Eigendecomposition with descending, zero-clamped eigenvalues.
    pub fn eig(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(&self.mat)
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += (self.mat[(i, j)] * self.mat[(j, i)]).re;
            }
        }
        acc
    }

    /// Kronecker product; the result's split is `(self.dim, other.dim)`.
    pub fn tensor_product(&self, other: &DensityMatrix) -> DensityMatrix {
        let mat = self.mat.kronecker(&other.mat);
        DensityMatrix::new_unchecked(mat, Some((self.dim, other.dim)))
    }

    /// Traces out one tensor factor of a bipartite state.
    ///
    /// `sub` names the subsystem that is traced *out*:
    /// `partial_trace(Subsystem::B)` returns the reduced state on `A`.
    /// The result carries no split.
    pub fn partial_trace(&self, sub: Subsystem) -> Result<DensityMatrix> {
        let (da, db) = self.split.ok_or_else(|| {
            Error::MissingSplit("partial_trace needs a state with a bipartite split".into())
        })?;
        let mat = match sub {
            Subsystem::B => DMatrix::from_fn(da, da, |i, k| {
                (0..db).map(|j| self.mat[(i * db + j, k * db + j)]).sum()
            }),
            Subsystem::A => DMatrix::from_fn(db, db, |j, l| {
                (0..da).map(|i| self.mat[(i * db + j, i * db + l)]).sum()
            }),
        };
        Ok(DensityMatrix::new_unchecked(mat, None))
    }

    /// Partial transpose on subsystem `B`, followed by the positivity
    /// test.
    ///
    /// The verdict is conclusive for separability only on a `(2, 2)`
    /// split; for every other split PPT is a necessary condition and the
    /// verdict is flagged accordingly.
    pub fn is_ppt(&self) -> Result<PptVerdict> {
        let (da, db) = self.split.ok_or_else(|| {
            Error::MissingSplit("is_ppt needs a state with a bipartite split".into())
        })?;
        let pt = DMatrix::from_fn(self.dim, self.dim, |m, n| {
            let (i, j) = (m / db, m % db);
            let (k, l) = (n / db, n % db);
            self.mat[(i * db + l, k * db + j)]
        });
        let eig = eig_hermitian(&pt)?;
        let min = eig.values().last().copied().unwrap_or(0.0);
        Ok(PptVerdict {
            ppt: min >= -tol::PSD_TOL,
            min_eigenvalue: min,
            conclusive: (da, db) == (2, 2),
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.clone()).expect("density matrix serialization cannot fail")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(v.clone())?)
    }
}

/// Outcome of the positive-partial-transpose test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PptVerdict {
    /// Whether the partial transpose is positive semidefinite.
    pub ppt: bool,
    /// Smallest eigenvalue of the partial transpose.
    pub min_eigenvalue: f64,
    /// True only for a `(2, 2)` split, where PPT is equivalent to
    /// separability; otherwise PPT is merely necessary.
    pub conclusive: bool,
}

#[derive(Serialize, Deserialize)]
struct PureStateJson {
    dim: usize,
    split: Option<(usize, usize)>,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// A pure state: a unit vector with an optional bipartite split.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PureStateJson", into = "PureStateJson")]
pub struct PureState {
    dim: usize,
    split: Option<(usize, usize)>,
    amps: DVector<Complex64>,
}

impl From<PureState> for PureStateJson {
    fn from(s: PureState) -> Self {
        PureStateJson {
            dim: s.dim,
            split: s.split,
            re: s.amps.iter().map(|z| z.re).collect(),
            im: s.amps.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<PureStateJson> for PureState {
    type Error = Error;

    fn try_from(j: PureStateJson) -> Result<Self> {
        if j.re.len() != j.dim || j.im.len() != j.dim {
            return Err(Error::InvalidState(format!(
                "amplitude arrays do not have length {}",
                j.dim
            )));
        }
        let amps = DVector::from_fn(j.dim, |i, _| Complex64::new(j.re[i], j.im[i]));
        PureState::new(amps, j.split)
    }
}

impl PureState {
    /// Validating constructor: the vector must have unit norm within
    /// `1e-12` and the split, if given, must factor the dimension.
    pub fn new(amps: DVector<Complex64>, split: Option<(usize, usize)>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        if let Some((da, db)) = split {
            if da * db != dim {
                return Err(Error::DimensionMismatch(format!(
                    "split ({da}, {db}) incompatible with dim {dim}"
                )));
            }
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > tol::NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state vector norm {norm} is not 1 within {:.0e}",
                tol::NORM_TOL
            )));
        }
        Ok(Self { dim, split, amps })
    }

    pub(crate) fn new_unchecked(amps: DVector<Complex64>, split: Option<(usize, usize)>) -> Self {
        let dim = amps.len();
        Self { dim, split, amps }
    }

    /// Computational basis vector `|index>`.
    pub fn basis_vector(dim: usize, index: usize, split: Option<(usize, usize)>) -> Result<Self> {
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} out of range for dim {dim}")));
        }
        let amps = DVector::from_fn(dim, |i, _| {
            if i == index {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(amps, split)
    }

    /// The maximally entangled state `sum_j |jj> / sqrt(d)` on
    /// `C^d x C^d`, with split `(d, d)`.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("maximally entangled state needs d >= 2, got {d}")));
        }
        let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        let amps = DVector::from_fn(d * d, |i, _| {
            if i % d == i / d {
                w
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(amps, Some((d, d)))
    }

    /// Pure state `sum_j sqrt(p_j) |jj>` with the given Schmidt spectrum.
    pub fn from_schmidt_probabilities(p: &[f64]) -> Result<Self> {
        check_probability_vector(p)?;
        let d = p.len();
        if d < 2 {
            return Err(Error::Domain("need at least two Schmidt coefficients".into()));
        }
        let mut amps = DVector::from_element(d * d, Complex64::new(0.0, 0.0));
        for (j, &pj) in p.iter().enumerate() {
            amps[j * d + j] = Complex64::new(pj.sqrt(), 0.0);
        }
        let norm = amps.norm();
        amps /= Complex64::new(norm, 0.0);
        Self::new(amps, Some((d, d)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split(&self) -> Option<(usize, usize)> {
        self.split
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    /// Projector onto this state.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Kronecker product; the result's split is `(self.dim, other.dim)`.
    pub fn tensor_product(&self, other: &PureState) -> PureState {
        let amps = self.amps.kronecker(&other.amps);
        PureState::new_unchecked(amps, Some((self.dim, other.dim)))
    }

    /// Overlap `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// Schmidt decomposition across the state's split.
    pub fn schmidt_decompose(&self) -> Result<SchmidtForm> {
        let (da, db) = self.split.ok_or_else(|| {
            Error::MissingSplit("schmidt_decompose needs a state with a bipartite split".into())
        })?;
        // Reshape amplitudes into the dA x dB coefficient matrix of the
        // product basis.
        let coeff = DMatrix::from_fn(da, db, |i, j| self.amps[i * db + j]);
        let svd = coeff.clone().svd(true, true);
        let u = svd.u.as_ref().expect("svd with compute_u");
        let v_t = svd.v_t.as_ref().expect("svd with compute_v");
        let r = svd.singular_values.len();

        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap()
        });

        let mut coefficients = Vec::with_capacity(r);
        let mut cols_a: Vec<DVector<Complex64>> = Vec::with_capacity(r);
        let mut cols_b: Vec<DVector<Complex64>> = Vec::with_capacity(r);
        for &k in &order {
            let s = svd.singular_values[k];
            coefficients.push(s * s);
            let mut a = u.column(k).clone_owned();
            // The reconstruction A = U diag(s) v_t makes row k of v_t the
            // local B vector of the pair as stored.
            let mut b = DVector::from_fn(db, |j, _| v_t[(k, j)]);
            // A global phase moved onto `a` must be compensated on `b` to
            // keep each Schmidt pair's product unchanged.
            let max = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if max > 0.0 {
                if let Some(z) = a.iter().find(|z| z.norm() > 1e-8 * max).copied() {
                    let factor = z.conj() / z.norm();
                    for entry in a.iter_mut() {
                        *entry *= factor;
                    }
                    for entry in b.iter_mut() {
                        *entry *= factor.conj();
                    }
                }
            }
            cols_a.push(a);
            cols_b.push(b);
        }

        let basis_a = complete_unitary(cols_a, da);
        let basis_b = complete_unitary(cols_b, db);
        Ok(SchmidtForm { split: (da, db), coefficients, basis_a, basis_b })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.clone()).expect("pure state serialization cannot fail")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(v.clone())?)
    }
}

/// Extends a set of orthonormal columns to a full `d x d` unitary by
/// orthonormalizing standard basis vectors against them.
fn complete_unitary(mut cols: Vec<DVector<Complex64>>, d: usize) -> DMatrix<Complex64> {
    let mut candidates = 0..d;
    while cols.len() < d {
        let idx = candidates.next().expect("standard basis spans the complement");
        let mut v = DVector::from_fn(d, |i, _| {
            if i == idx {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        for c in &cols {
            let overlap = c.dotc(&v);
            v -= c * overlap;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= Complex64::new(norm, 0.0);
            phase_fix(&mut v);
            cols.push(v);
        }
    }
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for (k, c) in cols.iter().enumerate() {
        out.set_column(k, c);
    }
    out
}

/// Schmidt decomposition `|psi> = sum_j sqrt(p_j) |a_j>|b_j>`.
///
/// Coefficients `p_j` are the squared singular values in descending
/// order; `basis_a` and `basis_b` are full local unitaries whose first
/// `min(dA, dB)` columns are the Schmidt vectors.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    split: (usize, usize),
    coefficients: Vec<f64>,
    basis_a: DMatrix<Complex64>,
    basis_b: DMatrix<Complex64>,
}

impl SchmidtForm {
    pub fn split(&self) -> (usize, usize) {
        self.split
    }

    /// Squared Schmidt coefficients, descending, summing to 1.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis_a(&self) -> &DMatrix<Complex64> {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &DMatrix<Complex64> {
        &self.basis_b
    }

    /// Number of coefficients above the zero clamp.
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&p| p > tol::EIG_CLAMP).count()
    }

    /// Rebuilds the pure state `sum_j sqrt(p_j) |a_j>|b_j>`.
    pub fn reconstruct(&self) -> PureState {
        let (da, db) = self.split;
        let mut amps = DVector::from_element(da * db, Complex64::new(0.0, 0.0));
        for (k, &p) in self.coefficients.iter().enumerate() {
            let s = Complex64::new(p.max(0.0).sqrt(), 0.0);
            let a = self.basis_a.column(k);
            let b = self.basis_b.column(k);
            for i in 0..da {
                for j in 0..db {
                    amps[i * db + j] += s * a[i] * b[j];
                }
            }
        }
        let norm = amps.norm();
        if norm > 0.0 {
            amps /= Complex64::new(norm, 0.0);
        }
        PureState::new_unchecked(amps, Some(self.split))
    }
}

pub(crate) fn check_probability_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Domain("empty probability vector".into()));
    }
    if p.iter().any(|&x| !x.is_finite() || x < -tol::EIG_CLAMP || x > 1.0 + 1e-9) {
        return Err(Error::Domain(format!("entries outside [0, 1]: {p:?}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

/// Deterministic generator for the seeded sampling routines.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn complex_normal(rng: &mut ChaCha20Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-random pure state of the given dimension.
pub fn random_pure_with(rng: &mut ChaCha20Rng, dim: usize) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut amps = DVector::from_fn(dim, |_, _| complex_normal(rng));
    let norm = amps.norm();
    amps /= Complex64::new(norm, 0.0);
    PureState::new(amps, None)
}

/// Seeded Haar-random pure state.
pub fn random_pure(dim: usize, seed: u64) -> Result<PureState> {
    random_pure_with(&mut seeded_rng(seed), dim)
}

/// Full-rank random density matrix from the Ginibre ensemble,
/// `G G^dagger / Tr(G G^dagger)`.
pub fn random_density_with(rng: &mut ChaCha20Rng, dim: usize) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let h = &g * g.adjoint();
    let trace = h.trace().re;
    let mat = (&h + h.adjoint()).map(|z| z * (0.5 / trace));
    DensityMatrix::new(mat, None)
}

/// Seeded random density matrix.
pub fn random_density(dim: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut seeded_rng(seed), dim)
}

/// Product of independent Haar-random local pure states, with split
/// `(dA, dB)`.
pub fn random_product_pure_with(rng: &mut ChaCha20Rng, dims: (usize, usize)) -> Result<PureState> {
    let a = random_pure_with(rng, dims.0)?;
    let b = random_pure_with(rng, dims.1)?;
    Ok(a.tensor_product(&b))
}

/// Seeded random product pure state.
pub fn random_product_pure(dims: (usize, usize), seed: u64) -> Result<PureState> {
    random_product_pure_with(&mut seeded_rng(seed), dims)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix,
/// with the R diagonal's phases absorbed so the distribution is uniform.
pub fn random_unitary_with(rng: &mut ChaCha20Rng, dim: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let factor = d / d.norm();
            let mut col = q.column_mut(k);
            for entry in col.iter_mut() {
                *entry *= factor;
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plus_tensor_plus_has_uniform_amplitudes() {
        let inv = 1.0 / 2.0f64.sqrt();
        let plus = PureState::new(DVector::from_vec(vec![c(inv, 0.0), c(inv, 0.0)]), None).unwrap();
        let prod = plus.tensor_product(&plus);
        assert_eq!(prod.split(), Some((2, 2)));
        for k in 0..4 {
            assert_abs_diff_eq!(prod.amplitudes()[k].re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(prod.amplitudes()[k].im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn eig_of_half_pauli_x_plus_half_identity() {
        // (X + I)/2 has eigenvalues 1 and 0 with eigenvectors (1, +-1)/sqrt(2).
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        let eig = eig_hermitian(&m).unwrap();
        assert_abs_diff_eq!(eig.values()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values()[1], 0.0, epsilon = 1e-12);
        let v0 = eig.vectors().column(0);
        assert_abs_diff_eq!(v0[0].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(v0[1].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        let rec = eig.reconstruct();
        assert!((rec - m).iter().all(|z| z.norm() < tol::RECONSTRUCT_TOL));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(eig_hermitian(&m), Err(Error::InvalidState(_))));
    }

    #[test]
    fn schmidt_of_cross_bell_state() {
        // (|01> + |10>)/sqrt(2): the coefficient matrix [[0, 1], [1, 0]]/sqrt(2)
        // has both singular values 1/sqrt(2), so both Schmidt weights are 1/2.
        let inv = 1.0 / 2.0f64.sqrt();
        let psi = PureState::new(
            DVector::from_vec(vec![c(0.0, 0.0), c(inv, 0.0), c(inv, 0.0), c(0.0, 0.0)]),
            Some((2, 2)),
        )
        .unwrap();
        let schmidt = psi.schmidt_decompose().unwrap();
        assert_abs_diff_eq!(schmidt.coefficients()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(schmidt.coefficients()[1], 0.5, epsilon = 1e-12);
        let rec = schmidt.reconstruct();
        let fidelity = rec.overlap(&psi).norm().powi(2);
        assert!(1.0 - fidelity < tol::RECONSTRUCT_TOL);
    }

    #[test]
    fn schmidt_handles_rectangular_splits() {
        let mut rng = seeded_rng(11);
        let psi = {
            let mut amps = DVector::from_fn(6, |_, _| complex_normal(&mut rng));
            let norm = amps.norm();
            amps /= c(norm, 0.0);
            PureState::new(amps, Some((2, 3))).unwrap()
        };
        let schmidt = psi.schmidt_decompose().unwrap();
        assert_eq!(schmidt.coefficients().len(), 2);
        let sum: f64 = schmidt.coefficients().iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
        // Completed local bases must be unitary.
        for (basis, d) in [(schmidt.basis_a(), 2usize), (schmidt.basis_b(), 3usize)] {
            let gram = basis.adjoint() * basis;
            for i in 0..d {
                for j in 0..d {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(gram[(i, j)].re, expect, epsilon = 1e-10);
                    assert_abs_diff_eq!(gram[(i, j)].im, 0.0, epsilon = 1e-10);
                }
            }
        }
        let rec = schmidt.reconstruct();
        assert!(1.0 - rec.overlap(&psi).norm().powi(2) < tol::RECONSTRUCT_TOL);
    }

    #[test]
    fn schmidt_spectrum_invariant_under_local_unitaries() {
        let mut rng = seeded_rng(5);
        for _ in 0..10 {
            let psi = {
                let mut amps = DVector::from_fn(9, |_, _| complex_normal(&mut rng));
                let norm = amps.norm();
                amps /= c(norm, 0.0);
                PureState::new(amps, Some((3, 3))).unwrap()
            };
            let ua = random_unitary_with(&mut rng, 3);
            let ub = random_unitary_with(&mut rng, 3);
            let u = ua.kronecker(&ub);
            let rotated = PureState::new(&u * psi.amplitudes(), Some((3, 3))).unwrap();
            let s1 = psi.schmidt_decompose().unwrap();
            let s2 = rotated.schmidt_decompose().unwrap();
            for (a, b) in s1.coefficients().iter().zip(s2.coefficients()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn partial_trace_inverts_tensor_product() {
        let mut rng = seeded_rng(17);
        for _ in 0..10 {
            let a = random_density_with(&mut rng, 3).unwrap();
            let b = random_density_with(&mut rng, 2).unwrap();
            let joint = a.tensor_product(&b);
            let ra = joint.partial_trace(Subsystem::B).unwrap();
            let rb = joint.partial_trace(Subsystem::A).unwrap();
            assert!((ra.matrix() - a.matrix()).iter().all(|z| z.norm() < 1e-12));
            assert!((rb.matrix() - b.matrix()).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn bell_marginals_are_maximally_mixed_and_purity_matches_schmidt() {
        let bell = PureState::maximally_entangled(2).unwrap();
        let rho = bell.density();
        let ra = rho.partial_trace(Subsystem::B).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(ra.matrix()[(i, j)].re, expect, epsilon = 1e-12);
            }
        }
        // Purity of the marginal equals the sum of squared Schmidt weights.
        let schmidt = bell.schmidt_decompose().unwrap();
        let sum_sq: f64 = schmidt.coefficients().iter().map(|p| p * p).sum();
        assert_abs_diff_eq!(ra.purity(), sum_sq, epsilon = 1e-12);
        assert_abs_diff_eq!(ra.purity(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn ppt_detects_bell_entanglement_and_accepts_separable_mixtures() {
        let bell = PureState::maximally_entangled(2).unwrap().density();
        let verdict = bell.is_ppt().unwrap();
        assert!(!verdict.ppt);
        assert!(verdict.conclusive);
        // Partial transpose of the Bell projector has eigenvalue -1/2.
        assert_abs_diff_eq!(verdict.min_eigenvalue, -0.5, epsilon = 1e-12);

        let sep = DensityMatrix::from_probabilities(&[0.5, 0.0, 0.0, 0.5], Some((2, 2))).unwrap();
        let verdict = sep.is_ppt().unwrap();
        assert!(verdict.ppt);
        assert!(verdict.conclusive);

        // On a (2, 3) split the verdict is only a necessary condition.
        let sep23 = DensityMatrix::from_probabilities(
            &[0.4, 0.0, 0.0, 0.0, 0.6, 0.0],
            Some((2, 3)),
        )
        .unwrap();
        let verdict = sep23.is_ppt().unwrap();
        assert!(verdict.ppt);
        assert!(!verdict.conclusive);
    }

    #[test]
    fn random_density_is_full_rank() {
        for seed in [0u64, 1, 2] {
            let rho = random_density(3, seed).unwrap();
            let eig = rho.eig().unwrap();
            assert!(eig.values().iter().all(|&v| v > 0.0), "eigenvalues {:?}", eig.values());
            assert_abs_diff_eq!(eig.values().iter().sum::<f64>(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn random_states_are_seed_deterministic() {
        let a = random_pure(4, 123).unwrap();
        let b = random_pure(4, 123).unwrap();
        let d = random_pure(4, 124).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        assert_ne!(a.amplitudes(), d.amplitudes());
    }

    #[test]
    fn json_round_trip_preserves_state_and_split() {
        let rho = random_density(3, 9).unwrap().with_split(None).unwrap();
        let bell = PureState::maximally_entangled(2).unwrap().density();
        for state in [rho, bell] {
            let json = state.to_json();
            let back = DensityMatrix::from_json(&json).unwrap();
            assert_eq!(back.split(), state.split());
            assert!((back.matrix() - state.matrix()).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn json_rejects_invalid_matrices() {
        let json = serde_json::json!({
            "dim": 2,
            "split": null,
            "re": [[0.5, 1.0], [0.0, 0.5]],
            "im": [[0.0, 0.0], [0.0, 0.0]],
        });
        assert!(DensityMatrix::from_json(&json).is_err());

        let json = serde_json::json!({
            "dim": 2,
            "split": null,
            "re": [[0.9, 0.0], [0.0, 0.2]],
            "im": [[0.0, 0.0], [0.0, 0.0]],
        });
        assert!(DensityMatrix::from_json(&json).is_err());
    }

    #[test]
    fn density_constructor_rejects_negative_eigenvalues() {
        let mat = DMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(matches!(DensityMatrix::new(mat, None), Err(Error::InvalidState(_))));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = seeded_rng(3);
        let u = random_unitary_with(&mut rng, 4);
        let gram = u.adjoint() * &u;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[(i, j)].re, expect, epsilon = 1e-10);
                assert_abs_diff_eq!(gram[(i, j)].im, 0.0, epsilon = 1e-10);
            }
        }
    }
}
