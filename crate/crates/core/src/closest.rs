//! Closed-form closest separable states for pure entangled inputs.
//!
//! Three families of pure states admit an explicit minimizer of the
//! quasi-relative entropy over separable states, and this module constructs
//! the minimizer together with its entanglement value in each case:
//!
//! * maximally entangled states in any dimension, for every operator
//!   monotone decreasing generator with `f(1) = 0`;
//! * arbitrary pure states when the transfer function `H_f` is a positive
//!   constant, in which case the minimizer shares the Schmidt spectrum of
//!   the input;
//! * two-qubit pure states when `H_f` is monotone, where the minimizer
//!   spectrum `(q, 1 - q)` solves a scalar fixed-point equation.
//!
//! Every result carries a [`Certificate`]: a seeded random probe of the
//! directional derivative of the entropy toward pure product states, which
//! must be nonnegative (up to tolerance) at a genuine minimizer.  The
//! certificate is a check on the implementation, not a proof; the proofs
//! back the construction, the sampling guards against transcription bugs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::fgen::{GeneratorFunction, HfClass, QuadratureSpec};
use crate::qstate::{
    check_probability_vector, random_pure_with, seeded_rng, DensityMatrix, PureState, SchmidtForm,
};
use crate::{tol, Error, Result};

/// Default number of random product directions probed by a certificate.
pub const DEFAULT_CERT_SAMPLES: usize = 1000;

/// Default RNG seed for certificates built inside the constructors.
pub const DEFAULT_CERT_SEED: u64 = 0;

/// Schmidt coefficients closer than this are treated as equal when deciding
/// whether a spectrum is uniform.  SVD noise sits near 1e-15; genuine
/// non-uniform spectra differ by far more than 1e-9 in practice.
const UNIFORM_TOL: f64 = 1e-9;

/// Inset applied to open-interval bisection brackets.
const BRACKET_EPS: f64 = 1e-9;

/// Which optimality theorem produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// Maximally entangled input, any admissible generator.
    MaximallyEntangled,
    /// Constant positive `H_f`; minimizer spectrum equals the Schmidt spectrum.
    FlatH,
    /// Two-qubit input with monotone `H_f`; spectrum `(q, 1 - q)`.
    TwoQubit,
}

impl Theorem {
    /// Short machine-readable tag used in JSON output.
    pub fn tag(&self) -> &'static str {
        match self {
            Theorem::MaximallyEntangled => "max",
            Theorem::FlatH => "flatH",
            Theorem::TwoQubit => "qubit",
        }
    }
}

impl std::fmt::Display for Theorem {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        out.write_str(self.tag())
    }
}

/// Outcome of a random first-order optimality probe.
///
/// At the claimed minimizer the directional derivative of the entropy toward
/// any pure product state must be nonnegative.  The certificate records the
/// smallest derivative seen over `samples` seeded random product directions.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub theorem: Theorem,
    pub samples: usize,
    pub seed: u64,
    pub min_directional_derivative: f64,
}

impl Certificate {
    /// True when no sampled direction undercuts the stationarity threshold.
    pub fn passes(&self) -> bool {
        self.min_directional_derivative >= tol::CERTIFICATE_THRESHOLD
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "theorem": self.theorem.tag(),
            "samples": self.samples,
            "seed": self.seed,
            "min_directional_derivative": self.min_directional_derivative,
            "passes": self.passes(),
        })
    }
}

/// A closest separable state together with the entanglement value.
///
/// `p` is the Schmidt spectrum of the input, `q` the spectrum of the
/// minimizer over the same product basis, and `sigma_star` the minimizer
/// itself with its bipartite split recorded.
#[derive(Debug, Clone)]
pub struct ClosestResult {
    pub theorem: Theorem,
    pub entanglement: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub sigma_star: DensityMatrix,
    pub certificate: Certificate,
}

impl ClosestResult {
    pub fn to_json(&self) -> serde_json::Value {
        let value = if self.entanglement.is_finite() {
            serde_json::json!(self.entanglement)
        } else {
            serde_json::json!("inf")
        };
        serde_json::json!({
            "theorem": self.theorem.tag(),
            "entanglement": value,
            "schmidt": self.p,
            "q": self.q,
            "sigma_star": self.sigma_star.to_json(),
            "certificate": self.certificate.to_json(),
        })
    }
}

/// Closest separable state to the maximally entangled state of local
/// dimension `d`: the isotropic mixture `sum_j (1/d) |jj><jj|`, at
/// entanglement `f(1/d)`.
pub fn closest_maxent(d: usize, f: &GeneratorFunction) -> Result<ClosestResult> {
    if d < 2 {
        return Err(Error::Domain(format!(
            "maximally entangled state needs local dimension >= 2, got {d}"
        )));
    }
    let q = vec![1.0 / d as f64; d];
    let entanglement = f.eval(1.0 / d as f64)?;
    let sigma_star = diagonal_sigma(&q)?;
    let certificate = sample_certificate(
        Theorem::MaximallyEntangled,
        &q,
        &q,
        (d, d),
        f,
        DEFAULT_CERT_SAMPLES,
        DEFAULT_CERT_SEED,
    )?;
    Ok(ClosestResult {
        theorem: Theorem::MaximallyEntangled,
        entanglement,
        p: q.clone(),
        q,
        sigma_star,
        certificate,
    })
}

/// Closest separable state to `sum_j sqrt(p_j) |jj>` when `H_f` is a
/// positive constant: the dephased input `sum_j p_j |jj><jj|`, at
/// entanglement `sum_j p_j f(p_j)`.
pub fn closest_pure_flat_h(p: &[f64], f: &GeneratorFunction) -> Result<ClosestResult> {
    check_probability_vector(p)?;
    if p.len() < 2 {
        return Err(Error::Domain(
            "need at least two Schmidt coefficients".into(),
        ));
    }
    require_flat_h(f)?;
    let entanglement = flat_h_entanglement(p, f)?;
    let q: Vec<f64> = p.to_vec();
    let sigma_star = diagonal_sigma(&q)?;
    let n = p.len();
    let certificate = sample_certificate(
        Theorem::FlatH,
        p,
        &q,
        (n, n),
        f,
        DEFAULT_CERT_SAMPLES,
        DEFAULT_CERT_SEED,
    )?;
    Ok(ClosestResult {
        theorem: Theorem::FlatH,
        entanglement,
        p: p.to_vec(),
        q,
        sigma_star,
        certificate,
    })
}

/// Solves `rhs(q) = p` for the minimizer spectrum of a two-qubit state with
/// Schmidt spectrum `(p, 1 - p)`, where
/// `rhs(q) = q H_f(1-q) / (q H_f(1-q) + (1-q) H_f(q))`.
///
/// Requires `H_f` constant or strictly monotone; for constant `H_f` the
/// solution is `q = p` and no iteration runs.  The monotone cases bracket
/// `q` using the known order relations between `p`, `q` and `1/2`, then
/// bisect, with a scan fallback when the themed bracket shows no sign
/// change.
pub fn solve_q(p: f64, f: &GeneratorFunction) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "solve_q needs p strictly inside (0, 1), got {p}"
        )));
    }
    let spec = QuadratureSpec::default();
    let class = f.classify_hf(&spec)?;
    match class {
        HfClass::Constant => return Ok(p),
        HfClass::Other => {
            return Err(Error::Hypothesis(format!(
                "H_f for '{}' is neither constant nor monotone on (0, 1); \
                 the two-qubit minimizer theorem does not apply",
                f.name()
            )))
        }
        HfClass::Increasing | HfClass::Decreasing => {}
    }
    if p == 0.5 {
        // rhs(1/2) = 1/2 for every admissible f, with no search needed.
        return Ok(0.5);
    }

    // Order relations between p, q and 1/2: increasing H_f pushes q away
    // from 1/2 past p, decreasing H_f pulls q between 1/2 and p.
    let (lo, hi) = match (class, p > 0.5) {
        (HfClass::Increasing, true) => (p, 1.0 - BRACKET_EPS),
        (HfClass::Increasing, false) => (BRACKET_EPS, p),
        (HfClass::Decreasing, true) => (0.5, p),
        (HfClass::Decreasing, false) => (p, 0.5),
        _ => unreachable!("constant and other classes returned above"),
    };

    let residual = |q: f64| -> Result<f64> { Ok(rhs(q, f, &spec)? - p) };
    let mut lo = lo;
    let mut hi = hi;
    let mut f_lo = residual(lo)?;
    let f_hi = residual(hi)?;
    if f_lo == 0.0 {
        return finish_solve(lo, p, f, &spec);
    }
    if f_hi == 0.0 {
        return finish_solve(hi, p, f, &spec);
    }
    if f_lo * f_hi > 0.0 {
        // The themed bracket failed (possible for nearly flat or barely
        // monotone H_f near the classification margin): scan the open
        // interval for any adjacent sign change instead.
        let (slo, shi, sflo) = scan_for_bracket(&residual)?;
        lo = slo;
        hi = shi;
        f_lo = sflo;
    }

    while hi - lo > tol::BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = residual(mid)?;
        if f_mid == 0.0 {
            return finish_solve(mid, p, f, &spec);
        }
        if f_mid * f_lo > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    finish_solve(0.5 * (lo + hi), p, f, &spec)
}

/// Closest separable state to the two-qubit pure state with Schmidt
/// spectrum `(p, 1 - p)` when `H_f` is constant or monotone.
///
/// The minimizer is `q |00><00| + (1 - q) |11><11|` with `q` from
/// [`solve_q`], at entanglement `p f(q) + (1 - p) f(1 - q)`.  The endpoint
/// inputs `p = 0` and `p = 1` are product states with entanglement zero.
pub fn closest_two_qubit(p: f64, f: &GeneratorFunction) -> Result<ClosestResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "two-qubit Schmidt weight must lie in [0, 1], got {p}"
        )));
    }
    let (q0, entanglement) = if p == 0.0 || p == 1.0 {
        (p, 0.0)
    } else {
        two_qubit_core(p, f)?
    };
    let p_vec = vec![p, 1.0 - p];
    let q_vec = vec![q0, 1.0 - q0];
    let sigma_star = diagonal_sigma(&q_vec)?;
    let certificate = sample_certificate(
        Theorem::TwoQubit,
        &p_vec,
        &q_vec,
        (2, 2),
        f,
        DEFAULT_CERT_SAMPLES,
        DEFAULT_CERT_SEED,
    )?;
    Ok(ClosestResult {
        theorem: Theorem::TwoQubit,
        entanglement,
        p: p_vec,
        q: q_vec,
        sigma_star,
        certificate,
    })
}

/// Dispatches an arbitrary bipartite pure state to whichever closed-form
/// theorem covers its Schmidt spectrum and the generator's `H_f` class.
///
/// Order of precedence: uniform spectra (including product states, rank 1)
/// use the maximal-entanglement form; constant positive `H_f` covers every
/// spectrum; monotone `H_f` covers Schmidt rank 2.  Anything else is an
/// honest hypothesis failure, not an approximation.
pub fn closest_pure_state(psi: &PureState, f: &GeneratorFunction) -> Result<ClosestResult> {
    let schmidt = psi.schmidt_decompose()?;
    let p = schmidt.coefficients().to_vec();
    let r = schmidt.rank();
    if r == 0 {
        return Err(Error::InvalidState("state has empty Schmidt spectrum".into()));
    }

    let uniform = p[0] - p[r - 1] <= UNIFORM_TOL;
    let (theorem, q, entanglement) = if uniform {
        let w = 1.0 / r as f64;
        let mut q = vec![0.0; p.len()];
        q[..r].fill(w);
        (Theorem::MaximallyEntangled, q, f.eval(w)?)
    } else {
        let spec = QuadratureSpec::default();
        match f.classify_hf(&spec)? {
            HfClass::Constant => {
                require_flat_h(f)?;
                (Theorem::FlatH, p.clone(), flat_h_entanglement(&p, f)?)
            }
            HfClass::Increasing | HfClass::Decreasing if r == 2 => {
                let (q0, e) = two_qubit_core(p[0], f)?;
                let mut q = vec![0.0; p.len()];
                q[0] = q0;
                q[1] = 1.0 - q0;
                (Theorem::TwoQubit, q, e)
            }
            class => {
                return Err(Error::Hypothesis(format!(
                    "no closed-form minimizer: Schmidt rank {r} with H_f class \
                     '{class}' for '{}' is outside the proven cases \
                     (uniform spectrum, constant H_f, or rank 2 with monotone H_f)",
                    f.name()
                )))
            }
        }
    };

    let sigma_star = schmidt_sigma(&q, &schmidt)?;
    let split = psi
        .split()
        .expect("schmidt_decompose succeeded, so a split is declared");
    let certificate = sample_certificate(
        theorem,
        &p,
        &q,
        split,
        f,
        DEFAULT_CERT_SAMPLES,
        DEFAULT_CERT_SEED,
    )?;
    Ok(ClosestResult {
        theorem,
        entanglement,
        p,
        q,
        sigma_star,
        certificate,
    })
}

/// Directional derivative of `sigma -> S_f(rho || sigma)` at the candidate
/// minimizer, in the direction of the pure product state `|a x b>`.
///
/// `p` is the Schmidt spectrum of the pure input, `q` the minimizer
/// spectrum over the same Schmidt basis, and `a`, `b` unit vectors holding
/// the product direction's components in that basis.  Indices with
/// `p_j = 0` do not contribute.  Nonnegativity for all directions is
/// first-order optimality over the separable set.
pub fn directional_derivative(
    p: &[f64],
    q: &[f64],
    f: &GeneratorFunction,
    a: &DVector<Complex64>,
    b: &DVector<Complex64>,
) -> Result<f64> {
    check_probability_vector(p)?;
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "spectrum lengths differ: p has {}, q has {}",
            p.len(),
            q.len()
        )));
    }
    if a.len() < p.len() || b.len() < p.len() {
        return Err(Error::DimensionMismatch(format!(
            "direction vectors must cover all {} Schmidt indices, got {} and {}",
            p.len(),
            a.len(),
            b.len()
        )));
    }
    for v in [a, b] {
        if (v.norm() - 1.0).abs() > tol::NORM_TOL {
            return Err(Error::Domain(format!(
                "direction vectors must be unit, got norm {:.3e}",
                v.norm()
            )));
        }
    }
    let tables = DerivativeTables::new(p, q, f)?;
    Ok(tables.evaluate(a, b))
}

/// Reruns the first-order optimality probe for an existing result with a
/// chosen sample count and seed.
pub fn certify(
    result: &ClosestResult,
    f: &GeneratorFunction,
    samples: usize,
    seed: u64,
) -> Result<Certificate> {
    let split = result
        .sigma_star
        .split()
        .ok_or_else(|| Error::MissingSplit("certificate needs a bipartite split".into()))?;
    sample_certificate(
        result.theorem,
        &result.p,
        &result.q,
        split,
        f,
        samples,
        seed,
    )
}

/// `rhs(q)` of the two-qubit fixed-point equation.
fn rhs(q: f64, f: &GeneratorFunction, spec: &QuadratureSpec) -> Result<f64> {
    let h_q = f.hf(q, spec)?;
    let h_cq = f.hf(1.0 - q, spec)?;
    let num = q * h_cq;
    let den = q * h_cq + (1.0 - q) * h_q;
    if den <= 0.0 || !den.is_finite() {
        return Err(Error::Numeric(format!(
            "degenerate fixed-point denominator {den:.3e} at q = {q}"
        )));
    }
    Ok(num / den)
}

/// Residual gate and return for a candidate root of `rhs(q) = p`.
fn finish_solve(q: f64, p: f64, f: &GeneratorFunction, spec: &QuadratureSpec) -> Result<f64> {
    let res = (rhs(q, f, spec)? - p).abs();
    if res > tol::SOLVE_Q_RESIDUAL {
        return Err(Error::Numeric(format!(
            "fixed-point residual {res:.3e} exceeds {:.0e} at q = {q:.12} \
             (p = {p}, f = '{}')",
            tol::SOLVE_Q_RESIDUAL,
            f.name()
        )));
    }
    Ok(q)
}

/// Uniform scan over the open interval for an adjacent sign change of the
/// residual; used when the monotonicity-themed bracket fails.
fn scan_for_bracket(residual: &dyn Fn(f64) -> Result<f64>) -> Result<(f64, f64, f64)> {
    const POINTS: usize = 64;
    let step = (1.0 - 2.0 * BRACKET_EPS) / (POINTS - 1) as f64;
    let mut prev_x = BRACKET_EPS;
    let mut prev_r = residual(prev_x)?;
    for i in 1..POINTS {
        let x = BRACKET_EPS + step * i as f64;
        let r = residual(x)?;
        if prev_r * r <= 0.0 {
            return Ok((prev_x, x, prev_r));
        }
        prev_x = x;
        prev_r = r;
    }
    Err(Error::Numeric(
        "no sign change of rhs(q) - p found on (0, 1); the fixed-point \
         equation has no root at this precision"
            .into(),
    ))
}

/// Shared two-qubit solve: spectrum weight and entanglement value, with the
/// stationarity identities checked before anything is returned.
fn two_qubit_core(p: f64, f: &GeneratorFunction) -> Result<(f64, f64)> {
    let q = solve_q(p, f)?;
    let spec = QuadratureSpec::default();
    let h_q = f.hf(q, &spec)?;
    let h_cq = f.hf(1.0 - q, &spec)?;
    // Both partial derivatives of the entropy in the minimizer spectrum
    // must vanish at the solved q; these are two independent algebraic
    // rearrangements of the same stationarity condition.
    let d0 = (1.0 - p) * h_cq - p * ((1.0 - q) / q) * h_q;
    let d1 = p * h_q - (1.0 - p) * (q / (1.0 - q)) * h_cq;
    for d in [d0, d1] {
        if d.abs() > tol::DERIVATIVE_TOL {
            return Err(Error::Numeric(format!(
                "stationarity violated at solved q = {q:.12}: partial {d:.3e} \
                 exceeds {:.0e}",
                tol::DERIVATIVE_TOL
            )));
        }
    }
    let e = p * f.eval(q)? + (1.0 - p) * f.eval(1.0 - q)?;
    Ok((q, e))
}

/// Rejects generators whose `H_f` is not a positive constant.
fn require_flat_h(f: &GeneratorFunction) -> Result<()> {
    let spec = QuadratureSpec::default();
    let class = f.classify_hf(&spec)?;
    if class != HfClass::Constant {
        return Err(Error::Hypothesis(format!(
            "the flat-transfer theorem needs constant H_f, but '{}' \
             classifies as '{class}'",
            f.name()
        )));
    }
    let h = f.hf(0.5, &spec)?;
    if h <= tol::CLASSIFY_FLAT_TOL {
        return Err(Error::Hypothesis(format!(
            "constant H_f must be positive, but '{}' has H_f = {h:.3e}, \
             indistinguishable from zero at the classification tolerance",
            f.name()
        )));
    }
    Ok(())
}

/// `sum_j p_j f(p_j)` over the nonzero Schmidt weights.
fn flat_h_entanglement(p: &[f64], f: &GeneratorFunction) -> Result<f64> {
    let mut total = 0.0;
    for &pj in p {
        if pj > tol::EIG_CLAMP {
            total += pj * f.eval(pj)?;
        }
    }
    Ok(total)
}

/// Diagonal separable state `sum_j q_j |jj><jj|` on the canonical
/// `n x n` bipartite split.
fn diagonal_sigma(q: &[f64]) -> Result<DensityMatrix> {
    let n = q.len();
    let mut mat = DMatrix::from_element(n * n, n * n, Complex64::new(0.0, 0.0));
    for (j, &w) in q.iter().enumerate() {
        let idx = j * n + j;
        mat[(idx, idx)] = Complex64::new(w.max(0.0), 0.0);
    }
    DensityMatrix::new(mat, Some((n, n)))
}

/// Separable state `sum_j q_j |a_j b_j><a_j b_j|` over the Schmidt bases of
/// the input state.
fn schmidt_sigma(q: &[f64], form: &SchmidtForm) -> Result<DensityMatrix> {
    let (da, db) = form.split();
    let dim = da * db;
    let mut mat = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (j, &w) in q.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let a = form.basis_a().column(j);
        let b = form.basis_b().column(j);
        let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for i in 0..da {
            for k in 0..db {
                v[i * db + k] = a[i] * b[k];
            }
        }
        let w = Complex64::new(w, 0.0);
        for row in 0..dim {
            for col in 0..dim {
                mat[(row, col)] += w * v[row] * v[col].conj();
            }
        }
    }
    DensityMatrix::new(mat, Some((da, db)))
}

/// Precomputed `H_f` and `G_f` tables over the active Schmidt indices, so a
/// certificate pays the quadrature cost once, not per sample.
struct DerivativeTables {
    /// Indices j with p_j > 0; all other indices drop out of the formula.
    active: Vec<usize>,
    /// `sum_j p_j H_f(q_j)`.
    base: f64,
    /// `sqrt(p_j p_k / (q_j q_k)) G_f(q_j, q_k)` for active j, k.
    coef: DMatrix<f64>,
}

impl DerivativeTables {
    fn new(p: &[f64], q: &[f64], f: &GeneratorFunction) -> Result<Self> {
        let spec = QuadratureSpec::default();
        let active: Vec<usize> = (0..p.len()).filter(|&j| p[j] > tol::EIG_CLAMP).collect();
        for &j in &active {
            if q[j] <= 0.0 {
                return Err(Error::Domain(format!(
                    "q_{j} = {} must be positive where p_{j} = {} is",
                    q[j], p[j]
                )));
            }
        }
        let mut base = 0.0;
        for &j in &active {
            base += p[j] * f.hf(q[j], &spec)?;
        }
        let r = active.len();
        let mut coef = DMatrix::zeros(r, r);
        for (jj, &j) in active.iter().enumerate() {
            for (kk, &k) in active.iter().enumerate().skip(jj) {
                let g = f.gf(q[j], q[k], &spec)?;
                let scale = (p[j] * p[k] / (q[j] * q[k])).sqrt();
                coef[(jj, kk)] = scale * g;
                coef[(kk, jj)] = scale * g;
            }
        }
        Ok(Self { active, base, coef })
    }

    fn evaluate(&self, a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
        let c: Vec<Complex64> = self.active.iter().map(|&j| a[j] * b[j]).collect();
        let mut quad = 0.0;
        for (jj, cj) in c.iter().enumerate() {
            for (kk, ck) in c.iter().enumerate() {
                quad += self.coef[(jj, kk)] * (ck * cj.conj()).re;
            }
        }
        self.base - quad
    }
}

/// Runs the seeded random probe behind every certificate.
fn sample_certificate(
    theorem: Theorem,
    p: &[f64],
    q: &[f64],
    split: (usize, usize),
    f: &GeneratorFunction,
    samples: usize,
    seed: u64,
) -> Result<Certificate> {
    if samples == 0 {
        return Err(Error::Domain("certificate needs at least one sample".into()));
    }
    let tables = DerivativeTables::new(p, q, f)?;
    let (da, db) = split;
    let mut rng = seeded_rng(seed);
    let mut min = f64::INFINITY;
    for _ in 0..samples {
        // Haar-random local directions; their law is invariant under the
        // basis rotation into the Schmidt frame, so sampling componentwise
        // in that frame is already fully general.
        let a = random_pure_with(&mut rng, da)?;
        let b = random_pure_with(&mut rng, db)?;
        let d = tables.evaluate(a.amplitudes(), b.amplitudes());
        if d < min {
            min = d;
        }
    }
    Ok(Certificate {
        theorem,
        samples,
        seed,
        min_directional_derivative: min,
    })
}
