//! Brute-force separable-state minimization oracle.
//!
//! Minimizes `sigma -> S_f(rho || sigma)` over convex combinations of
//! product pure states by derivative-free local descent with random
//! restarts.  The oracle is deliberately independent of the closed-form
//! constructions: it knows nothing about the theorems and only ever
//! produces upper bounds on the entanglement, so agreement with the
//! analytic values is evidence for both sides.
//!
//! The search parametrization is unconstrained: mixture weights live in a
//! raw vector that is projected onto the probability simplex at every
//! evaluation, and each local pure state is a point on the unit sphere in
//! hypersphere coordinates, `d - 1` nesting angles plus `d - 1` relative
//! phases per side.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fgen::GeneratorFunction;
use crate::qre::qre_from_spectra;
use crate::qstate::{
    check_probability_vector, eig_hermitian, random_pure_with, seeded_rng, DensityMatrix,
};
use crate::{tol, Error, Result};

/// A separable state presented as an explicit convex combination
/// `sum_i w_i |a_i b_i><a_i b_i|` of product pure states.
#[derive(Debug, Clone)]
pub struct ProductEnsemble {
    dims: (usize, usize),
    weights: Vec<f64>,
    locals: Vec<(DVector<Complex64>, DVector<Complex64>)>,
}

impl ProductEnsemble {
    /// Validates and normalizes an ensemble.  Weights must be a probability
    /// vector and every local state close to unit norm; both are rescaled
    /// to machine precision so that [`Self::assemble`] has an exact trace.
    pub fn new(
        weights: Vec<f64>,
        locals: Vec<(DVector<Complex64>, DVector<Complex64>)>,
    ) -> Result<Self> {
        if weights.len() != locals.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} local pairs",
                weights.len(),
                locals.len()
            )));
        }
        check_probability_vector(&weights)?;
        let (da, db) = match locals.first() {
            Some((a, b)) => (a.len(), b.len()),
            None => return Err(Error::Domain("ensemble needs at least one component".into())),
        };
        if da == 0 || db == 0 {
            return Err(Error::Domain("local dimensions must be positive".into()));
        }
        let mut normalized = Vec::with_capacity(locals.len());
        for (a, b) in locals {
            if a.len() != da || b.len() != db {
                return Err(Error::DimensionMismatch(format!(
                    "inconsistent local dimensions: expected ({da}, {db}), got ({}, {})",
                    a.len(),
                    b.len()
                )));
            }
            let (na, nb) = (a.norm(), b.norm());
            if (na - 1.0).abs() > 1e-9 || (nb - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidState(format!(
                    "local states must be unit vectors, got norms {na:.6e} and {nb:.6e}"
                )));
            }
            normalized.push((a / Complex64::new(na, 0.0), b / Complex64::new(nb, 0.0)));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| (w / total).max(0.0)).collect();
        Ok(Self { dims: (da, db), weights, locals: normalized })
    }

    /// Diagonal ensemble `sum_j q_j |jj><jj|` over computational product
    /// states; the natural warm start for theorem-predicted minimizers.
    pub fn diagonal(q: &[f64], dims: (usize, usize)) -> Result<Self> {
        let (da, db) = dims;
        if q.len() > da.min(db) {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal weights do not fit local dimensions ({da}, {db})",
                q.len()
            )));
        }
        let locals = (0..q.len())
            .map(|j| {
                let mut a = DVector::from_element(da, Complex64::new(0.0, 0.0));
                let mut b = DVector::from_element(db, Complex64::new(0.0, 0.0));
                a[j] = Complex64::new(1.0, 0.0);
                b[j] = Complex64::new(1.0, 0.0);
                (a, b)
            })
            .collect();
        Self::new(q.to_vec(), locals)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn locals(&self) -> &[(DVector<Complex64>, DVector<Complex64>)] {
        &self.locals
    }

    /// `sum_i w_i |a_i b_i><a_i b_i|` as a validated density matrix with
    /// the bipartite split recorded.  Separable by construction, hence PPT.
    pub fn assemble(&self) -> Result<DensityMatrix> {
        let mat = assemble_raw(&self.weights, &self.locals, self.dims);
        DensityMatrix::new(mat, Some(self.dims))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let locals: Vec<LocalPairJson> = self
            .locals
            .iter()
            .map(|(a, b)| LocalPairJson {
                a_re: a.iter().map(|z| z.re).collect(),
                a_im: a.iter().map(|z| z.im).collect(),
                b_re: b.iter().map(|z| z.re).collect(),
                b_im: b.iter().map(|z| z.im).collect(),
            })
            .collect();
        serde_json::to_value(EnsembleJson { weights: self.weights.clone(), locals })
            .expect("ensemble serialization cannot fail")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: EnsembleJson = serde_json::from_value(v.clone())?;
        let locals = raw
            .locals
            .into_iter()
            .map(|l| {
                if l.a_re.len() != l.a_im.len() || l.b_re.len() != l.b_im.len() {
                    return Err(Error::Parse(
                        "real and imaginary parts differ in length".into(),
                    ));
                }
                let a = DVector::from_iterator(
                    l.a_re.len(),
                    l.a_re.iter().zip(&l.a_im).map(|(&re, &im)| Complex64::new(re, im)),
                );
                let b = DVector::from_iterator(
                    l.b_re.len(),
                    l.b_re.iter().zip(&l.b_im).map(|(&re, &im)| Complex64::new(re, im)),
                );
                Ok((a, b))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.weights, locals)
    }
}

#[derive(Serialize, Deserialize)]
struct LocalPairJson {
    a_re: Vec<f64>,
    a_im: Vec<f64>,
    b_re: Vec<f64>,
    b_im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleJson {
    weights: Vec<f64>,
    locals: Vec<LocalPairJson>,
}

/// Search budget and reproducibility knobs for [`minimize`].
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Independent descent runs; the best result wins.
    pub restarts: usize,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Descent stops once the simplex value spread falls below this.
    pub tol: f64,
    /// Seed for all restart initializations.
    pub seed: u64,
    /// Mixture length; `None` means `(dA * dB)^2`, a Caratheodory-safe
    /// component count for the state-space dimension.
    pub k: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 50, max_iters: 2000, tol: 1e-9, seed: 0, k: None }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Domain(
                "restarts and max_iters must be positive".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.k == Some(0) {
            return Err(Error::Domain("component count k must be positive".into()));
        }
        Ok(())
    }
}

/// Best candidate found by [`minimize`].
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    /// Objective value; an upper bound on the entanglement by construction.
    pub value: f64,
    pub ensemble: ProductEnsemble,
    /// Index of the winning restart (0 is the warm start when provided).
    pub restart: usize,
    /// Descent iterations used by the winning restart.
    pub iterations: usize,
}

/// Minimizes `S_f(rho || sigma)` over product ensembles by Nelder-Mead
/// descent with seeded random restarts.
///
/// Every restart is deterministic in `cfg.seed` and its restart index, and
/// results are merged by `(value, restart index)`, so the outcome does not
/// depend on scheduling.  When `warm_start` is given it seeds restart 0,
/// padded with zero-weight random components up to the configured mixture
/// length; the remaining restarts probe globally from Haar-random locals
/// with uniform weights.  Infinite objective values (support violations
/// under `f` with infinite `f(0+)`) rank as a large finite penalty so the
/// descent can move off them.
pub fn minimize(
    rho: &DensityMatrix,
    f: &GeneratorFunction,
    cfg: &OptimizerConfig,
    warm_start: Option<&ProductEnsemble>,
) -> Result<MinimizeOutcome> {
    cfg.validate()?;
    if f.a_f() != 0.0 {
        return Err(Error::Domain(format!(
            "the oracle drops rank-deficient candidates and therefore needs \
             a_f = 0, but '{}' has a_f = {}",
            f.name(),
            f.a_f()
        )));
    }
    let dims = rho
        .split()
        .ok_or_else(|| Error::MissingSplit("minimization needs a bipartite split".into()))?;
    let (da, db) = dims;
    let k = cfg.k.unwrap_or((da * db) * (da * db));
    if let Some(w) = warm_start {
        if w.dims() != dims {
            return Err(Error::DimensionMismatch(format!(
                "warm start dims {:?} do not match the state's {:?}",
                w.dims(),
                dims
            )));
        }
        if w.k() > k {
            return Err(Error::Domain(format!(
                "warm start has {} components but the search uses k = {k}",
                w.k()
            )));
        }
    }

    let rho_eig = rho.eig()?;
    let objective = |params: &[f64]| -> f64 {
        let Ok((weights, locals)) = decode_params(params, k, dims) else {
            return tol::OBJECTIVE_PENALTY;
        };
        let sigma = assemble_raw(&weights, &locals, dims);
        match eig_hermitian(&sigma).and_then(|se| qre_from_spectra(&rho_eig, &se, f)) {
            Ok(v) if v.is_finite() => v.min(tol::OBJECTIVE_PENALTY),
            _ => tol::OBJECTIVE_PENALTY,
        }
    };

    let runs: Vec<(f64, Vec<f64>, usize)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = seeded_rng(cfg.seed);
            // Distinct, scheduling-independent stream per restart.
            rng.set_stream(restart as u64 + 1);
            let x0 = match (restart, warm_start) {
                (0, Some(w)) => encode_ensemble(w, k, &mut rng),
                _ => random_start(k, dims, &mut rng),
            };
            let (x, value, iters) =
                nelder_mead(&objective, &x0, 0.15, cfg.max_iters, cfg.tol);
            (value, x, iters)
        })
        .collect();

    let (best_idx, best) = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(j))
        })
        .expect("at least one restart ran");

    let (weights, locals) = decode_params(&best.1, k, dims)?;
    let ensemble = ProductEnsemble::new(weights, locals)?;
    Ok(MinimizeOutcome {
        value: best.0,
        ensemble,
        restart: best_idx,
        iterations: best.2,
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Angle parameters per local state of dimension `d`.
fn local_param_len(d: usize) -> usize {
    2 * (d - 1)
}

fn param_len(k: usize, (da, db): (usize, usize)) -> usize {
    k + k * (local_param_len(da) + local_param_len(db))
}

/// Decodes hypersphere coordinates into a unit vector: `d - 1` nesting
/// angles fix the magnitudes, `d - 1` phases the relative arguments, and
/// the first component stays real (global phase is irrelevant for the
/// projector).
fn decode_local(params: &[f64], d: usize) -> DVector<Complex64> {
    let (thetas, phis) = params.split_at(d - 1);
    let mut amps = DVector::from_element(d, Complex64::new(0.0, 0.0));
    let mut tail = 1.0;
    for j in 0..d {
        let r = if j < d - 1 { tail * thetas[j].cos() } else { tail };
        if j < d - 1 {
            tail *= thetas[j].sin();
        }
        amps[j] = if j == 0 {
            Complex64::new(r, 0.0)
        } else {
            Complex64::from_polar(r, phis[j - 1])
        };
    }
    let norm = amps.norm();
    if norm > 0.0 {
        amps /= Complex64::new(norm, 0.0);
    } else {
        amps[0] = Complex64::new(1.0, 0.0);
    }
    amps
}

/// Inverse of [`decode_local`] up to global phase.
fn encode_local(v: &DVector<Complex64>) -> Vec<f64> {
    let d = v.len();
    let mut params = vec![0.0; local_param_len(d)];
    if d == 1 {
        return params;
    }
    let phase0 = if v[0].norm() > 1e-14 { v[0].arg() } else { 0.0 };
    let mut tail: f64 = 1.0;
    for j in 0..d - 1 {
        let m = v[j].norm();
        let c = if tail > 1e-14 { (m / tail).clamp(-1.0, 1.0) } else { 1.0 };
        params[j] = c.acos();
        tail *= params[j].sin();
    }
    for j in 1..d {
        params[d - 1 + j - 1] = v[j].arg() - phase0;
    }
    params
}

fn decode_params(
    params: &[f64],
    k: usize,
    (da, db): (usize, usize),
) -> Result<(Vec<f64>, Vec<(DVector<Complex64>, DVector<Complex64>)>)> {
    if params.len() != param_len(k, (da, db)) || params.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("malformed parameter vector".into()));
    }
    let weights = project_simplex(&params[..k]);
    let stride = local_param_len(da) + local_param_len(db);
    let mut locals = Vec::with_capacity(k);
    for i in 0..k {
        let base = k + i * stride;
        let a = decode_local(&params[base..base + local_param_len(da)], da);
        let b = decode_local(&params[base + local_param_len(da)..base + stride], db);
        locals.push((a, b));
    }
    Ok((weights, locals))
}

/// Raw assembly without density-matrix validation; the hot path of the
/// objective.  Positive semidefinite and unit trace by construction.
fn assemble_raw(
    weights: &[f64],
    locals: &[(DVector<Complex64>, DVector<Complex64>)],
    (da, db): (usize, usize),
) -> DMatrix<Complex64> {
    let dim = da * db;
    let mut mat = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    for (&w, (a, b)) in weights.iter().zip(locals) {
        if w <= 0.0 {
            continue;
        }
        for i in 0..da {
            for j in 0..db {
                v[i * db + j] = a[i] * b[j];
            }
        }
        let w = Complex64::new(w, 0.0);
        for col in 0..dim {
            let wc = w * v[col].conj();
            for row in 0..dim {
                mat[(row, col)] += v[row] * wc;
            }
        }
    }
    mat
}

fn encode_ensemble(
    e: &ProductEnsemble,
    k: usize,
    rng: &mut rand_chacha::ChaCha20Rng,
) -> Vec<f64> {
    let (da, db) = e.dims();
    let mut raw_weights = e.weights().to_vec();
    raw_weights.resize(k, 0.0);
    let mut params = raw_weights;
    for (a, b) in e.locals() {
        params.extend(encode_local(a));
        params.extend(encode_local(b));
    }
    for _ in e.k()..k {
        let a = random_pure_with(rng, da).expect("local dimension is positive");
        let b = random_pure_with(rng, db).expect("local dimension is positive");
        params.extend(encode_local(a.amplitudes()));
        params.extend(encode_local(b.amplitudes()));
    }
    params
}

fn random_start(k: usize, (da, db): (usize, usize), rng: &mut rand_chacha::ChaCha20Rng) -> Vec<f64> {
    let mut params = vec![1.0 / k as f64; k];
    for _ in 0..k {
        let a = random_pure_with(rng, da).expect("local dimension is positive");
        let b = random_pure_with(rng, db).expect("local dimension is positive");
        params.extend(encode_local(a.amplitudes()));
        params.extend(encode_local(b.amplitudes()));
    }
    params
}

/// Standard Nelder-Mead with reflection 1, expansion 2, contraction 1/2 and
/// shrink 1/2, stopping when the simplex value spread drops below `tol`.
/// Returns the best vertex, its value, and the iterations used.
///
/// The parameter vector can run to thousands of entries (mixture length
/// times local angles), so the loop avoids anything superlinear per
/// iteration: best/worst are found by scanning values, and the centroid
/// comes from a running coordinate total that is updated on every vertex
/// replacement and refreshed periodically to cap accumulation drift.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    objective: &F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), objective(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = objective(&x);
        simplex.push((x, v));
    }

    let refresh_total = |simplex: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut total = vec![0.0; n];
        for (x, _) in simplex {
            for (t, &xi) in total.iter_mut().zip(x) {
                *t += xi;
            }
        }
        total
    };
    let mut total = refresh_total(&simplex);

    let mut iterations = 0;
    while iterations < max_iters {
        // Single scan for the three ranks the update rules need.
        let mut best = 0;
        let mut worst = 0;
        for i in 1..=n {
            if simplex[i].1 < simplex[best].1 {
                best = i;
            }
            if simplex[i].1 > simplex[worst].1 {
                worst = i;
            }
        }
        let mut second = if worst == 0 { 1 } else { 0 };
        for i in 0..=n {
            if i != worst && simplex[i].1 > simplex[second].1 {
                second = i;
            }
        }
        if simplex[worst].1 - simplex[best].1 < tol {
            break;
        }
        iterations += 1;
        if iterations % 256 == 0 {
            total = refresh_total(&simplex);
        }

        let worst_x = &simplex[worst].0;
        let centroid: Vec<f64> = total
            .iter()
            .zip(worst_x)
            .map(|(&t, &w)| (t - w) / n as f64)
            .collect();

        let replace = |simplex: &mut Vec<(Vec<f64>, f64)>,
                           total: &mut Vec<f64>,
                           x: Vec<f64>,
                           v: f64| {
            for ((t, &new), &old) in total.iter_mut().zip(&x).zip(&simplex[worst].0) {
                *t += new - old;
            }
            simplex[worst] = (x, v);
        };

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(worst_x)
            .map(|(&c, &w)| c + (c - w))
            .collect();
        let f_reflect = objective(&reflect);

        if f_reflect < simplex[best].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(worst_x)
                .map(|(&c, &w)| c + 2.0 * (c - w))
                .collect();
            let f_expand = objective(&expand);
            if f_expand < f_reflect {
                replace(&mut simplex, &mut total, expand, f_expand);
            } else {
                replace(&mut simplex, &mut total, reflect, f_reflect);
            }
            continue;
        }
        if f_reflect < simplex[second].1 {
            replace(&mut simplex, &mut total, reflect, f_reflect);
            continue;
        }

        let f_worst = simplex[worst].1;
        let contract: Vec<f64> = if f_reflect < f_worst {
            centroid.iter().zip(worst_x).map(|(&c, &w)| c + 0.5 * (c - w)).collect()
        } else {
            centroid.iter().zip(worst_x).map(|(&c, &w)| c - 0.5 * (c - w)).collect()
        };
        let f_contract = objective(&contract);
        if f_contract < f_reflect.min(f_worst) {
            replace(&mut simplex, &mut total, contract, f_contract);
            continue;
        }

        let best_x = simplex[best].0.clone();
        for (i, entry) in simplex.iter_mut().enumerate() {
            if i == best {
                continue;
            }
            for (xi, &bi) in entry.0.iter_mut().zip(&best_x) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            entry.1 = objective(&entry.0);
        }
        total = refresh_total(&simplex);
    }

    let mut best = 0;
    for i in 1..=n {
        if simplex[i].1 < simplex[best].1 {
            best = i;
        }
    }
    let (x, v) = simplex.swap_remove(best);
    (x, v, iterations)
}
