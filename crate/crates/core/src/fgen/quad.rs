//! Adaptive Gauss-Kronrod quadrature for the measure integrals behind the
//! generator functions.
//!
//! Every integral in this crate has the shape `int_0^inf t^s g(t) dt` with a
//! singular exponent `s` in `[0, 1)` and a factor `g` that is bounded near
//! zero and decays at least as fast as `t^{-2}`.  The axis is split at `t = 1`
//! and each half is mapped onto `(0, 1)` by a power substitution that absorbs
//! the endpoint singularity exactly:
//!
//! * lower half: `t = v^{1/(1+s)}` turns `t^s dt` into `dv/(1+s)`;
//! * upper half: `t = w^{-1/(1-s)}` turns `t^s dt` into `t^2 dw/(1-s)`, and
//!   `t^2 g(t)` tends to a finite limit because of the `t^{-2}` decay.
//!
//! A plain `t = u/(1-u)` map would leave a `(1-u)^{-s}` singularity at `u = 1`
//! that bisection cannot resolve past the f64 grid, so the tail substitution
//! is not optional for `s > 0`.  Each mapped half runs through 15-point
//! Kronrod panels refined worst-first until the combined error estimate meets
//! the requested tolerances.

use crate::error::{Error, Result};

/// Accuracy budget for one semi-infinite integral.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Absolute error target for the summed panel estimates.
    pub abs_tol: f64,
    /// Relative error target; the effective target is
    /// `max(abs_tol, rel_tol * |estimate|)`.
    pub rel_tol: f64,
    /// Panel budget per half-axis before the integrator reports failure.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be positive, got abs_tol {:e}, rel_tol {:e}",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

// 15-point Kronrod abscissae on [-1, 1]; odd indices are the embedded 7-point
// Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Kronrod evaluation on `[a, b]`: returns the estimate and an error
/// bound sharpened by the usual `(200 e / resasc)^{3/2}` rescaling.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let dhlgth = hlgth.abs();

    let fc = f(centr);
    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();

    for j in 0..3 {
        let idx = 2 * j + 1;
        let absc = hlgth * XGK[idx];
        let f1 = f(centr - absc);
        let f2 = f(centr + absc);
        fv1[idx] = f1;
        fv2[idx] = f2;
        let fsum = f1 + f2;
        resg += WG[j] * fsum;
        resk += WGK[idx] * fsum;
        resabs += WGK[idx] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let idx = 2 * j;
        let absc = hlgth * XGK[idx];
        let f1 = f(centr - absc);
        let f2 = f(centr + absc);
        fv1[idx] = f1;
        fv2[idx] = f2;
        let fsum = f1 + f2;
        resk += WGK[idx] * fsum;
        resabs += WGK[idx] * (f1.abs() + f2.abs());
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let result = resk * hlgth;
    let resabs = resabs * dhlgth;
    let resasc = resasc * dhlgth;
    let mut abserr = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && abserr != 0.0 {
        abserr = resasc * (200.0 * abserr / resasc).powf(1.5).min(1.0);
    }
    let uflow = f64::MIN_POSITIVE;
    let epmach = f64::EPSILON;
    if resabs > uflow / (50.0 * epmach) {
        abserr = abserr.max(50.0 * epmach * resabs);
    }
    (result, abserr)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn make_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let (value, error) = gk15(f, a, b);
    Panel { a, b, value, error }
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`:
/// repeatedly bisects the panel with the largest error estimate.
pub(crate) fn integrate_finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    let mut panels = vec![make_panel(f, a, b)];
    loop {
        let mut total = 0.0;
        let mut err = 0.0;
        for p in &panels {
            total += p.value;
            err += p.error;
        }
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Numeric(format!(
                "quadrature produced a non-finite estimate on [{a:e}, {b:e}]"
            )));
        }
        if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(Error::Numeric(format!(
                "quadrature did not converge within {} panels; achieved error {:e}, target {:e}",
                spec.max_subdivisions,
                err,
                spec.abs_tol.max(spec.rel_tol * total.abs())
            )));
        }
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        let Panel { a: pa, b: pb, .. } = panels[worst];
        let mid = 0.5 * (pa + pb);
        // Bisection stalls once the midpoint is no longer strictly interior.
        if !(pa < mid && mid < pb) {
            return Err(Error::Numeric(format!(
                "quadrature panel [{pa:e}, {pb:e}] is too narrow to split; achieved error {err:e}"
            )));
        }
        panels[worst] = make_panel(f, pa, mid);
        panels.push(make_panel(f, mid, pb));
    }
}

/// Computes `int_0^inf t^s g(t) dt` for `s` in `[0, 1)` via the two power
/// substitutions described in the module docs.  `g` must be bounded near zero
/// and decay at least as fast as `t^{-2}`; the representable-range tail that
/// the substitution cannot reach is below every supported tolerance and is
/// treated as zero.
pub(crate) fn integrate_semi_infinite<G: Fn(f64) -> f64>(
    s: f64,
    g: G,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Domain(format!(
            "singular exponent must lie in [0, 1), got {s}"
        )));
    }
    let half = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol,
        rel_tol: 0.5 * spec.rel_tol,
        max_subdivisions: spec.max_subdivisions,
    };

    let inv_lower = 1.0 / (1.0 + s);
    let lower = integrate_finite(
        &|v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            g(v.powf(inv_lower))
        },
        0.0,
        1.0,
        &half,
    )? * inv_lower;

    let inv_upper = 1.0 / (1.0 - s);
    let upper = integrate_finite(
        &|w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let t = w.powf(-inv_upper);
            if !t.is_finite() {
                return 0.0;
            }
            (g(t) * t) * t
        },
        0.0,
        1.0,
        &half,
    )? * inv_upper;

    Ok(lower + upper)
}
