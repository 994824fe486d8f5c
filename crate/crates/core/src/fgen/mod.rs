//! Operator monotone decreasing generator functions with `f(1) = 0`.
//!
//! Every such function has a canonical integral representation
//!
//! ```text
//! f(x) = a_f (1 - x) + int_0^inf ( 1/(t+x) - 1/(t+1) ) d mu_f(t)
//! ```
//!
//! with `a_f >= 0` and a positive measure `mu_f` on `(0, inf)`.  A
//! [`GeneratorFunction`] carries the closed form, the constants `a_f` and
//! `b_f`, and the measure density written as `m(t) = t^s * smooth(t)` with the
//! singular exponent `s` annotated separately so the quadrature can absorb it
//! exactly.  On top of the representation the module computes the two
//! integrals driving the closest-separable-state theorems,
//!
//! ```text
//! H_f(p)    = int_0^inf p (t+p)^{-2}            d mu_f(t)
//! G_f(p, q) = int_0^inf sqrt(pq) (t+p)^{-1} (t+q)^{-1} d mu_f(t)
//! ```
//!
//! together with a monotonicity classification of `H_f` and a representation
//! self-check.  Builtins additionally carry analytic `H_f`/`G_f` closed forms;
//! every `hf`/`gf` call evaluates both routes and fails loudly if they drift
//! apart, so the fast path never silently replaces the reference integral.

pub(crate) mod quad;

pub use quad::QuadratureSpec;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tol;
use quad::integrate_semi_infinite;

/// Shared real-valued function handle used by custom generator functions.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative gap below which `G_f` switches to its midpoint expansion; the
/// direct difference quotient loses ~6 digits to cancellation there while the
/// midpoint form is accurate to O(gap^2) ~ 1e-13.
const GF_MIDPOINT_SWITCH: f64 = 1e-6;

/// The builtin generator functions, named after the divergences they induce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `f(x) = -ln x`, the Umegaki relative entropy generator.
    NegLog,
    /// `f(x) = 1 - x^p` for `p` in `(0, 1)`.
    NegPower(f64),
    /// `f(x) = (1 - x^p) / (p (1 - p))` for `p` in `(0, 1)`, the
    /// alpha-divergence generator.
    ScaledPower(f64),
    /// `f(x) = (1 - x^{1-q}) / (1 - q)` for `q` in `(0, 1)`, the Tsallis
    /// relative q-entropy generator.
    Tsallis(f64),
    /// `f(x) = 1 - x^{1-alpha}` for `alpha` in `(0, 1)`.
    PowerEntropy(f64),
}

/// Data needed to build a non-builtin generator function.
///
/// The caller supplies the closed form together with its representation data;
/// construction re-derives `f` from the measure on a sample grid and rejects
/// inconsistent input.  `smooth_density` is the measure density with the
/// `t^{singular_exponent}` factor removed.
pub struct CustomFunction {
    pub name: String,
    pub closed_form: RealFn,
    /// Limit of `f(x)` as `x -> 0+`; may be `f64::INFINITY`.
    pub value_at_zero: f64,
    pub a_f: f64,
    pub b_f: f64,
    /// Exponent `s` in `[0, 1)` of the `t^s` factor of the measure density.
    pub singular_exponent: f64,
    pub smooth_density: RealFn,
    /// Optional analytic `H_f`; when present it is cross-checked against
    /// quadrature on every call, exactly as for builtins.
    pub hf_closed: Option<RealFn>,
}

#[derive(Clone)]
enum Kind {
    NegLog,
    /// `f(x) = scale * (1 - x^exponent)`; covers every power-family builtin.
    Power { exponent: f64, scale: f64 },
    Custom {
        f: RealFn,
        value_at_zero: f64,
        singular_exponent: f64,
        smooth: RealFn,
        hf_closed: Option<RealFn>,
    },
}

/// An operator monotone decreasing function `f` with `f(1) = 0` and its
/// Löwner representation data.  Immutable and cheap to clone.
#[derive(Clone)]
pub struct GeneratorFunction {
    name: String,
    kind: Kind,
    a_f: f64,
    b_f: f64,
}

impl fmt::Debug for GeneratorFunction {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("GeneratorFunction")
            .field("name", &self.name)
            .field("a_f", &self.a_f)
            .field("b_f", &self.b_f)
            .finish()
    }
}

impl fmt::Display for GeneratorFunction {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.write_str(&self.name)
    }
}

/// Classification of the profile `p -> H_f(p)` on the grid
/// `{0.02, 0.04, ..., 0.98}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfClass {
    Constant,
    Increasing,
    Decreasing,
    Other,
}

impl fmt::Display for HfClass {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HfClass::Constant => "constant",
            HfClass::Increasing => "increasing",
            HfClass::Decreasing => "decreasing",
            HfClass::Other => "other",
        };
        fm.write_str(s)
    }
}

/// One reconstruction sample of the representation self-check.
#[derive(Debug, Clone)]
pub struct RepresentationSample {
    pub x: f64,
    pub reconstructed: f64,
    pub closed_form: f64,
    pub error: f64,
}

/// Result of comparing the integral representation against the closed form.
#[derive(Debug, Clone)]
pub struct RepresentationReport {
    pub samples: Vec<RepresentationSample>,
    pub max_abs_error: f64,
    pub passes: bool,
}

/// Builds one of the builtin generator functions, validating the parameter
/// range and the representation invariants.
pub fn make_builtin(builtin: Builtin) -> Result<GeneratorFunction> {
    let gf = match builtin {
        Builtin::NegLog => GeneratorFunction {
            name: "log".into(),
            kind: Kind::NegLog,
            a_f: 0.0,
            b_f: 0.0,
        },
        Builtin::NegPower(p) => power_family("power", p, p, 1.0)?,
        Builtin::ScaledPower(p) => power_family("scaled_power", p, p, 1.0 / (p * (1.0 - p)))?,
        Builtin::Tsallis(q) => power_family("tsallis", q, 1.0 - q, 1.0 / (1.0 - q))?,
        Builtin::PowerEntropy(alpha) => power_family("power_entropy", alpha, 1.0 - alpha, 1.0)?,
    };
    validate_construction(&gf)?;
    Ok(gf)
}

fn power_family(name: &str, param: f64, exponent: f64, scale: f64) -> Result<GeneratorFunction> {
    if !(param > 0.0 && param < 1.0) {
        return Err(Error::Domain(format!(
            "{name} parameter must lie in (0, 1), got {param}"
        )));
    }
    Ok(GeneratorFunction {
        name: format!("{name}:{param}"),
        kind: Kind::Power { exponent, scale },
        a_f: 0.0,
        // f = scale - scale * x^exponent, so the canonical -Re f(i) constant
        // of the unshifted power shifts by -scale.
        b_f: scale * ((exponent * PI / 2.0).cos() - 1.0),
    })
}

/// Builds a caller-supplied generator function and validates it against its
/// own representation data.  Functions with `a_f > 0` are constructible but
/// later rejected by [`GeneratorFunction::hf`] and [`GeneratorFunction::gf`].
pub fn make_custom(custom: CustomFunction) -> Result<GeneratorFunction> {
    let CustomFunction {
        name,
        closed_form,
        value_at_zero,
        a_f,
        b_f,
        singular_exponent,
        smooth_density,
        hf_closed,
    } = custom;
    if !(a_f >= 0.0) {
        return Err(Error::Domain(format!(
            "a_f must be nonnegative, got {a_f}"
        )));
    }
    if !(0.0..1.0).contains(&singular_exponent) {
        return Err(Error::Domain(format!(
            "singular exponent must lie in [0, 1), got {singular_exponent}"
        )));
    }
    let gf = GeneratorFunction {
        name,
        kind: Kind::Custom {
            f: closed_form,
            value_at_zero,
            singular_exponent,
            smooth: smooth_density,
            hf_closed,
        },
        a_f,
        b_f,
    };
    validate_construction(&gf)?;
    Ok(gf)
}

/// Builds a generator function from its string spec: `log`, `power:p`,
/// `scaled_power:p`, `tsallis:q`, or `power_entropy:alpha`.
pub fn from_spec(spec: &str) -> Result<GeneratorFunction> {
    let (head, param) = match spec.split_once(':') {
        Some((head, rest)) => (head, Some(rest)),
        None => (spec, None),
    };
    let parse = |value: &str| -> Result<f64> {
        value.trim().parse::<f64>().map_err(|_| {
            Error::Parse(format!("invalid parameter '{value}' in generator spec '{spec}'"))
        })
    };
    match (head, param) {
        ("log", None) => make_builtin(Builtin::NegLog),
        ("log", Some(_)) => Err(Error::Parse(format!(
            "generator 'log' takes no parameter, got '{spec}'"
        ))),
        ("power", Some(v)) => make_builtin(Builtin::NegPower(parse(v)?)),
        ("scaled_power", Some(v)) => make_builtin(Builtin::ScaledPower(parse(v)?)),
        ("tsallis", Some(v)) => make_builtin(Builtin::Tsallis(parse(v)?)),
        ("power_entropy", Some(v)) => make_builtin(Builtin::PowerEntropy(parse(v)?)),
        ("power" | "scaled_power" | "tsallis" | "power_entropy", None) => Err(Error::Parse(
            format!("generator '{head}' requires a parameter, e.g. '{head}:0.5'"),
        )),
        _ => Err(Error::Parse(format!(
            "unknown generator spec '{spec}'; expected log, power:p, scaled_power:p, \
             tsallis:q, or power_entropy:alpha"
        ))),
    }
}

/// The integrand kernel `g_t(p, q) = sqrt(pq) / ((t+p)(t+q))` of `G_f`.
pub fn integrand_g(t: f64, p: f64, q: f64) -> f64 {
    (p * q).sqrt() / ((t + p) * (t + q))
}

impl GeneratorFunction {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn a_f(&self) -> f64 {
        self.a_f
    }

    pub fn b_f(&self) -> f64 {
        self.b_f
    }

    /// Evaluates the closed form `f(x)` for `x > 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "generator functions are defined on (0, inf), got x = {x}"
            )));
        }
        Ok(match &self.kind {
            Kind::NegLog => -x.ln(),
            Kind::Power { exponent, scale } => scale * (1.0 - x.powf(*exponent)),
            Kind::Custom { f, .. } => f(x),
        })
    }

    /// The limit of `f(x)` as `x -> 0+`; `f64::INFINITY` for `-ln`.
    pub fn value_at_zero(&self) -> f64 {
        match &self.kind {
            Kind::NegLog => f64::INFINITY,
            Kind::Power { scale, .. } => *scale,
            Kind::Custom { value_at_zero, .. } => *value_at_zero,
        }
    }

    /// The measure density `m(t) = t^s * smooth(t)`; zero for `t <= 0`.
    pub fn measure_density(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        t.powf(self.singular_exponent()) * self.smooth_density(t)
    }

    fn singular_exponent(&self) -> f64 {
        match &self.kind {
            Kind::NegLog => 0.0,
            Kind::Power { exponent, .. } => *exponent,
            Kind::Custom {
                singular_exponent, ..
            } => *singular_exponent,
        }
    }

    fn smooth_density(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::NegLog => 1.0,
            Kind::Power { exponent, scale } => scale * (exponent * PI).sin() / PI,
            Kind::Custom { smooth, .. } => smooth(t),
        }
    }

    fn require_af_zero(&self, op: &str) -> Result<()> {
        if self.a_f != 0.0 {
            return Err(Error::Domain(format!(
                "{op} requires a_f = 0, but '{}' has a_f = {}",
                self.name, self.a_f
            )));
        }
        Ok(())
    }

    /// `H_f(p)` for `p` in `(0, 1]`.  When an analytic closed form exists it
    /// is returned, but only after quadrature confirms it; otherwise the
    /// quadrature value is returned directly.
    pub fn hf(&self, p: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.require_af_zero("hf")?;
        check_unit_arg(p, "hf")?;
        let quad = self.hf_quadrature_unchecked(p, spec)?;
        match self.hf_closed_value(p) {
            Some(closed) => {
                if (closed - quad).abs() > tol::REPRESENTATION_TOL {
                    return Err(Error::Numeric(format!(
                        "H_f routes disagree for '{}' at p = {p}: closed {closed:.12e}, \
                         quadrature {quad:.12e}",
                        self.name
                    )));
                }
                Ok(closed)
            }
            None => Ok(quad),
        }
    }

    /// `H_f(p)` by adaptive quadrature alone.
    pub fn hf_quadrature(&self, p: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.require_af_zero("hf_quadrature")?;
        check_unit_arg(p, "hf_quadrature")?;
        self.hf_quadrature_unchecked(p, spec)
    }

    fn hf_quadrature_unchecked(&self, p: f64, spec: &QuadratureSpec) -> Result<f64> {
        let integral = integrate_semi_infinite(
            self.singular_exponent(),
            |t| self.smooth_density(t) / ((t + p) * (t + p)),
            spec,
        )?;
        Ok(p * integral)
    }

    fn hf_closed_value(&self, p: f64) -> Option<f64> {
        match &self.kind {
            Kind::NegLog => Some(1.0),
            Kind::Power { exponent, scale } => Some(scale * exponent * p.powf(*exponent)),
            Kind::Custom { hf_closed, .. } => hf_closed.as_ref().map(|h| h(p)),
        }
    }

    /// `G_f(p, q)` for `p, q` in `(0, 1]`.  Symmetric by construction: the
    /// arguments are sorted before any evaluation.  Closed forms are
    /// cross-checked against quadrature exactly as in [`Self::hf`].
    pub fn gf(&self, p: f64, q: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.require_af_zero("gf")?;
        check_unit_arg(p, "gf")?;
        check_unit_arg(q, "gf")?;
        let (u, v) = if p <= q { (p, q) } else { (q, p) };
        let quad = self.gf_quadrature_sorted(u, v, spec)?;
        match self.gf_closed_value(u, v) {
            Some(closed) => {
                if (closed - quad).abs() > tol::REPRESENTATION_TOL {
                    return Err(Error::Numeric(format!(
                        "G_f routes disagree for '{}' at ({u}, {v}): closed {closed:.12e}, \
                         quadrature {quad:.12e}",
                        self.name
                    )));
                }
                Ok(closed)
            }
            None => Ok(quad),
        }
    }

    /// `G_f(p, q)` by adaptive quadrature alone.
    pub fn gf_quadrature(&self, p: f64, q: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.require_af_zero("gf_quadrature")?;
        check_unit_arg(p, "gf_quadrature")?;
        check_unit_arg(q, "gf_quadrature")?;
        let (u, v) = if p <= q { (p, q) } else { (q, p) };
        self.gf_quadrature_sorted(u, v, spec)
    }

    fn gf_quadrature_sorted(&self, u: f64, v: f64, spec: &QuadratureSpec) -> Result<f64> {
        let integral = integrate_semi_infinite(
            self.singular_exponent(),
            |t| self.smooth_density(t) / ((t + u) * (t + v)),
            spec,
        )?;
        Ok((u * v).sqrt() * integral)
    }

    fn gf_closed_value(&self, u: f64, v: f64) -> Option<f64> {
        let mid = 0.5 * (u + v);
        let near_diagonal = v - u <= GF_MIDPOINT_SWITCH * mid;
        match &self.kind {
            Kind::NegLog => Some(if near_diagonal {
                (u * v).sqrt() / mid
            } else {
                (u * v).sqrt() * (v / u).ln() / (v - u)
            }),
            Kind::Power { exponent, scale } => Some(if near_diagonal {
                scale * exponent * (u * v).sqrt() * mid.powf(exponent - 1.0)
            } else {
                scale * (u * v).sqrt() * (v.powf(*exponent) - u.powf(*exponent)) / (v - u)
            }),
            Kind::Custom { .. } => None,
        }
    }

    /// Classifies the monotonicity of `H_f` on `{0.02, 0.04, ..., 0.98}`.
    pub fn classify_hf(&self, spec: &QuadratureSpec) -> Result<HfClass> {
        self.require_af_zero("classify_hf")?;
        let values: Vec<f64> = (1..=49)
            .map(|i| self.hf(0.02 * i as f64, spec))
            .collect::<Result<_>>()?;
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let total_variation: f64 = diffs.iter().map(|d| d.abs()).sum();
        if total_variation <= tol::CLASSIFY_FLAT_TOL {
            return Ok(HfClass::Constant);
        }
        if diffs.iter().all(|d| *d > tol::CLASSIFY_MONOTONE_MARGIN) {
            return Ok(HfClass::Increasing);
        }
        if diffs.iter().all(|d| *d < -tol::CLASSIFY_MONOTONE_MARGIN) {
            return Ok(HfClass::Decreasing);
        }
        Ok(HfClass::Other)
    }

    /// Reconstructs `f` from `a_f` and the measure at
    /// `x in {0.1, 0.5, 1, 2, 10}` and compares against the closed form.
    pub fn verify_representation(&self, spec: &QuadratureSpec) -> Result<RepresentationReport> {
        let mut samples = Vec::new();
        let mut max_abs_error: f64 = 0.0;
        for x in [0.1, 0.5, 1.0, 2.0, 10.0] {
            // 1/(t+x) - 1/(t+1) written as a product: the literal difference
            // underflows against the t^2 tail factor of the substitution and
            // floods the estimate with roundoff.
            let integral = integrate_semi_infinite(
                self.singular_exponent(),
                |t| self.smooth_density(t) * (1.0 - x) / ((t + x) * (t + 1.0)),
                spec,
            )?;
            let reconstructed = self.a_f * (1.0 - x) + integral;
            let closed_form = self.eval(x)?;
            let error = (reconstructed - closed_form).abs();
            max_abs_error = max_abs_error.max(error);
            samples.push(RepresentationSample {
                x,
                reconstructed,
                closed_form,
                error,
            });
        }
        Ok(RepresentationReport {
            samples,
            max_abs_error,
            passes: max_abs_error <= tol::REPRESENTATION_TOL,
        })
    }
}

fn check_unit_arg(p: f64, op: &str) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!(
            "{op} argument must lie in (0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Construction-time invariants: `f(1) = 0`, convex and decreasing on a
/// sampled grid, nonnegative measure density, and representation consistency.
fn validate_construction(gf: &GeneratorFunction) -> Result<()> {
    let at_one = gf.eval(1.0)?;
    if at_one.abs() > tol::F_AT_ONE_TOL {
        return Err(Error::Domain(format!(
            "'{}' violates f(1) = 0: got {at_one:e}",
            gf.name
        )));
    }

    // 40 log-spaced samples across [0.01, 10].
    let xs: Vec<f64> = (0..40)
        .map(|i| 0.01 * 1000.0_f64.powf(i as f64 / 39.0))
        .collect();
    let fs = xs
        .iter()
        .map(|&x| gf.eval(x))
        .collect::<Result<Vec<f64>>>()?;
    let mut prev_slope = f64::NEG_INFINITY;
    for i in 0..xs.len() - 1 {
        let df = fs[i + 1] - fs[i];
        if df > 1e-10 {
            return Err(Error::Domain(format!(
                "'{}' is not decreasing near x = {}: f rises by {df:e}",
                gf.name,
                xs[i]
            )));
        }
        let slope = df / (xs[i + 1] - xs[i]);
        // Convexity as nondecreasing divided differences, with slack for
        // closed forms that are themselves quadratures.
        if slope < prev_slope - 1e-8 {
            return Err(Error::Domain(format!(
                "'{}' is not convex near x = {}: slope falls from {prev_slope:e} to {slope:e}",
                gf.name,
                xs[i]
            )));
        }
        prev_slope = slope;
    }

    for i in 0..20 {
        let t = 0.01 * 10000.0_f64.powf(i as f64 / 19.0);
        let m = gf.measure_density(t);
        if !(m >= -1e-12) {
            return Err(Error::Domain(format!(
                "'{}' has negative measure density {m:e} at t = {t}",
                gf.name
            )));
        }
    }

    let report = gf.verify_representation(&QuadratureSpec::default())?;
    if !report.passes {
        return Err(Error::Domain(format!(
            "'{}' fails its integral representation: max error {:e} exceeds {:e}",
            gf.name,
            report.max_abs_error,
            tol::REPRESENTATION_TOL
        )));
    }
    Ok(())
}
