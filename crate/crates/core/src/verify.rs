//! Runtime verification suites.
//!
//! Each suite replays the library's mathematical contracts as executable
//! checks and reports the worst observed margin per invariant: the
//! integral representation of every builtin generator, the defining
//! inequalities of the divergence, and the consistency web between the
//! closed-form minimizers, the fixed-point solver, and the brute-force
//! oracle.  Suites are deterministic in the given seed.

use std::str::FromStr;

use crate::closest::{
    closest_maxent, closest_pure_flat_h, closest_pure_state, closest_two_qubit, solve_q,
};
use crate::fgen::{from_spec, GeneratorFunction, HfClass, QuadratureSpec};
use crate::qre::{
    alpha_divergence, qre_modular, qre_spectral, renyi_relative, tsallis_relative, umegaki,
};
use crate::qstate::{
    random_density_with, random_pure_with, random_unitary_with, seeded_rng, DensityMatrix,
    PureState, Subsystem,
};
use crate::sepopt::{minimize, OptimizerConfig, ProductEnsemble};
use crate::{tol, Error, Result};

/// Which verification suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Functions,
    Divergence,
    Theorems,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "functions" => Ok(Suite::Functions),
            "divergence" => Ok(Suite::Divergence),
            "theorems" => Ok(Suite::Theorems),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!(
                "unknown suite '{other}'; expected functions, divergence, theorems or all"
            ))),
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        out.write_str(match self {
            Suite::Functions => "functions",
            Suite::Divergence => "divergence",
            Suite::Theorems => "theorems",
            Suite::All => "all",
        })
    }
}

/// One verified invariant with its observed worst-case margin.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    /// The bound the worst case is compared against.
    pub bound: f64,
    pub detail: String,
}

impl CheckOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "passed": self.passed,
            "worst": if self.worst.is_finite() { serde_json::json!(self.worst) } else { serde_json::json!(self.worst.to_string()) },
            "bound": self.bound,
            "detail": self.detail,
        })
    }
}

/// Full result of a suite run.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// The builtin registry at representative parameters: the log generator
/// plus each parametrized family at 0.3, 0.5 and 0.7.
pub fn representative_builtins() -> Vec<GeneratorFunction> {
    let mut out = vec![from_spec("log").expect("builtin")];
    for family in ["power", "scaled_power", "tsallis", "power_entropy"] {
        for param in ["0.3", "0.5", "0.7"] {
            out.push(from_spec(&format!("{family}:{param}")).expect("builtin"));
        }
    }
    out
}

/// Runs the chosen suite.  Internal errors never abort the run; they are
/// reported as failed checks so a verification call always yields a full
/// report.
pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let mut checks = Vec::new();
    match suite {
        Suite::Functions => functions_checks(&mut checks),
        Suite::Divergence => divergence_checks(seed, &mut checks),
        Suite::Theorems => theorems_checks(seed, &mut checks),
        Suite::All => {
            functions_checks(&mut checks);
            divergence_checks(seed, &mut checks);
            theorems_checks(seed, &mut checks);
        }
    }
    SuiteReport { suite: suite.to_string(), seed, checks }
}

fn guarded<F>(checks: &mut Vec<CheckOutcome>, name: &str, body: F)
where
    F: FnOnce() -> Result<CheckOutcome>,
{
    match body() {
        Ok(outcome) => checks.push(outcome),
        Err(err) => checks.push(CheckOutcome {
            name: name.into(),
            passed: false,
            worst: f64::NAN,
            bound: f64::NAN,
            detail: format!("error: {err}"),
        }),
    }
}

/// `worst <= bound` checks, the common case.
fn upper_bounded(name: &str, worst: f64, bound: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed: worst.is_finite() && worst <= bound,
        worst,
        bound,
        detail,
    }
}

/// `worst >= bound` checks (certificate minima, nonnegativity).
fn lower_bounded(name: &str, worst: f64, bound: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed: worst.is_finite() && worst >= bound,
        worst,
        bound,
        detail,
    }
}

fn functions_checks(checks: &mut Vec<CheckOutcome>) {
    let spec = QuadratureSpec::default();
    let builtins = representative_builtins();

    guarded(checks, "representation reconstructs f", || {
        let mut worst = 0.0_f64;
        let mut at = String::new();
        for f in &builtins {
            let report = f.verify_representation(&spec)?;
            if report.max_abs_error > worst {
                worst = report.max_abs_error;
                at = f.name().to_string();
            }
        }
        Ok(upper_bounded(
            "representation reconstructs f",
            worst,
            tol::REPRESENTATION_TOL,
            format!("worst builtin: {at}"),
        ))
    });

    guarded(checks, "closed-form H_f matches quadrature", || {
        let mut worst = 0.0_f64;
        let mut at = String::new();
        for f in &builtins {
            for i in 1..=49 {
                let p = 0.02 * i as f64;
                let diff = (f.hf(p, &spec)? - f.hf_quadrature(p, &spec)?).abs();
                if diff > worst {
                    worst = diff;
                    at = format!("{} at p = {p:.2}", f.name());
                }
            }
        }
        Ok(upper_bounded(
            "closed-form H_f matches quadrature",
            worst,
            tol::REPRESENTATION_TOL,
            at,
        ))
    });

    guarded(checks, "H_f is identically 1 for -log", || {
        let f = from_spec("log")?;
        let mut worst = 0.0_f64;
        for i in 1..=49 {
            let p = 0.02 * i as f64;
            worst = worst.max((f.hf_quadrature(p, &spec)? - 1.0).abs());
        }
        Ok(upper_bounded(
            "H_f is identically 1 for -log",
            worst,
            tol::REPRESENTATION_TOL,
            "quadrature route, p in {0.02, ..., 0.98}".into(),
        ))
    });

    guarded(checks, "Cauchy-Schwarz G_f^2 <= H_f(p) H_f(q)", || {
        let mut worst = f64::NEG_INFINITY;
        let mut at = String::new();
        for f in &builtins {
            let h: Vec<f64> = (1..=20)
                .map(|i| f.hf(i as f64 / 21.0, &spec))
                .collect::<Result<_>>()?;
            for i in 1..=20usize {
                for j in i..=20usize {
                    let (p, q) = (i as f64 / 21.0, j as f64 / 21.0);
                    let g = f.gf(p, q, &spec)?;
                    let margin = g * g - h[i - 1] * h[j - 1];
                    if margin > worst {
                        worst = margin;
                        at = format!("{} at ({p:.3}, {q:.3})", f.name());
                    }
                }
            }
        }
        Ok(upper_bounded(
            "Cauchy-Schwarz G_f^2 <= H_f(p) H_f(q)",
            worst,
            tol::GRID_SLACK,
            at,
        ))
    });

    guarded(checks, "geometric-mean bound G_f(p,q) <= H_f(sqrt(pq))", || {
        let mut worst = f64::NEG_INFINITY;
        let mut at = String::new();
        for f in &builtins {
            for i in 1..=20usize {
                for j in i..=20usize {
                    let (p, q) = (i as f64 / 21.0, j as f64 / 21.0);
                    let margin = f.gf(p, q, &spec)? - f.hf((p * q).sqrt(), &spec)?;
                    if margin > worst {
                        worst = margin;
                        at = format!("{} at ({p:.3}, {q:.3})", f.name());
                    }
                }
            }
        }
        Ok(upper_bounded(
            "geometric-mean bound G_f(p,q) <= H_f(sqrt(pq))",
            worst,
            tol::GRID_SLACK,
            at,
        ))
    });

    guarded(checks, "classify_hf matches known classes", || {
        let mut mismatches = Vec::new();
        for f in &builtins {
            let expected = if f.name() == "log" { HfClass::Constant } else { HfClass::Increasing };
            let got = f.classify_hf(&spec)?;
            if got != expected {
                mismatches.push(format!("{}: {got}", f.name()));
            }
        }
        Ok(upper_bounded(
            "classify_hf matches known classes",
            mismatches.len() as f64,
            0.0,
            if mismatches.is_empty() { "log constant, power family increasing".into() } else { mismatches.join("; ") },
        ))
    });
}

fn divergence_checks(seed: u64, checks: &mut Vec<CheckOutcome>) {
    let generators = [
        "log",
        "power:0.5",
        "scaled_power:0.3",
        "tsallis:0.3",
        "power_entropy:0.7",
    ];

    guarded(checks, "divergence trial block", || {
        let fs: Vec<GeneratorFunction> =
            generators.iter().map(|s| from_spec(s)).collect::<Result<_>>()?;
        let mut rng = seeded_rng(seed);
        let mut min_value = f64::INFINITY;
        let mut worst_self = 0.0_f64;
        let mut worst_unitary = 0.0_f64;
        let mut worst_dpi = f64::NEG_INFINITY;
        let mut worst_routes = 0.0_f64;
        let env = PureState::basis_vector(2, 0, None)?.density();

        for trial in 0..100 {
            let dim = 2 + trial % 3;
            let f = &fs[trial % fs.len()];
            let rho = random_density_with(&mut rng, dim)?;
            let sigma = random_density_with(&mut rng, dim)?;
            let value = qre_spectral(&rho, &sigma, f)?;
            min_value = min_value.min(value);

            worst_self = worst_self.max(qre_spectral(&rho, &rho, f)?.abs());

            let u = random_unitary_with(&mut rng, dim);
            let conj = |m: &DensityMatrix| -> Result<DensityMatrix> {
                DensityMatrix::new(&u * m.matrix() * u.adjoint(), None)
            };
            let rotated = qre_spectral(&conj(&rho)?, &conj(&sigma)?, f)?;
            worst_unitary = worst_unitary.max((rotated - value).abs());

            let v = random_unitary_with(&mut rng, dim * 2);
            let channel = |m: &DensityMatrix| -> Result<DensityMatrix> {
                let lifted = m.tensor_product(&env);
                DensityMatrix::new(&v * lifted.matrix() * v.adjoint(), Some((dim, 2)))?
                    .partial_trace(Subsystem::B)
            };
            let after = qre_spectral(&channel(&rho)?, &channel(&sigma)?, f)?;
            worst_dpi = worst_dpi.max(after - value);

            worst_routes = worst_routes.max((qre_modular(&rho, &sigma, f)? - value).abs());
        }

        // Summarized as one block internally; split into named outcomes.
        Ok(CheckOutcome {
            name: "divergence trial block".into(),
            passed: true,
            worst: 0.0,
            bound: 0.0,
            detail: serde_json::json!({
                "min_value": min_value,
                "worst_self": worst_self,
                "worst_unitary": worst_unitary,
                "worst_dpi": worst_dpi,
                "worst_routes": worst_routes,
            })
            .to_string(),
        })
    });

    // Unpack the trial block into the five reported invariants.
    if let Some(block) = checks.last().cloned() {
        if block.name == "divergence trial block" {
            checks.pop();
            match serde_json::from_str::<serde_json::Value>(&block.detail) {
                Ok(v) if block.passed => {
                    let get = |key: &str| v[key].as_f64().unwrap_or(f64::NAN);
                    checks.push(lower_bounded(
                        "nonnegativity over 100 trials",
                        get("min_value"),
                        -1e-10,
                        "minimum S_f(rho || sigma) observed".into(),
                    ));
                    checks.push(upper_bounded(
                        "S_f(rho || rho) vanishes",
                        get("worst_self"),
                        1e-10,
                        "worst |S_f(rho || rho)| over 100 trials".into(),
                    ));
                    checks.push(upper_bounded(
                        "unitary invariance",
                        get("worst_unitary"),
                        1e-9,
                        "worst |S_f(U rho U* || U sigma U*) - S_f| over 100 trials".into(),
                    ));
                    checks.push(upper_bounded(
                        "data processing under dilation channels",
                        get("worst_dpi"),
                        1e-9,
                        "worst S_f(N(rho) || N(sigma)) - S_f(rho || sigma)".into(),
                    ));
                    checks.push(upper_bounded(
                        "spectral and modular routes agree",
                        get("worst_routes"),
                        tol::SPECTRAL_MODULAR_TOL,
                        "worst |spectral - modular| on full-rank pairs".into(),
                    ));
                }
                _ => checks.push(block),
            }
        }
    }

    guarded(checks, "commuting states reduce to the classical divergence", || {
        let mut rng = seeded_rng(seed.wrapping_add(1));
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let draw = |rng: &mut _| -> Result<Vec<f64>> {
                let amps = random_pure_with(rng, 4)?;
                // Strictly positive probabilities so every f(x) is finite.
                let mut p: Vec<f64> =
                    amps.amplitudes().iter().map(|z| z.norm_sqr() + 0.01).collect();
                let total: f64 = p.iter().sum();
                for x in &mut p {
                    *x /= total;
                }
                Ok(p)
            };
            let p = draw(&mut rng)?;
            let q = draw(&mut rng)?;
            let rho = DensityMatrix::from_probabilities(&p, None)?;
            let sigma = DensityMatrix::from_probabilities(&q, None)?;
            let f = from_spec("power:0.5")?;
            let quantum = qre_spectral(&rho, &sigma, &f)?;
            let classical: f64 = p
                .iter()
                .zip(&q)
                .map(|(&pj, &qj)| pj * f.eval(qj / pj).unwrap_or(f64::NAN))
                .sum();
            worst = worst.max((quantum - classical).abs());
        }
        Ok(upper_bounded(
            "commuting states reduce to the classical divergence",
            worst,
            1e-10,
            "20 diagonal trials in dimension 4".into(),
        ))
    });

    guarded(checks, "named divergences satisfy their identities", || {
        let mut rng = seeded_rng(seed.wrapping_add(2));
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let rho = random_density_with(&mut rng, 3)?;
            let sigma = random_density_with(&mut rng, 3)?;
            let log = from_spec("log")?;
            worst = worst.max((umegaki(&rho, &sigma)? - qre_spectral(&rho, &sigma, &log)?).abs());
            for alpha in [0.3, 0.6] {
                let s_alpha = alpha_divergence(&rho, &sigma, alpha)?;
                let tsallis = tsallis_relative(&rho, &sigma, alpha)?;
                worst = worst.max((tsallis - s_alpha / (1.0 - alpha)).abs());
                let renyi = renyi_relative(&rho, &sigma, alpha)?;
                let expected = (1.0 - s_alpha).ln() / (alpha - 1.0);
                worst = worst.max((renyi - expected).abs());
            }
        }
        Ok(upper_bounded(
            "named divergences satisfy their identities",
            worst,
            1e-10,
            "Umegaki, Tsallis and Renyi wrappers vs the generic route".into(),
        ))
    });
}

fn theorems_checks(seed: u64, checks: &mut Vec<CheckOutcome>) {
    let builtins = representative_builtins();

    guarded(checks, "maximally entangled minimizer reproduces f(1/d)", || {
        let mut worst = 0.0_f64;
        let mut min_cert = f64::INFINITY;
        for d in [2usize, 3, 4] {
            let rho = PureState::maximally_entangled(d)?.density();
            for f in &builtins {
                let res = closest_maxent(d, f)?;
                let direct = qre_spectral(&rho, &res.sigma_star, f)?;
                worst = worst.max((direct - res.entanglement).abs());
                worst = worst.max((res.entanglement - f.eval(1.0 / d as f64)?).abs());
                min_cert = min_cert.min(res.certificate.min_directional_derivative);
            }
        }
        let mut outcome = upper_bounded(
            "maximally entangled minimizer reproduces f(1/d)",
            worst,
            tol::CLOSED_FORM_TOL,
            format!("d in 2..4, all builtins; worst certificate minimum {min_cert:.3e}"),
        );
        outcome.passed = outcome.passed && min_cert >= tol::CERTIFICATE_THRESHOLD;
        Ok(outcome)
    });

    guarded(checks, "flat-transfer minimizer keeps the Schmidt spectrum", || {
        let log = from_spec("log")?;
        let mut rng = seeded_rng(seed.wrapping_add(3));
        let mut worst = 0.0_f64;
        let mut min_cert = f64::INFINITY;
        for trial in 0..20 {
            let n = 2 + trial % 2;
            let amps = random_pure_with(&mut rng, n)?;
            let mut p: Vec<f64> = amps.amplitudes().iter().map(|z| z.norm_sqr()).collect();
            let total: f64 = p.iter().sum();
            for x in &mut p {
                *x /= total;
            }
            let res = closest_pure_flat_h(&p, &log)?;
            let entropy: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
            worst = worst.max((res.entanglement - entropy).abs());
            let rho = PureState::from_schmidt_probabilities(&p)?.density();
            let direct = qre_spectral(&rho, &res.sigma_star, &log)?;
            worst = worst.max((direct - res.entanglement).abs());
            min_cert = min_cert.min(res.certificate.min_directional_derivative);
        }
        let mut outcome = upper_bounded(
            "flat-transfer minimizer keeps the Schmidt spectrum",
            worst,
            tol::CLOSED_FORM_TOL,
            format!("20 random spectra, lengths 2 and 3; worst certificate minimum {min_cert:.3e}"),
        );
        outcome.passed = outcome.passed && min_cert >= tol::CERTIFICATE_THRESHOLD;
        Ok(outcome)
    });

    guarded(checks, "fixed-point solver inverts the closed form", || {
        // (spec string, power-family exponent pe); q = r/(1+r) with
        // r = (p/(1-p))^(1/(1-pe)) inverts rhs for the power family.
        let cases = [
            ("power:0.3", 0.3),
            ("scaled_power:0.5", 0.5),
            ("tsallis:0.4", 0.6),
            ("power_entropy:0.3", 0.7),
            ("power_entropy:0.5", 0.5),
            ("power_entropy:0.7", 0.3),
        ];
        let log = from_spec("log")?;
        let mut worst = 0.0_f64;
        let mut bullet_violations = 0usize;
        for i in 1..=19 {
            let p = 0.05 * i as f64;
            worst = worst.max((solve_q(p, &log)? - p).abs());
            for (name, pe) in cases {
                let f = from_spec(name)?;
                let q = solve_q(p, &f)?;
                let r = (p / (1.0 - p)).powf(1.0 / (1.0 - pe));
                worst = worst.max((q - r / (1.0 + r)).abs());
                // Increasing transfer: q on p's side of 1/2, past p.
                let same_side = (q > 0.5) == (p > 0.5) || p == 0.5;
                let past = p == 0.5 || (p - 0.5) * (q - p) >= 0.0;
                if !(same_side && past) {
                    bullet_violations += 1;
                }
            }
        }
        let mut outcome = upper_bounded(
            "fixed-point solver inverts the closed form",
            worst,
            1e-8,
            format!("p in 0.05..0.95; bullet-law violations: {bullet_violations}"),
        );
        outcome.passed = outcome.passed && bullet_violations == 0;
        Ok(outcome)
    });

    guarded(checks, "stationarity identities vanish at the solved point", || {
        let spec = QuadratureSpec::default();
        let mut worst = 0.0_f64;
        for alpha in [0.3, 0.5, 0.7] {
            let f = from_spec(&format!("power_entropy:{alpha}"))?;
            for i in 1..=9 {
                let p = 0.1 * i as f64;
                let q = solve_q(p, &f)?;
                let h_q = f.hf(q, &spec)?;
                let h_cq = f.hf(1.0 - q, &spec)?;
                let d0 = (1.0 - p) * h_cq - p * ((1.0 - q) / q) * h_q;
                let d1 = p * h_q - (1.0 - p) * (q / (1.0 - q)) * h_cq;
                worst = worst.max(d0.abs()).max(d1.abs());
            }
        }
        Ok(upper_bounded(
            "stationarity identities vanish at the solved point",
            worst,
            tol::DERIVATIVE_TOL,
            "both partial derivatives, alpha in {0.3, 0.5, 0.7}".into(),
        ))
    });

    guarded(checks, "two-qubit theorem matches maxent at p = 1/2", || {
        let mut worst = 0.0_f64;
        for f in &builtins {
            let qubit = closest_two_qubit(0.5, f)?;
            let max = closest_maxent(2, f)?;
            worst = worst.max((qubit.entanglement - max.entanglement).abs());
            let (a, b) = (qubit.sigma_star.matrix(), max.sigma_star.matrix());
            for i in 0..4 {
                for j in 0..4 {
                    worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
                }
            }
        }
        Ok(upper_bounded(
            "two-qubit theorem matches maxent at p = 1/2",
            worst,
            tol::CLOSED_FORM_TOL,
            "entanglement and minimizer entries, all builtins".into(),
        ))
    });

    guarded(checks, "closest state is invariant under local unitaries", || {
        let f = from_spec("power_entropy:0.5")?;
        let mut rng = seeded_rng(seed.wrapping_add(4));
        let mut worst = 0.0_f64;
        let mut min_cert = f64::INFINITY;
        for _ in 0..5 {
            let p0 = 0.55 + 0.4 * rand::Rng::random::<f64>(&mut rng);
            let base = PureState::from_schmidt_probabilities(&[p0, 1.0 - p0])?;
            let reference = closest_pure_state(&base, &f)?;

            let ua = random_unitary_with(&mut rng, 2);
            let ub = random_unitary_with(&mut rng, 2);
            let mut local = nalgebra::DMatrix::from_element(
                4,
                4,
                num_complex::Complex64::new(0.0, 0.0),
            );
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            local[(i * 2 + k, j * 2 + l)] = ua[(i, j)] * ub[(k, l)];
                        }
                    }
                }
            }
            let rotated = PureState::new(&local * base.amplitudes(), Some((2, 2)))?;
            let res = closest_pure_state(&rotated, &f)?;
            worst = worst.max((res.entanglement - reference.entanglement).abs());
            let direct = qre_spectral(&rotated.density(), &res.sigma_star, &f)?;
            worst = worst.max((direct - res.entanglement).abs());
            min_cert = min_cert.min(res.certificate.min_directional_derivative);
        }
        let mut outcome = upper_bounded(
            "closest state is invariant under local unitaries",
            worst,
            1e-9,
            format!("5 random two-qubit rotations; worst certificate minimum {min_cert:.3e}"),
        );
        outcome.passed = outcome.passed && min_cert >= tol::CERTIFICATE_THRESHOLD;
        Ok(outcome)
    });

    guarded(checks, "oracle never beats the theorems", || {
        let cfg = OptimizerConfig { restarts: 8, max_iters: 800, seed, ..Default::default() };
        let log = from_spec("log")?;
        let bell = PureState::maximally_entangled(2)?.density();
        let warm = ProductEnsemble::diagonal(&[0.5, 0.5], (2, 2))?;
        let out = minimize(&bell, &log, &cfg, Some(&warm))?;
        let ln2 = std::f64::consts::LN_2;
        let mut worst_below = ln2 - out.value;
        let mut worst_above = out.value - ln2;

        let f = from_spec("power_entropy:0.5")?;
        let res = closest_two_qubit(0.75, &f)?;
        let rho = PureState::from_schmidt_probabilities(&[0.75, 0.25])?.density();
        let warm = ProductEnsemble::diagonal(&res.q, (2, 2))?;
        let out = minimize(&rho, &f, &cfg, Some(&warm))?;
        worst_below = worst_below.max(res.entanglement - out.value);
        worst_above = worst_above.max(out.value - res.entanglement);

        let mut outcome = upper_bounded(
            "oracle never beats the theorems",
            worst_below,
            tol::ORACLE_GAP_BELOW,
            format!("worst gap above the analytic value: {worst_above:.3e}"),
        );
        outcome.passed = outcome.passed && worst_above <= tol::ORACLE_GAP_ABOVE;
        Ok(outcome)
    });
}
