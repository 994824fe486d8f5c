//! Quasi-relative entropy evaluation.
//!
//! For states `rho` and `sigma` with spectral decompositions
//! `rho = sum_j lambda_j |phi_j><phi_j|` and
//! `sigma = sum_k mu_k |psi_k><psi_k|`, the quasi-relative entropy built from
//! a generator function `f` is
//!
//! ```text
//! S_f(rho || sigma) = sum_{j,k} lambda_j f(mu_k / lambda_j) |<psi_k|phi_j>|^2 .
//! ```
//!
//! [`qre_spectral`] evaluates this sum directly.  [`qre_modular`]
//! independently builds the relative modular operator
//! `Delta_{sigma,rho}(X) = sigma X rho^{-1}` as a `d^2 x d^2` matrix on
//! vectorized operators and evaluates `Tr(f(Delta) rho)` in its
//! Hilbert-Schmidt reading `<rho^{1/2}, f(Delta)(rho^{1/2})>`, the unique one
//! reproducing the spectral formula.  The two routes are cross-validated in
//! the test suites and serve as mutual oracles.
//!
//! Zero-eigenvalue policy: terms with `lambda_j = 0` are dropped, which is the
//! correct limit whenever `a_f = 0` (`f` sublinear at infinity); terms with
//! `mu_k = 0` and nonvanishing overlap contribute `lambda_j f(0+)`, which is
//! `+inf` for `-ln` and finite for the power family.  `f64::INFINITY` is a
//! first-class return value; NaN is never returned.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fgen::GeneratorFunction;
use crate::qstate::{eig_hermitian, DensityMatrix, SpectralDecomposition};
use crate::tol;

fn check_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states have different dimensions: {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// Spectral-formula evaluation from precomputed decompositions.  Shared by
/// [`qre_spectral`] and the separable-ensemble minimizer, which reuses the
/// eigendecomposition of a fixed `rho` across many candidate `sigma`.
pub(crate) fn qre_from_spectra(
    rho_eig: &SpectralDecomposition,
    sigma_eig: &SpectralDecomposition,
    f: &GeneratorFunction,
) -> Result<f64> {
    if f.a_f() != 0.0 && rho_eig.rank() < rho_eig.dim() {
        return Err(Error::Domain(format!(
            "dropping zero eigenvalues of rho requires a_f = 0, but '{f}' has a_f = {}",
            f.a_f()
        )));
    }
    let f_at_zero = f.value_at_zero();
    let phis = rho_eig.vectors();
    let psis = sigma_eig.vectors();
    let mut total = 0.0;
    for (j, &lambda) in rho_eig.values().iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let phi = phis.column(j);
        for (k, &mu) in sigma_eig.values().iter().enumerate() {
            let overlap = psis.column(k).dotc(&phi).norm_sqr();
            if overlap <= tol::OVERLAP_TOL {
                continue;
            }
            if mu <= 0.0 {
                if f_at_zero.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                total += lambda * f_at_zero * overlap;
            } else {
                total += lambda * f.eval(mu / lambda)? * overlap;
            }
        }
    }
    Ok(total)
}

/// Computes `S_f(rho || sigma)` by the spectral formula.  Returns
/// `f64::INFINITY` on genuine support violation when `f` diverges at `0+`.
pub fn qre_spectral(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    f: &GeneratorFunction,
) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    qre_from_spectra(&rho.eig()?, &sigma.eig()?, f)
}

/// The relative modular operator `Delta_{sigma,rho}(X) = sigma X rho^{-1}`
/// realized as the matrix `(rho^{-1})^T (x) sigma` on column-major vectorized
/// operators.  Positive semidefinite on the Hilbert-Schmidt space.
#[derive(Debug, Clone)]
pub struct ModularOperator {
    sigma: DMatrix<Complex64>,
    rho_inv: DMatrix<Complex64>,
    matrix: DMatrix<Complex64>,
    spectral: SpectralDecomposition,
}

impl ModularOperator {
    /// Builds `Delta_{sigma,rho}`.  `rho` must be strictly positive; `sigma`
    /// may be singular, which only pushes eigenvalues of the operator to 0.
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        check_same_dim(rho, sigma)?;
        let rho_eig = rho.eig()?;
        if rho_eig.rank() < rho.dim() {
            return Err(Error::Singular(
                "the relative modular operator needs strictly positive rho; \
                 use qre_spectral for rank-deficient states"
                    .into(),
            ));
        }
        let rho_inv_raw = rho_eig.apply_function(|x| 1.0 / x);
        // Symmetrize: the spectral synthesis is Hermitian only up to rounding
        // scaled by 1/lambda_min, which can exceed the strict defect check.
        let rho_inv = (&rho_inv_raw + rho_inv_raw.adjoint()) * Complex64::new(0.5, 0.0);
        let matrix = rho_inv.transpose().kronecker(sigma.matrix());
        let spectral = eig_hermitian(&matrix)?;
        Ok(ModularOperator {
            sigma: sigma.matrix().clone(),
            rho_inv,
            matrix,
            spectral,
        })
    }

    /// The `d^2 x d^2` matrix acting on column-major vectorized operators.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Eigenvalues in descending order; these are the ratios
    /// `mu_k / lambda_j` in some order.
    pub fn eigenvalues(&self) -> &[f64] {
        self.spectral.values()
    }

    /// Applies the operator to a matrix directly: `sigma X rho^{-1}`.
    pub fn apply(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        &self.sigma * x * &self.rho_inv
    }
}

/// Computes `S_f(rho || sigma)` through the relative modular operator:
/// `<rho^{1/2}, f(Delta_{sigma,rho})(rho^{1/2})>` on the Hilbert-Schmidt
/// space.  Requires both states strictly positive.
pub fn qre_modular(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    f: &GeneratorFunction,
) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let sigma_eig = sigma.eig()?;
    if sigma_eig.rank() < sigma.dim() {
        return Err(Error::Singular(
            "qre_modular needs strictly positive sigma; \
             use qre_spectral for rank-deficient states"
                .into(),
        ));
    }
    let op = ModularOperator::new(rho, sigma)?;
    let sqrt_rho = rho.eig()?.apply_function(|x| x.sqrt());
    let v = DVector::from_column_slice(sqrt_rho.as_slice());
    let f_at_zero = f.value_at_zero();
    let mut total = 0.0;
    for (i, &kappa) in op.spectral.values().iter().enumerate() {
        let weight = op.spectral.vectors().column(i).dotc(&v).norm_sqr();
        if weight <= tol::OVERLAP_TOL {
            continue;
        }
        if kappa <= 0.0 {
            // Unreachable for strictly positive inputs unless an eigenvalue
            // was clamped; treat like the spectral mu = 0 branch.
            if f_at_zero.is_infinite() {
                return Ok(f64::INFINITY);
            }
            total += f_at_zero * weight;
        } else {
            total += f.eval(kappa)? * weight;
        }
    }
    Ok(total)
}

fn check_unit_open_param(value: f64, name: &str) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(Error::Domain(format!(
            "{name} must lie in (0, 1), got {value}; values outside are unsupported"
        )));
    }
    Ok(())
}

/// Umegaki relative entropy `Tr(rho ln rho - rho ln sigma)`, i.e. `S_f` with
/// `f = -ln`.
pub fn umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = crate::fgen::make_builtin(crate::fgen::Builtin::NegLog)?;
    qre_spectral(rho, sigma, &f)
}

/// The alpha divergence `S_alpha = 1 - Tr(rho^alpha sigma^{1-alpha})` for
/// `alpha` in `(0, 1)`, i.e. `S_f` with `f(x) = 1 - x^{1-alpha}`.
pub fn alpha_divergence(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_unit_open_param(alpha, "alpha")?;
    let f = crate::fgen::make_builtin(crate::fgen::Builtin::PowerEntropy(alpha))?;
    qre_spectral(rho, sigma, &f)
}

/// The Renyi relative entropy
/// `(1/(alpha-1)) ln Tr(rho^alpha sigma^{1-alpha})` for `alpha` in `(0, 1)`,
/// computed through the identity with the alpha divergence.  Returns `+inf`
/// when the trace term vanishes.
pub fn renyi_relative(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_unit_open_param(alpha, "alpha")?;
    let arg = 1.0 - alpha_divergence(rho, sigma, alpha)?;
    if arg <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(arg.ln() / (alpha - 1.0))
}

/// The Tsallis relative q-entropy
/// `(1 - Tr(rho^q sigma^{1-q})) / (1 - q)` for `q` in `(0, 1)`, i.e. `S_f`
/// with the Tsallis generator.
pub fn tsallis_relative(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64) -> Result<f64> {
    check_unit_open_param(q, "q")?;
    let f = crate::fgen::make_builtin(crate::fgen::Builtin::Tsallis(q))?;
    qre_spectral(rho, sigma, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgen::{from_spec, make_builtin, make_custom, Builtin, CustomFunction};
    use crate::qstate::{
        random_density_with, random_unitary_with, seeded_rng, PureState, Subsystem,
    };
    use rand::Rng;
    use std::sync::Arc;

    fn diag_state(entries: &[f64]) -> DensityMatrix {
        DensityMatrix::from_probabilities(entries, None).unwrap()
    }

    /// `Tr(rho ln rho - rho ln sigma)` by direct matrix logarithms; valid for
    /// full-rank inputs.
    fn direct_umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
        let log_rho = rho.eig().unwrap().apply_function(|x| x.ln());
        let log_sigma = sigma.eig().unwrap().apply_function(|x| x.ln());
        let diff = rho.matrix() * (log_rho - log_sigma);
        diff.trace().re
    }

    /// `1 - Tr(rho^alpha sigma^{1-alpha})` by direct matrix powers.
    fn direct_alpha(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> f64 {
        let ra = rho.eig().unwrap().apply_function(|x| x.powf(alpha));
        let sb = sigma.eig().unwrap().apply_function(|x| x.powf(1.0 - alpha));
        1.0 - (ra * sb).trace().re
    }

    #[test]
    fn vanishes_when_arguments_coincide() {
        let mut rng = seeded_rng(11);
        for f in [from_spec("log").unwrap(), from_spec("power:0.5").unwrap()] {
            for dim in [2, 3] {
                let rho = random_density_with(&mut rng, dim).unwrap();
                let v = qre_spectral(&rho, &rho, &f).unwrap();
                assert!(v.abs() <= 1e-10, "{f} on dim {dim}: {v}");
            }
        }
    }

    #[test]
    fn bell_state_against_maximally_mixed_gives_log_four() {
        let bell = PureState::maximally_entangled(2).unwrap().density();
        let mixed = DensityMatrix::from_probabilities(&[0.25; 4], Some((2, 2))).unwrap();
        let v = umegaki(&bell, &mixed).unwrap();
        assert!((v - 4.0_f64.ln()).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn commuting_states_reduce_to_classical_kl() {
        let rho = diag_state(&[0.7, 0.3]);
        let sigma = diag_state(&[0.5, 0.5]);
        let v = umegaki(&rho, &sigma).unwrap();
        let expect = 0.7 * (0.7_f64 / 0.5).ln() + 0.3 * (0.3_f64 / 0.5).ln();
        assert!((v - expect).abs() < 1e-12, "got {v}, want {expect}");
        assert!((v - 0.0822828785050517).abs() < 1e-12);
    }

    #[test]
    fn support_violation_is_infinite_for_log() {
        let zero = PureState::basis_vector(2, 0, None).unwrap().density();
        let one = PureState::basis_vector(2, 1, None).unwrap().density();
        let v = umegaki(&zero, &one).unwrap();
        assert!(v.is_infinite() && v > 0.0);
    }

    #[test]
    fn support_violation_is_finite_for_bounded_generators() {
        let zero = PureState::basis_vector(2, 0, None).unwrap().density();
        let one = PureState::basis_vector(2, 1, None).unwrap().density();
        let f = from_spec("power_entropy:0.5").unwrap();
        // Single term lambda = 1 against mu = 0: contributes f(0+) = 1.
        let v = qre_spectral(&zero, &one, &f).unwrap();
        assert!((v - 1.0).abs() <= 1e-12, "got {v}");
    }

    #[test]
    fn umegaki_matches_direct_matrix_logs() {
        let mut rng = seeded_rng(21);
        for dim in [2, 3, 4] {
            let rho = random_density_with(&mut rng, dim).unwrap();
            let sigma = random_density_with(&mut rng, dim).unwrap();
            let v = umegaki(&rho, &sigma).unwrap();
            let direct = direct_umegaki(&rho, &sigma);
            assert!((v - direct).abs() < 1e-9, "dim {dim}: {v} vs {direct}");
        }
    }

    #[test]
    fn alpha_divergence_matches_direct_matrix_powers() {
        let mut rng = seeded_rng(22);
        for dim in [2, 3] {
            for alpha in [0.3, 0.5, 0.8] {
                let rho = random_density_with(&mut rng, dim).unwrap();
                let sigma = random_density_with(&mut rng, dim).unwrap();
                let v = alpha_divergence(&rho, &sigma, alpha).unwrap();
                let direct = direct_alpha(&rho, &sigma, alpha);
                assert!(
                    (v - direct).abs() < 1e-9,
                    "dim {dim}, alpha {alpha}: {v} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn alpha_divergence_on_bell_and_commuting_fixtures() {
        let bell = PureState::maximally_entangled(2).unwrap().density();
        let mixed = DensityMatrix::from_probabilities(&[0.25; 4], Some((2, 2))).unwrap();
        let v = alpha_divergence(&bell, &mixed, 0.5).unwrap();
        assert!((v - 0.5).abs() < 1e-10, "got {v}");

        let rho = diag_state(&[0.7, 0.3]);
        let half = diag_state(&[0.5, 0.5]);
        let v = alpha_divergence(&rho, &half, 0.5).unwrap();
        let expect = 1.0 - 0.35_f64.sqrt() - 0.15_f64.sqrt();
        assert!((v - expect).abs() < 1e-10, "got {v}, want {expect}");
    }

    #[test]
    fn renyi_matches_its_identity_with_alpha_divergence() {
        let bell = PureState::maximally_entangled(2).unwrap().density();
        let mixed = DensityMatrix::from_probabilities(&[0.25; 4], Some((2, 2))).unwrap();
        let v = renyi_relative(&bell, &mixed, 0.5).unwrap();
        assert!((v - 4.0_f64.ln()).abs() < 1e-9, "got {v}");

        let rho = diag_state(&[0.7, 0.3]);
        let half = diag_state(&[0.5, 0.5]);
        let v = renyi_relative(&rho, &half, 0.5).unwrap();
        let expect = -2.0 * (0.35_f64.sqrt() + 0.15_f64.sqrt()).ln();
        assert!((v - expect).abs() < 1e-12, "got {v}, want {expect}");

        let same = renyi_relative(&rho, &rho, 0.5).unwrap();
        assert!(same.abs() < 1e-12);
    }

    #[test]
    fn renyi_is_infinite_on_disjoint_support() {
        let zero = PureState::basis_vector(2, 0, None).unwrap().density();
        let one = PureState::basis_vector(2, 1, None).unwrap().density();
        let v = renyi_relative(&zero, &one, 0.5).unwrap();
        assert!(v.is_infinite() && v > 0.0);
    }

    #[test]
    fn tsallis_scales_the_alpha_divergence_at_half() {
        let bell = PureState::maximally_entangled(2).unwrap().density();
        let mixed = DensityMatrix::from_probabilities(&[0.25; 4], Some((2, 2))).unwrap();
        let v = tsallis_relative(&bell, &mixed, 0.5).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "got {v}");

        let mut rng = seeded_rng(23);
        let rho = random_density_with(&mut rng, 3).unwrap();
        let sigma = random_density_with(&mut rng, 3).unwrap();
        let t = tsallis_relative(&rho, &sigma, 0.5).unwrap();
        let a = alpha_divergence(&rho, &sigma, 0.5).unwrap();
        assert!((t - 2.0 * a).abs() < 1e-12, "{t} vs 2 * {a}");
    }

    #[test]
    fn wrapper_parameters_outside_unit_interval_are_rejected() {
        let rho = diag_state(&[0.5, 0.5]);
        for bad in [0.0, 1.0, 1.5, -0.5] {
            assert!(matches!(
                alpha_divergence(&rho, &rho, bad),
                Err(Error::Domain(_))
            ));
            assert!(matches!(
                renyi_relative(&rho, &rho, bad),
                Err(Error::Domain(_))
            ));
            assert!(matches!(
                tsallis_relative(&rho, &rho, bad),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn modular_operator_action_matches_its_matrix() {
        let mut rng = seeded_rng(31);
        for dim in [2, 3] {
            let rho = random_density_with(&mut rng, dim).unwrap();
            let sigma = random_density_with(&mut rng, dim).unwrap();
            let op = ModularOperator::new(&rho, &sigma).unwrap();

            let x = DMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let direct = op.apply(&x);
            let vec_x = DVector::from_column_slice(x.as_slice());
            let mapped = op.matrix() * vec_x;
            let direct_vec = DVector::from_column_slice(direct.as_slice());
            assert!(
                (mapped - direct_vec).norm() < 1e-10,
                "action mismatch at dim {dim}"
            );
        }
    }

    #[test]
    fn modular_operator_is_positive_semidefinite() {
        let mut rng = seeded_rng(32);
        let rho = random_density_with(&mut rng, 3).unwrap();
        let sigma = random_density_with(&mut rng, 3).unwrap();
        let op = ModularOperator::new(&rho, &sigma).unwrap();
        assert!(op.eigenvalues().iter().all(|&k| k >= 0.0));

        // Singular sigma is fine for the operator itself.
        let pure = PureState::basis_vector(3, 1, None).unwrap().density();
        let op = ModularOperator::new(&rho, &pure).unwrap();
        assert!(op.eigenvalues().iter().all(|&k| k >= 0.0));
    }

    #[test]
    fn modular_eigenvalues_are_eigenvalue_ratios_for_diagonal_states() {
        let rho = diag_state(&[0.7, 0.3]);
        let sigma = diag_state(&[0.6, 0.4]);
        let op = ModularOperator::new(&rho, &sigma).unwrap();
        let mut expected = vec![
            0.6 / 0.7,
            0.4 / 0.7,
            0.6 / 0.3,
            0.4 / 0.3,
        ];
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in op.eigenvalues().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn modular_requires_full_rank_rho() {
        let bell = PureState::maximally_entangled(2).unwrap().density();
        let mixed = DensityMatrix::from_probabilities(&[0.25; 4], Some((2, 2))).unwrap();
        assert!(matches!(
            ModularOperator::new(&bell, &mixed),
            Err(Error::Singular(_))
        ));
        let f = make_builtin(Builtin::NegLog).unwrap();
        assert!(matches!(
            qre_modular(&bell, &mixed, &f),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            qre_modular(&mixed, &bell, &f),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn spectral_and_modular_routes_agree() {
        let mut rng = seeded_rng(33);
        let fs = [from_spec("log").unwrap(), from_spec("tsallis:0.3").unwrap()];
        for dim in [2, 3, 4] {
            for _ in 0..5 {
                let rho = random_density_with(&mut rng, dim).unwrap();
                let sigma = random_density_with(&mut rng, dim).unwrap();
                for f in &fs {
                    let s = qre_spectral(&rho, &sigma, f).unwrap();
                    let m = qre_modular(&rho, &sigma, f).unwrap();
                    assert!(
                        (s - m).abs() <= crate::tol::SPECTRAL_MODULAR_TOL,
                        "dim {dim}, {f}: spectral {s} vs modular {m}"
                    );
                }
            }
        }
    }

    #[test]
    fn diagonal_pair_reduces_to_classical_f_divergence() {
        let rho = diag_state(&[0.7, 0.3]);
        let sigma = diag_state(&[0.4, 0.6]);
        let f = from_spec("power:0.5").unwrap();
        let classical: f64 = [(0.7, 0.4), (0.3, 0.6)]
            .iter()
            .map(|&(l, m): &(f64, f64)| l * f.eval(m / l).unwrap())
            .sum();
        let s = qre_spectral(&rho, &sigma, &f).unwrap();
        let modular = qre_modular(&rho, &sigma, &f).unwrap();
        assert!((s - classical).abs() < 1e-12);
        assert!((modular - classical).abs() < 1e-10);
    }

    #[test]
    fn unitary_conjugation_leaves_divergence_unchanged() {
        let mut rng = seeded_rng(34);
        let f = from_spec("power:0.5").unwrap();
        let rho = random_density_with(&mut rng, 3).unwrap();
        let sigma = random_density_with(&mut rng, 3).unwrap();
        let u = random_unitary_with(&mut rng, 3);
        let conj = |m: &DensityMatrix| {
            DensityMatrix::new(&u * m.matrix() * u.adjoint(), None).unwrap()
        };
        let before = qre_spectral(&rho, &sigma, &f).unwrap();
        let after = qre_spectral(&conj(&rho), &conj(&sigma), &f).unwrap();
        assert!((before - after).abs() <= 1e-9, "{before} vs {after}");
    }

    #[test]
    fn isometry_dilation_channel_is_contractive() {
        let mut rng = seeded_rng(35);
        let f = from_spec("log").unwrap();
        for _ in 0..5 {
            let dim = 3;
            let rho = random_density_with(&mut rng, dim).unwrap();
            let sigma = random_density_with(&mut rng, dim).unwrap();
            let u = random_unitary_with(&mut rng, dim * 2);
            let env = PureState::basis_vector(2, 0, None).unwrap().density();
            let channel = |m: &DensityMatrix| {
                let lifted = m.tensor_product(&env);
                let rotated =
                    DensityMatrix::new(&u * lifted.matrix() * u.adjoint(), Some((dim, 2)))
                        .unwrap();
                rotated.partial_trace(Subsystem::B).unwrap()
            };
            let before = qre_spectral(&rho, &sigma, &f).unwrap();
            let after = qre_spectral(&channel(&rho), &channel(&sigma), &f).unwrap();
            assert!(
                after <= before + 1e-9,
                "data processing violated: {after} > {before}"
            );
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = diag_state(&[0.5, 0.5]);
        let b = diag_state(&[0.4, 0.3, 0.3]);
        let f = make_builtin(Builtin::NegLog).unwrap();
        assert!(matches!(
            qre_spectral(&a, &b, &f),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            qre_modular(&a, &b, &f),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn positive_af_generators_need_full_rank_rho() {
        let f = make_custom(CustomFunction {
            name: "shifted_log".into(),
            closed_form: Arc::new(|x: f64| 0.5 * (1.0 - x) - x.ln()),
            value_at_zero: f64::INFINITY,
            a_f: 0.5,
            b_f: 0.0,
            singular_exponent: 0.0,
            smooth_density: Arc::new(|_| 1.0),
            hf_closed: None,
        })
        .unwrap();
        let pure = PureState::basis_vector(2, 0, None).unwrap().density();
        let mixed = diag_state(&[0.5, 0.5]);
        assert!(matches!(
            qre_spectral(&pure, &mixed, &f),
            Err(Error::Domain(_))
        ));
        // Full-rank rho is fine, and rho = sigma still gives zero.
        let v = qre_spectral(&mixed, &mixed, &f).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn values_are_never_nan() {
        let mut rng = seeded_rng(36);
        let fs = [from_spec("log").unwrap(), from_spec("power_entropy:0.3").unwrap()];
        for _ in 0..10 {
            let rho = crate::qstate::random_pure_with(&mut rng, 4).unwrap().density();
            let sigma = random_density_with(&mut rng, 4).unwrap();
            for f in &fs {
                let v = qre_spectral(&rho, &sigma, f).unwrap();
                assert!(!v.is_nan());
                let w = qre_spectral(&sigma, &rho, f).unwrap();
                assert!(!w.is_nan());
            }
        }
    }
}
