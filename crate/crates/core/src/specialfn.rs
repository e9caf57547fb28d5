//! Kernel constants and spectral coefficients built from Gamma ratios.
//!
//! Log-Gamma comes from `statrs` (Lanczos approximation, g = 10.900511,
//! 11 coefficients after Godfrey), which is accurate to a few ulp on `(0, 20)`.
//!
//! The Gamma-ratio brackets of the spectral coefficients vanish at `α = 1`
//! while `Γ(1-α)` has a pole there. Both are evaluated in telescoped form,
//! `Γ(1-α)·[r_m - r_n] = Γ(2-α) Σ_{k=m}^{n-1} Γ(k+α/2)/Γ(k+2-α/2)`, with the
//! summands generated by recurrence, so no cancellation occurs near the pole.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};
use thiserror::Error;

use crate::quadrature::{self, PanelSettings, QuadratureError};

/// Beyond this index the coefficients switch from the telescoped sum to
/// log-Gamma differences.
const RECURRENCE_LIMIT: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("alpha = {0} is outside [1, 2)")]
    AlphaOutOfRange(f64),
    #[error("mode index must be at least 1")]
    ZeroMode,
    #[error("the Gamma formula needs alpha in (1, 2); use the alpha = 1 branch")]
    UnitAlphaBranch,
    #[error("kernel oracle: {0}")]
    Oracle(#[from] QuadratureError),
}

/// Fractional order of the velocity law, restricted to `[1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self, SpecialFnError> {
        if (1.0..2.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(SpecialFnError::AlphaOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Exactly `α = 1`, where the logarithmic-type branches apply.
    pub fn is_unit(self) -> bool {
        self.0 == 1.0
    }

    fn half(self) -> f64 {
        0.5 * self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = SpecialFnError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(alpha: Alpha) -> f64 {
        alpha.0
    }
}

/// `C_α = Γ(α/2) / (2^{1-α} Γ(1-α/2))`, the kernel constant of `C_α/(2π)|x|^{-α}`.
pub fn biot_savart_constant(alpha: Alpha) -> f64 {
    let s = alpha.half();
    (ln_gamma(s) - ln_gamma(1.0 - s)).exp() / 2f64.powf(1.0 - alpha.value())
}

/// `Ĉ_α = 2^α Γ(1+α/2) / Γ(1-α/2)`, the point-vortex interaction constant.
pub fn point_vortex_constant(alpha: Alpha) -> f64 {
    let s = alpha.half();
    2f64.powf(alpha.value()) * (ln_gamma(1.0 + s) - ln_gamma(1.0 - s)).exp()
}

/// `Σ_{k=from}^{to-1} Γ(k+s)/Γ(k+2-s)` by the recurrence
/// `t_{k+1} = t_k (k+s)/(k+2-s)`.
fn telescoped_sum(s: f64, from: u32, to: u32) -> f64 {
    if to <= from {
        return 0.0;
    }
    let mut term = (ln_gamma(from as f64 + s) - ln_gamma(from as f64 + 2.0 - s)).exp();
    let mut sum = 0.0;
    for k in from..to {
        sum += term;
        let k = k as f64;
        term *= (k + s) / (k + 2.0 - s);
    }
    sum
}

/// `Γ(n+s)/Γ(n+1-s)` through log-Gamma differences.
fn gamma_ratio(n: u32, s: f64) -> f64 {
    (ln_gamma(n as f64 + s) - ln_gamma(n as f64 + 1.0 - s)).exp()
}

/// Spectral coefficient σ_n as printed: the Gamma-ratio formula for
/// `α ∈ (1, 2)`, and `(2/π) Σ_{l=1}^{n} 1/(2l-1)` at `α = 1`.
///
/// For `α ∈ (1, 2)` this gives `σ_1 = 0`. At `α = 1` the printed sum includes
/// the `l = 1` term. See [`linearization_symbol`] for the eigenvalue of the
/// linearized operator.
pub fn sigma_coefficient(alpha: Alpha, n: u32) -> Result<f64, SpecialFnError> {
    if n == 0 {
        return Err(SpecialFnError::ZeroMode);
    }
    if alpha.is_unit() {
        return Ok(2.0 / PI * odd_harmonic(1, n));
    }
    Ok(gamma_branch_sigma(alpha, n))
}

/// `2^{α-1}Γ(1-α)/Γ(1-α/2)² · (Γ(1+α/2)/Γ(2-α/2) - Γ(n+α/2)/Γ(n+1-α/2))`,
/// valid on `[1, 2)` in telescoped form.
fn gamma_branch_sigma(alpha: Alpha, n: u32) -> f64 {
    let a = alpha.value();
    let s = alpha.half();
    if n <= RECURRENCE_LIMIT || a == 1.0 {
        let prefactor = 2f64.powf(a - 1.0) * gamma(2.0 - a) / gamma(1.0 - s).powi(2);
        prefactor * telescoped_sum(s, 1, n)
    } else {
        let prefactor = 2f64.powf(a - 1.0) * gamma(1.0 - a) / gamma(1.0 - s).powi(2);
        prefactor * (gamma_ratio(1, s) - gamma_ratio(n, s))
    }
}

/// Eigenvalue symbol of the linearized self-interaction on mode `n`:
/// `L(cos nx) = γ n σ̂_n sin nx`. Equal to [`sigma_coefficient`] for
/// `α ∈ (1, 2)` and to `σ_n - σ_1 = (2/π) Σ_{l=2}^{n} 1/(2l-1)` at `α = 1`,
/// which is the `α → 1⁺` limit of the Gamma formula.
pub fn linearization_symbol(alpha: Alpha, n: u32) -> Result<f64, SpecialFnError> {
    if n == 0 {
        return Err(SpecialFnError::ZeroMode);
    }
    if alpha.is_unit() {
        return Ok(2.0 / PI * odd_harmonic(2, n));
    }
    Ok(gamma_branch_sigma(alpha, n))
}

/// `Σ_{l=from}^{to} 1/(2l-1)`.
fn odd_harmonic(from: u32, to: u32) -> f64 {
    (from..=to).map(|l| 1.0 / (2.0 * l as f64 - 1.0)).sum()
}

/// Coefficient β_n with `I_n(x) = β_n sin(nx)` and `J_n(x) = β_n cos(nx)`.
pub fn beta_coefficient(alpha: Alpha, n: u32) -> Result<f64, SpecialFnError> {
    if n == 0 {
        return Err(SpecialFnError::ZeroMode);
    }
    if alpha.is_unit() {
        return Ok(8.0 * odd_harmonic(1, n));
    }
    let a = alpha.value();
    let s = alpha.half();
    let scale = 2f64.powf(a) * 2.0 * PI / (gamma(s) * gamma(1.0 - s));
    if n <= RECURRENCE_LIMIT {
        Ok(scale * gamma(2.0 - a) * telescoped_sum(s, 0, n))
    } else {
        let head = (ln_gamma(s) - ln_gamma(1.0 - s)).exp();
        Ok(scale * gamma(1.0 - a) * (head - gamma_ratio(n, s)))
    }
}

/// `Ξ_α = (α+2) Γ(1-α/2) Γ(3-α/2) / Γ(2-α)` for `α ∈ (1, 2)`.
pub fn xi_constant(alpha: Alpha) -> Result<f64, SpecialFnError> {
    if alpha.is_unit() {
        return Err(SpecialFnError::UnitAlphaBranch);
    }
    let a = alpha.value();
    let s = alpha.half();
    Ok((a + 2.0) * (ln_gamma(1.0 - s) + ln_gamma(3.0 - s) - ln_gamma(2.0 - a)).exp())
}

/// Right-hand side of the printed ratio identity `αC_α/σ_2 = Γ(1-α/2)Γ(3-α/2)/Γ(2-α)`.
pub fn printed_constant_ratio(alpha: Alpha) -> Result<f64, SpecialFnError> {
    Ok(xi_constant(alpha)? / (alpha.value() + 2.0))
}

/// The ratio `αC_α/σ_2` evaluated from its definitions.
pub fn constant_ratio(alpha: Alpha) -> Result<f64, SpecialFnError> {
    if alpha.is_unit() {
        return Err(SpecialFnError::UnitAlphaBranch);
    }
    Ok(alpha.value() * biot_savart_constant(alpha) / sigma_coefficient(alpha, 2)?)
}

/// Which of the two auxiliary kernel integrals to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `I_n(x) = ∫_0^{2π} (sin nx - sin(nx - ny)) / sin(y/2)^α dy`
    Sine,
    /// `J_n(x) = ∫_0^{2π} (cos nx - cos(nx - ny)) / sin(y/2)^α dy`
    Cosine,
}

/// Panel layout of the kernel oracle: 24 halvings, 16-point rule.
pub fn oracle_settings(n: u32) -> PanelSettings {
    PanelSettings::for_modes(24, 16, (n as usize).max(8))
}

/// Direct quadrature of `I_n(x)` or `J_n(x)`, independent of the closed forms.
/// Fails if the next refinement level moves the value by more than
/// `tolerance` (relative to `max(|value|, 1)`).
pub fn kernel_quadrature_oracle(
    alpha: Alpha,
    n: u32,
    kind: KernelKind,
    x: f64,
    tolerance: f64,
) -> Result<quadrature::Estimate, SpecialFnError> {
    if n == 0 {
        return Err(SpecialFnError::ZeroMode);
    }
    let a = alpha.value();
    let nf = n as f64;
    let integrand = move |y: f64| {
        let y = y.rem_euclid(2.0 * PI);
        let denom = (0.5 * y).sin().powf(a);
        let numer = match kind {
            KernelKind::Sine => (nf * x).sin() - (nf * x - nf * y).sin(),
            KernelKind::Cosine => (nf * x).cos() - (nf * x - nf * y).cos(),
        };
        numer / denom
    };
    Ok(quadrature::singular_quadrature(
        integrand,
        a,
        0.0,
        oracle_settings(n),
        tolerance,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn alpha(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    // Reference values from a 30-digit mpmath evaluation of the Gamma formulas.
    #[test]
    fn frozen_reference_values() {
        assert_relative_eq!(beta_coefficient(alpha(1.5), 2).unwrap(), 15.33619500461558, max_relative = 1e-13);
        assert_relative_eq!(sigma_coefficient(alpha(1.5), 2).unwrap(), 0.1546827007578282, max_relative = 1e-13);
        assert_relative_eq!(sigma_coefficient(alpha(1.25), 2).unwrap(), 0.19024305032032493, max_relative = 1e-13);
        assert_relative_eq!(beta_coefficient(alpha(1.25), 2).unwrap(), 12.641268395790094, max_relative = 1e-13);
        assert_relative_eq!(beta_coefficient(alpha(1.75), 3).unwrap(), 26.610855917111927, max_relative = 1e-13);
        // Γ(0.75)/(2^{-1/2} Γ(0.25))
        assert_relative_eq!(biot_savart_constant(alpha(1.5)), 0.477988797486125, max_relative = 1e-13);
    }

    #[test]
    fn unit_alpha_constants() {
        let one = alpha(1.0);
        assert_relative_eq!(biot_savart_constant(one), 1.0, max_relative = 1e-14);
        assert_relative_eq!(point_vortex_constant(one), 1.0, max_relative = 1e-14);
        assert_relative_eq!(sigma_coefficient(one, 2).unwrap(), 8.0 / (3.0 * PI), epsilon = 1e-15);
        assert_eq!(beta_coefficient(one, 1).unwrap(), 8.0);
        assert_relative_eq!(linearization_symbol(one, 2).unwrap(), 2.0 / (3.0 * PI), epsilon = 1e-15);
        assert_eq!(linearization_symbol(one, 1).unwrap(), 0.0);
        assert!(matches!(xi_constant(one), Err(SpecialFnError::UnitAlphaBranch)));
    }

    #[test]
    fn telescoped_and_closed_forms_agree() {
        for a in [1.1, 1.5, 1.9] {
            let s = 0.5 * a;
            for n in [2u32, 7, 40, 300] {
                let prefactor = 2f64.powf(a - 1.0) * gamma(1.0 - a) / gamma(1.0 - s).powi(2);
                let closed = prefactor * (gamma_ratio(1, s) - gamma_ratio(n, s));
                assert_relative_eq!(sigma_coefficient(alpha(a), n).unwrap(), closed, max_relative = 1e-11);
            }
        }
        // Continuity across the switch to log-Gamma differences.
        let a = alpha(1.5);
        let below = sigma_coefficient(a, RECURRENCE_LIMIT).unwrap();
        let above = sigma_coefficient(a, RECURRENCE_LIMIT + 1).unwrap();
        assert!(above > below && (above - below) / below < 1e-3);
    }

    #[test]
    fn gamma_branch_approaches_unit_symbol() {
        for n in [2, 3, 10] {
            let near = sigma_coefficient(alpha(1.0 + 1e-9), n).unwrap();
            assert_relative_eq!(near, linearization_symbol(alpha(1.0), n).unwrap(), max_relative = 1e-7);
        }
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(Alpha::new(2.0).is_err());
        assert!(Alpha::new(0.99).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert!(matches!(sigma_coefficient(alpha(1.5), 0), Err(SpecialFnError::ZeroMode)));
    }

    #[test]
    fn oracle_matches_unit_alpha_example() {
        let est = kernel_quadrature_oracle(alpha(1.0), 1, KernelKind::Sine, PI / 2.0, 1e-10).unwrap();
        assert_relative_eq!(est.value, 8.0, max_relative = 1e-10);
        let est = kernel_quadrature_oracle(alpha(1.5), 3, KernelKind::Cosine, 0.0, 1e-10).unwrap();
        assert_relative_eq!(est.value, beta_coefficient(alpha(1.5), 3).unwrap(), max_relative = 1e-9);
        let est = kernel_quadrature_oracle(alpha(1.3), 4, KernelKind::Sine, 0.0, 1e-10).unwrap();
        assert!(est.value.abs() < 1e-10);
    }
}
