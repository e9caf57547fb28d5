//! The linearized contour functional at the point-vortex state.
//!
//! At `ε = 0` and `f = 0` the derivative of `F_i` in the shape direction `h_i`
//! is diagonal in Fourier modes and decoupled between patches:
//! `cos nx ↦ s γ_i n σ̂_n sin nx` and `sin nx ↦ -s γ_i n σ̂_n cos nx` with a
//! global sign `s` that is measured, not assumed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{
    ContourError, Evaluator, EvaluatorSettings, ModeCoefficients, PatchEnsemble, PatchShape, ResidualSpectrum,
    SelfTermRoute,
};
use crate::pointvortex::{residual_norm, PointVortexConfiguration, VortexError};
use crate::specialfn::{biot_savart_constant, linearization_symbol, Alpha, SpecialFnError};

/// Largest `|P^α(λ)|` accepted as an equilibrium.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinopError {
    #[error("data has mode {mode} content of size {size:e} outside the range of the linearization")]
    RangeViolation { mode: usize, size: f64 },
    #[error("expected {expected} patches, got {found}")]
    PatchCount { expected: usize, found: usize },
    #[error("sign calibration failed: measured ratio {0}")]
    Calibration(f64),
    #[error("finite-difference step must be positive")]
    InvalidStep,
    #[error("configuration is not an equilibrium (|P| = {0:e})")]
    NotEquilibrium(f64),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Vortex(#[from] VortexError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

/// Diagonal symbol `m_{i,n} = s γ_i n σ̂_n` for `2 ≤ n ≤ M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMultiplier {
    alpha: Alpha,
    circulations: Vec<f64>,
    symbols: Vec<f64>,
    sign: f64,
}

impl SpectralMultiplier {
    pub fn new(alpha: Alpha, circulations: &[f64], mode_cutoff: usize, sign: f64) -> Result<Self, LinopError> {
        let symbols = (2..=mode_cutoff.max(2))
            .map(|n| linearization_symbol(alpha, n as u32))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            alpha,
            circulations: circulations.to_vec(),
            symbols,
            sign,
        })
    }

    /// Multiplier with the sign fixed by [`calibrate_sign`].
    pub fn calibrated(config: &PointVortexConfiguration, mode_cutoff: usize) -> Result<Self, LinopError> {
        let sign = calibrate_sign(config)?;
        Self::new(config.alpha(), config.circulations(), mode_cutoff, sign)
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }
    pub fn sign(&self) -> f64 {
        self.sign
    }
    pub fn mode_cutoff(&self) -> usize {
        self.symbols.len() + 1
    }
    pub fn patches(&self) -> usize {
        self.circulations.len()
    }

    /// `m_{i,n}` for `2 ≤ n ≤ M`.
    pub fn multiplier(&self, i: usize, n: usize) -> f64 {
        self.sign * self.circulations[i] * n as f64 * self.symbols[n - 2]
    }

    /// Image of `h` as a residual spectrum with modes `1..=M`.
    pub fn apply(&self, shapes: &[PatchShape]) -> Result<ResidualSpectrum, LinopError> {
        self.check_patches(shapes.len())?;
        let modes = self.mode_cutoff();
        let patches = shapes
            .iter()
            .enumerate()
            .map(|(i, shape)| {
                let mut out = ModeCoefficients::zero(modes);
                for (n, a, d) in shape.modes().take_while(|&(n, _, _)| n <= modes) {
                    let m = self.multiplier(i, n);
                    out.sine[n - 1] = m * a;
                    out.cosine[n - 1] = -m * d;
                }
                out
            })
            .collect();
        Ok(ResidualSpectrum { patches })
    }

    /// Preimage of `g`, which must have no mode 0 or mode 1 content above `tolerance`.
    pub fn solve(&self, data: &ResidualSpectrum, tolerance: f64) -> Result<Vec<PatchShape>, LinopError> {
        self.check_patches(data.patches.len())?;
        let modes = self.mode_cutoff();
        data.patches
            .iter()
            .enumerate()
            .map(|(i, g)| {
                if g.mean.abs() > tolerance {
                    return Err(LinopError::RangeViolation { mode: 0, size: g.mean.abs() });
                }
                let (s1, c1) = g.mode(1);
                if s1.hypot(c1) > tolerance {
                    return Err(LinopError::RangeViolation { mode: 1, size: s1.hypot(c1) });
                }
                let mut shape = PatchShape::zero(modes);
                for n in 2..=modes.min(g.modes()) {
                    let (s, c) = g.mode(n);
                    let m = self.multiplier(i, n);
                    shape.set(n, s / m, -c / m)?;
                }
                Ok(shape)
            })
            .collect()
    }

    fn check_patches(&self, found: usize) -> Result<(), LinopError> {
        if found != self.patches() {
            return Err(LinopError::PatchCount {
                expected: self.patches(),
                found,
            });
        }
        Ok(())
    }
}

/// Ensemble at `ε = 0` centred on `config` with unit scales and zero shapes.
fn trivial_ensemble(config: &PointVortexConfiguration, mode_cutoff: usize) -> Result<PatchEnsemble, LinopError> {
    let n = config.len();
    Ok(PatchEnsemble::from_configuration(
        config,
        0.0,
        &vec![1.0; n],
        vec![PatchShape::zero(mode_cutoff); n],
    )?)
}

/// Central difference `(F(f + δh) - F(f - δh)) / 2δ` of the residual spectrum.
pub fn gateaux_fd(
    evaluator: &Evaluator,
    ensemble: &PatchEnsemble,
    direction: &[PatchShape],
    step: f64,
) -> Result<ResidualSpectrum, LinopError> {
    if !(step > 0.0) {
        return Err(LinopError::InvalidStep);
    }
    if direction.len() != ensemble.len() {
        return Err(LinopError::PatchCount {
            expected: ensemble.len(),
            found: direction.len(),
        });
    }
    let cutoff = evaluator.modes();
    let shifted = |sign: f64| -> PatchEnsemble {
        let mut out = ensemble.clone();
        for (patch, h) in out.patches_mut().iter_mut().zip(direction) {
            let base = patch.shape.resized(cutoff).to_flat();
            let dir = h.resized(cutoff).to_flat();
            let flat: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + sign * step * d).collect();
            patch.shape = PatchShape::from_flat(&flat);
        }
        out
    };
    let plus = evaluator.residual(&shifted(1.0))?;
    let minus = evaluator.residual(&shifted(-1.0))?;
    Ok(plus.difference(&minus, 2.0 * step))
}

/// Evaluator for derivatives at `ε = 0` that does not use the symbol σ̂_n.
pub fn quadrature_evaluator(alpha: Alpha, mode_cutoff: usize) -> Result<Evaluator, LinopError> {
    let settings = EvaluatorSettings::new(mode_cutoff).with_route(SelfTermRoute::Quadrature);
    Ok(Evaluator::new(alpha, settings)?)
}

/// Global sign of the linearization, measured on `h = cos 2x` on the first patch.
pub fn calibrate_sign(config: &PointVortexConfiguration) -> Result<f64, LinopError> {
    let evaluator = quadrature_evaluator(config.alpha(), 4)?;
    let ensemble = trivial_ensemble(config, 4)?;
    let mut direction = vec![PatchShape::zero(4); config.len()];
    direction[0] = PatchShape::from_modes(4, &[(2, 1.0, 0.0)])?;
    let image = gateaux_fd(&evaluator, &ensemble, &direction, 1e-4)?;
    let expected = config.circulations()[0] * 2.0 * linearization_symbol(config.alpha(), 2)?;
    let ratio = image.patches[0].mode(2).0 / expected;
    if (ratio.abs() - 1.0).abs() > 1e-3 {
        return Err(LinopError::Calibration(ratio));
    }
    Ok(ratio.signum())
}

fn require_equilibrium(config: &PointVortexConfiguration) -> Result<(), LinopError> {
    let norm = residual_norm(config)?;
    if norm > EQUILIBRIUM_TOLERANCE {
        return Err(LinopError::NotEquilibrium(norm));
    }
    Ok(())
}

/// `∂_ε F(0, 0, λ)` by Richardson-extrapolated central differences over
/// `ε ∈ {±10⁻³, ±5·10⁻⁴}` with zero shapes.
pub fn epsilon_derivative(
    config: &PointVortexConfiguration,
    scales: &[f64],
    mode_cutoff: usize,
) -> Result<ResidualSpectrum, LinopError> {
    let evaluator = Evaluator::new(config.alpha(), EvaluatorSettings::new(mode_cutoff))?;
    let shapes = vec![PatchShape::zero(mode_cutoff); config.len()];
    let at = |eps: f64| -> Result<ResidualSpectrum, LinopError> {
        let ensemble = PatchEnsemble::from_configuration(config, eps, scales, shapes.clone())?;
        Ok(evaluator.residual(&ensemble)?)
    };
    let coarse = at(1e-3)?.difference(&at(-1e-3)?, 2e-3);
    let fine = at(5e-4)?.difference(&at(-5e-4)?, 1e-3);
    Ok(fine.combined(4.0 / 3.0, &coarse, -1.0 / 3.0))
}

/// Closed-form `∂_ε F_i(0, 0, λ)`: only mode 2 is present,
/// `-(α(α+2)C_α/2) b_i Σ_j γ_j |Δw|^{-α-4} [((p²-q²)/2) sin 2x - p q cos 2x]`
/// with `Δw = w_i - w_j = (p, q)`.
pub fn epsilon_derivative_closed_form(
    config: &PointVortexConfiguration,
    scales: &[f64],
    mode_cutoff: usize,
) -> ResidualSpectrum {
    let a = config.alpha().value();
    let k = a * (a + 2.0) * biot_savart_constant(config.alpha()) / 2.0;
    let mut out = ResidualSpectrum::zero(config.len(), mode_cutoff.max(2));
    for (i, wi) in config.centers().iter().enumerate() {
        let (mut s2, mut c2) = (0.0, 0.0);
        for (j, wj) in config.centers().iter().enumerate() {
            if j == i {
                continue;
            }
            let (p, q) = (wi[0] - wj[0], wi[1] - wj[1]);
            let weight = config.circulations()[j] * (p * p + q * q).powf(-0.5 * (a + 4.0));
            s2 += weight * 0.5 * (p * p - q * q);
            c2 -= weight * p * q;
        }
        out.patches[i].sine[1] = -k * scales[i] * s2;
        out.patches[i].cosine[1] = -k * scales[i] * c2;
    }
    out
}

/// First-order shapes `f_i ≈ ε h_i` with `L h = -∂_ε F(0, 0, λ*)`.
pub fn first_order_shapes(
    config: &PointVortexConfiguration,
    scales: &[f64],
    mode_cutoff: usize,
) -> Result<Vec<PatchShape>, LinopError> {
    require_equilibrium(config)?;
    let multiplier = SpectralMultiplier::calibrated(config, mode_cutoff)?;
    let rhs = epsilon_derivative_closed_form(config, scales, mode_cutoff);
    let negated = rhs.combined(-1.0, &rhs, 0.0);
    multiplier.solve(&negated, f64::INFINITY)
}

/// `ε h_i`, the predicted shape of patch `i` at size `ε`.
pub fn first_order_shape(
    config: &PointVortexConfiguration,
    i: usize,
    scales: &[f64],
    epsilon: f64,
    mode_cutoff: usize,
) -> Result<PatchShape, LinopError> {
    let shapes = first_order_shapes(config, scales, mode_cutoff)?;
    shapes
        .get(i)
        .map(|s| s.scaled(epsilon))
        .ok_or(LinopError::PatchCount { expected: config.len(), found: i })
}

/// Measured mode-2 content of `∂_ε F_i` next to the two readings of the
/// squared separation in the printed first-order formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveScalarReport {
    pub patch: usize,
    /// `(s_2, c_2)` of the finite-difference oracle.
    pub measured: (f64, f64),
    /// Same coefficients from the closed form.
    pub closed_form: (f64, f64),
    /// `Σ_j γ_j |Δw|² / |Δw|^{α+4}`.
    pub squared_norm_reading: f64,
    /// `Σ_j γ_j p q / |Δw|^{α+4}`.
    pub component_product_reading: f64,
    /// Largest `|s_n|, |c_n|` of the oracle outside mode 2.
    pub leakage: f64,
}

pub fn effective_scalar_report(
    config: &PointVortexConfiguration,
    scales: &[f64],
    mode_cutoff: usize,
) -> Result<Vec<EffectiveScalarReport>, LinopError> {
    let a = config.alpha().value();
    let measured = epsilon_derivative(config, scales, mode_cutoff)?;
    let closed = epsilon_derivative_closed_form(config, scales, mode_cutoff);
    Ok((0..config.len())
        .map(|i| {
            let wi = config.centers()[i];
            let (mut norm, mut product) = (0.0, 0.0);
            for (j, wj) in config.centers().iter().enumerate() {
                if j != i {
                    let (p, q) = (wi[0] - wj[0], wi[1] - wj[1]);
                    let d2 = p * p + q * q;
                    let weight = config.circulations()[j] * d2.powf(-0.5 * (a + 4.0));
                    norm += weight * d2;
                    product += weight * p * q;
                }
            }
            let m = &measured.patches[i];
            let leakage = (1..=m.modes())
                .filter(|&n| n != 2)
                .map(|n| m.mode(n).0.abs().max(m.mode(n).1.abs()))
                .fold(0.0, f64::max);
            EffectiveScalarReport {
                patch: i,
                measured: m.mode(2),
                closed_form: closed.patches[i].mode(2),
                squared_norm_reading: norm,
                component_product_reading: product,
                leakage,
            }
        })
        .collect())
}
