use serde::{Deserialize, Serialize};

use super::ContourError;
use crate::specialfn::Alpha;

/// Truncated Fourier perturbation `f(x) = Σ_{n=2}^{M} a_n cos(nx) + d_n sin(nx)`.
///
/// Modes 0 and 1 are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchShape {
    /// `a_2, …, a_M`
    cosine: Vec<f64>,
    /// `d_2, …, d_M`
    sine: Vec<f64>,
}

impl PatchShape {
    /// The zero shape with modes `2..=mode_cutoff`.
    pub fn zero(mode_cutoff: usize) -> Self {
        let len = mode_cutoff.saturating_sub(1);
        Self {
            cosine: vec![0.0; len],
            sine: vec![0.0; len],
        }
    }

    /// Build from `(n, a_n, d_n)` triples.
    pub fn from_modes(mode_cutoff: usize, modes: &[(usize, f64, f64)]) -> Result<Self, ContourError> {
        let mut shape = Self::zero(mode_cutoff);
        for &(n, a, d) in modes {
            shape.set(n, a, d)?;
        }
        Ok(shape)
    }

    /// Build from the flat layout `(a_2..a_M, d_2..d_M)`.
    pub fn from_flat(flat: &[f64]) -> Self {
        let half = flat.len() / 2;
        Self {
            cosine: flat[..half].to_vec(),
            sine: flat[half..2 * half].to_vec(),
        }
    }

    /// Flat layout `(a_2..a_M, d_2..d_M)`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.cosine.iter().chain(&self.sine).copied().collect()
    }

    pub fn mode_cutoff(&self) -> usize {
        self.cosine.len() + 1
    }

    pub fn cosine(&self) -> &[f64] {
        &self.cosine
    }

    pub fn sine(&self) -> &[f64] {
        &self.sine
    }

    pub fn set(&mut self, n: usize, a: f64, d: f64) -> Result<(), ContourError> {
        if n < 2 || n > self.mode_cutoff() {
            return Err(ContourError::InvalidMode(n));
        }
        self.cosine[n - 2] = a;
        self.sine[n - 2] = d;
        Ok(())
    }

    /// `(a_n, d_n)`, zero outside the stored range.
    pub fn coefficient(&self, n: usize) -> (f64, f64) {
        if n < 2 || n > self.mode_cutoff() {
            (0.0, 0.0)
        } else {
            (self.cosine[n - 2], self.sine[n - 2])
        }
    }

    /// Same coefficients with a different cutoff (truncating or zero-padding).
    pub fn resized(&self, mode_cutoff: usize) -> Self {
        let mut out = Self::zero(mode_cutoff);
        let keep = out.cosine.len().min(self.cosine.len());
        out.cosine[..keep].copy_from_slice(&self.cosine[..keep]);
        out.sine[..keep].copy_from_slice(&self.sine[..keep]);
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            cosine: self.cosine.iter().map(|v| v * factor).collect(),
            sine: self.sine.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cosine.iter().chain(&self.sine).all(|&v| v == 0.0)
    }

    /// Diagnostic norm `Σ (a_n² + d_n²) n^{2k}`.
    pub fn sobolev_norm(&self, k: u32) -> f64 {
        self.modes()
            .map(|(n, a, d)| (a * a + d * d) * (n as f64).powi(2 * k as i32))
            .sum()
    }

    /// Iterator over `(n, a_n, d_n)`.
    pub fn modes(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.cosine
            .iter()
            .zip(&self.sine)
            .enumerate()
            .map(|(k, (&a, &d))| (k + 2, a, d))
    }

    /// `[f, f′, f″]` at `x`.
    pub fn evaluate(&self, x: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (n, a, d) in self.modes() {
            let nf = n as f64;
            let (s, c) = (nf * x).sin_cos();
            out[0] += a * c + d * s;
            out[1] += nf * (d * c - a * s);
            out[2] -= nf * nf * (a * c + d * s);
        }
        out
    }

    pub fn value(&self, x: f64) -> f64 {
        self.evaluate(x)[0]
    }
}

/// Perturbation amplitude `ε|ε|^α b^{1+α}` of the radial profile.
pub fn amplitude(epsilon: f64, scale: f64, alpha: Alpha) -> f64 {
    let a = alpha.value();
    epsilon * epsilon.abs().powf(a) * scale.powf(1.0 + a)
}

/// `R(x) = 1 + ε|ε|^α b^{1+α} f(x)`.
pub fn radial_profile(shape: &PatchShape, epsilon: f64, scale: f64, alpha: Alpha, x: f64) -> f64 {
    1.0 + amplitude(epsilon, scale, alpha) * shape.value(x)
}

/// `[R, R′, R″]` at `x`.
pub fn radial_derivatives(shape: &PatchShape, epsilon: f64, scale: f64, alpha: Alpha, x: f64) -> [f64; 3] {
    let delta = amplitude(epsilon, scale, alpha);
    let [f, fp, fpp] = shape.evaluate(x);
    [1.0 + delta * f, delta * fp, delta * fpp]
}

/// Signed curvature of the normalized boundary `R(x)(cos x, sin x)`:
/// `(R² + 2R′² - R R″) / (R² + R′²)^{3/2}`.
pub fn curvature(shape: &PatchShape, epsilon: f64, scale: f64, alpha: Alpha, x: f64) -> f64 {
    let [r, rp, rpp] = radial_derivatives(shape, epsilon, scale, alpha, x);
    (r * r + 2.0 * rp * rp - r * rpp) / (r * r + rp * rp).powf(1.5)
}

/// Minimum curvature over `samples` equispaced points.
pub fn min_curvature(shape: &PatchShape, epsilon: f64, scale: f64, alpha: Alpha, samples: usize) -> f64 {
    (0..samples)
        .map(|k| curvature(shape, epsilon, scale, alpha, 2.0 * std::f64::consts::PI * k as f64 / samples as f64))
        .fold(f64::INFINITY, f64::min)
}
