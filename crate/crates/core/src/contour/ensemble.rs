use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::shape::{amplitude, PatchShape};
use super::ContourError;
use crate::pointvortex::{Point, PointVortexConfiguration};
use crate::specialfn::Alpha;

/// Boundary samples per patch for the admissibility checks.
pub const ADMISSIBILITY_SAMPLES: usize = 256;
/// Minimum allowed distance between samples of different boundaries.
pub const MIN_SEPARATION: f64 = 1e-6;

/// One patch `w + ε b O`, where `O` is bounded by `R(x)(cos x, sin x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub shape: PatchShape,
    /// Relative size `b > 0`.
    pub scale: f64,
    pub center: Point,
    /// Circulation weight `γ ≠ 0`.
    pub circulation: f64,
}

/// N patches together with the size parameter ε and the rigid-motion parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchEnsemble {
    alpha: Alpha,
    epsilon: f64,
    patches: Vec<Patch>,
    omega: f64,
    speed: f64,
}

impl PatchEnsemble {
    /// Validated construction: positive radial profiles and disjoint boundaries.
    pub fn new(alpha: Alpha, epsilon: f64, patches: Vec<Patch>, omega: f64, speed: f64) -> Result<Self, ContourError> {
        let ensemble = Self::new_unchecked(alpha, epsilon, patches, omega, speed);
        ensemble.validate()?;
        Ok(ensemble)
    }

    /// Construction without the geometric checks, for perturbed iterates.
    pub fn new_unchecked(alpha: Alpha, epsilon: f64, patches: Vec<Patch>, omega: f64, speed: f64) -> Self {
        Self {
            alpha,
            epsilon,
            patches,
            omega,
            speed,
        }
    }

    /// Patches centered at the vortices of `config` with the given relative sizes and shapes.
    pub fn from_configuration(
        config: &PointVortexConfiguration,
        epsilon: f64,
        scales: &[f64],
        shapes: Vec<PatchShape>,
    ) -> Result<Self, ContourError> {
        if scales.len() != config.len() || shapes.len() != config.len() {
            return Err(ContourError::Invalid("one scale and one shape per vortex".into()));
        }
        let patches = shapes
            .into_iter()
            .zip(scales)
            .zip(config.centers().iter().zip(config.circulations()))
            .map(|((shape, &scale), (&center, &circulation))| Patch {
                shape,
                scale,
                center,
                circulation,
            })
            .collect();
        Self::new(config.alpha(), epsilon, patches, config.omega(), config.speed())
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }
    pub fn patches_mut(&mut self) -> &mut [Patch] {
        &mut self.patches
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn speed(&self) -> f64 {
        self.speed
    }
    pub fn len(&self) -> usize {
        self.patches.len()
    }
    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }

    pub fn with_motion(&self, omega: f64, speed: f64) -> Self {
        Self {
            omega,
            speed,
            ..self.clone()
        }
    }

    pub fn with_shapes(&self, shapes: Vec<PatchShape>) -> Self {
        let mut out = self.clone();
        for (patch, shape) in out.patches.iter_mut().zip(shapes) {
            patch.shape = shape;
        }
        out
    }

    pub fn shapes(&self) -> Vec<PatchShape> {
        self.patches.iter().map(|p| p.shape.clone()).collect()
    }

    /// Largest shape cutoff among the patches.
    pub fn mode_cutoff(&self) -> usize {
        self.patches.iter().map(|p| p.shape.mode_cutoff()).max().unwrap_or(1)
    }

    /// Perturbation amplitude `ε|ε|^α b_i^{1+α}` of patch `i`.
    pub fn amplitude(&self, i: usize) -> f64 {
        amplitude(self.epsilon, self.patches[i].scale, self.alpha)
    }

    /// Boundary point `w_i + ε b_i R_i(x)(cos x, sin x)`.
    pub fn boundary_point(&self, i: usize, x: f64) -> Point {
        let p = &self.patches[i];
        let r = 1.0 + self.amplitude(i) * p.shape.value(x);
        let rho = self.epsilon * p.scale * r;
        [p.center[0] + rho * x.cos(), p.center[1] + rho * x.sin()]
    }

    /// Whether `z` lies inside (or within `MIN_SEPARATION` of) the star-shaped patch `i`.
    fn contains(&self, i: usize, z: Point) -> bool {
        let p = &self.patches[i];
        let (dx, dy) = (z[0] - p.center[0], z[1] - p.center[1]);
        let mut theta = dy.atan2(dx);
        if self.epsilon < 0.0 {
            theta += PI;
        }
        let r = 1.0 + self.amplitude(i) * p.shape.value(theta);
        dx.hypot(dy) < (self.epsilon * p.scale).abs() * r + MIN_SEPARATION
    }

    /// Radial positivity and pairwise disjointness on sampled boundaries.
    pub fn validate(&self) -> Result<(), ContourError> {
        if self.patches.is_empty() {
            return Err(ContourError::Invalid("at least one patch is required".into()));
        }
        if !self.epsilon.is_finite() || !self.omega.is_finite() || !self.speed.is_finite() {
            return Err(ContourError::Invalid("non-finite parameter".into()));
        }
        for (i, p) in self.patches.iter().enumerate() {
            if !(p.scale > 0.0) || !p.scale.is_finite() {
                return Err(ContourError::Invalid(format!("patch {i}: scale must be positive")));
            }
            if p.circulation == 0.0 || !p.circulation.is_finite() {
                return Err(ContourError::Invalid(format!("patch {i}: circulation must be nonzero")));
            }
        }
        let samples: Vec<Vec<Point>> = (0..self.len())
            .map(|i| {
                let delta = self.amplitude(i);
                let shape = &self.patches[i].shape;
                (0..ADMISSIBILITY_SAMPLES)
                    .map(|k| {
                        let x = 2.0 * PI * k as f64 / ADMISSIBILITY_SAMPLES as f64;
                        let r = 1.0 + delta * shape.value(x);
                        if r <= 0.0 {
                            Err(ContourError::NonPositiveRadius { patch: i, x })
                        } else {
                            Ok(self.boundary_point(i, x))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        for i in 0..self.len() {
            for j in 0..i {
                let mut best = f64::INFINITY;
                for p in &samples[i] {
                    for q in &samples[j] {
                        best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
                    }
                }
                let crossing = samples[i].iter().any(|&z| self.contains(j, z))
                    || samples[j].iter().any(|&z| self.contains(i, z));
                if crossing || best <= MIN_SEPARATION {
                    return Err(ContourError::Overlap {
                        first: j,
                        second: i,
                        distance: best,
                    });
                }
            }
        }
        Ok(())
    }
}
