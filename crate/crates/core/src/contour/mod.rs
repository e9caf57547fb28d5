//! Vortex-patch boundaries, the contour functional `F = F₁ + F₂ + F₃`, and
//! the integral identities it satisfies.
//!
//! A patch `i` occupies `w_i + ε b_i O_i`, where `O_i` is bounded by
//! `R_i(x)(cos x, sin x)` with `R_i = 1 + ε|ε|^α b_i^{1+α} f_i`. The
//! functional vanishes exactly on rigidly rotating (`Ω`), translating (`U`)
//! or stationary configurations.

mod ensemble;
mod functional;
mod identities;
mod sampling;
mod shape;

use thiserror::Error;

use crate::quadrature::QuadratureError;
use crate::specialfn::SpecialFnError;

pub use ensemble::{Patch, PatchEnsemble, ADMISSIBILITY_SAMPLES, MIN_SEPARATION};
pub use functional::{
    functional_residual, kinematic_term, mutual_interaction_term, self_interaction_term, Change, Evaluator,
    EvaluatorSettings, FunctionalValues, ModeCoefficients, ResidualSpectrum, SelfTermRoute, TermValues,
};
pub use identities::{
    rotation_identity, stationary_identity_vector, stream_function, stream_moment_identities, translation_identity,
    StreamMoments,
};
pub use sampling::{random_ensemble, random_shape};
pub use shape::{amplitude, curvature, min_curvature, radial_derivatives, radial_profile, PatchShape};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("invalid ensemble: {0}")]
    Invalid(String),
    #[error("mode {0} is outside the stored range")]
    InvalidMode(usize),
    #[error("radial profile of patch {patch} is not positive at x = {x}")]
    NonPositiveRadius { patch: usize, x: f64 },
    #[error("patches {first} and {second} overlap (sampled distance {distance:e})")]
    Overlap { first: usize, second: usize, distance: f64 },
    #[error("shape cutoff {shape} exceeds evaluator cutoff {evaluator}")]
    ModeCutoff { shape: usize, evaluator: usize },
    #[error("point is within {distance:e} of the boundary of patch {patch}")]
    NearBoundary { patch: usize, distance: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

/// One exported boundary sample: `(patch_index, x, R, z₁, z₂, κ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub patch: usize,
    pub x: f64,
    pub radius: f64,
    pub point: [f64; 2],
    pub curvature: f64,
}

/// `samples` equispaced boundary points per patch, in patch order.
pub fn boundary_samples(ensemble: &PatchEnsemble, samples: usize) -> Vec<BoundarySample> {
    let alpha = ensemble.alpha();
    let eps = ensemble.epsilon();
    let mut out = Vec::with_capacity(samples * ensemble.len());
    for (i, patch) in ensemble.patches().iter().enumerate() {
        for k in 0..samples {
            let x = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            out.push(BoundarySample {
                patch: i,
                x,
                radius: radial_profile(&patch.shape, eps, patch.scale, alpha, x),
                point: ensemble.boundary_point(i, x),
                curvature: curvature(&patch.shape, eps, patch.scale, alpha, x),
            });
        }
    }
    out
}
