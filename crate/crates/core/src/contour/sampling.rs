use rand::{Rng, RngExt};

use super::{PatchEnsemble, PatchShape};
use crate::pointvortex::{MotionKind, PointVortexConfiguration};
use crate::Alpha;

/// Random shape with `|a_n|, |d_n| ≤ size / n²`.
pub fn random_shape<R: Rng + ?Sized>(rng: &mut R, mode_cutoff: usize, size: f64) -> PatchShape {
    let mut shape = PatchShape::zero(mode_cutoff);
    for n in 2..=mode_cutoff {
        let bound = size / (n * n) as f64;
        let a = bound * rng.random_range(-1.0..1.0);
        let d = bound * rng.random_range(-1.0..1.0);
        shape.set(n, a, d).expect("mode within cutoff");
    }
    shape
}

/// Admissible ensemble of one to three patches with random centers, circulations,
/// sizes `ε ∈ [0.005, 0.05)` and shapes, moving as `motion` prescribes.
/// The equilibrium relations are not imposed.
pub fn random_ensemble<R: Rng + ?Sized>(rng: &mut R, motion: MotionKind, alpha: Alpha, mode_cutoff: usize) -> PatchEnsemble {
    loop {
        let n = rng.random_range(1..4usize);
        let centers = (0..n)
            .map(|k| [2.0 * k as f64 + rng.random_range(-0.3..0.3), rng.random_range(-0.5..0.5)])
            .collect();
        let circulations = (0..n)
            .map(|_| rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let (omega, speed) = match motion {
            MotionKind::Rotating => (rng.random_range(0.1..1.0), 0.0),
            MotionKind::Traveling => (0.0, rng.random_range(0.1..1.0)),
            MotionKind::Stationary => (0.0, 0.0),
        };
        let Ok(config) = PointVortexConfiguration::new(alpha, centers, circulations, omega, speed, motion) else {
            continue;
        };
        let epsilon = rng.random_range(0.005..0.05);
        let scales: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
        let shapes = (0..n).map(|_| random_shape(rng, mode_cutoff, 2.0)).collect();
        if let Ok(ensemble) = PatchEnsemble::from_configuration(&config, epsilon, &scales, shapes) {
            return ensemble;
        }
    }
}
