use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ensemble::PatchEnsemble;
use super::functional::FunctionalValues;
use super::shape::PatchShape;
use super::ContourError;
use crate::pointvortex::Point;
use crate::quadrature::{PanelSettings, SingularRule};
use crate::specialfn::biot_savart_constant;

/// Trapezoid weight and per-node `(R, R′, cos x, sin x)` of patch `i` on a grid.
fn boundary_data(ensemble: &PatchEnsemble, i: usize, grid: &[f64]) -> Vec<[f64; 4]> {
    let delta = ensemble.amplitude(i);
    let shape = &ensemble.patches()[i].shape;
    grid.iter()
        .map(|&x| {
            let [f, fp, _] = shape.evaluate(x);
            let (s, c) = x.sin_cos();
            [1.0 + delta * f, delta * fp, c, s]
        })
        .collect()
}

fn check_values(ensemble: &PatchEnsemble, values: &FunctionalValues) -> Result<(), ContourError> {
    if values.values.len() != ensemble.len() || values.values.iter().any(|v| v.len() != values.grid.len()) {
        return Err(ContourError::Invalid("residual values do not match the ensemble".into()));
    }
    Ok(())
}

/// `Σ_i (γ_i/π) [∫ F_i R_i (cos x, sin x) dx + (U/2) ∫ R_i² dx · e₂]`.
///
/// Vanishes for every ensemble with `Ω = 0`; the `U` term accounts for the
/// area swept by the translating frame.
pub fn translation_identity(ensemble: &PatchEnsemble, values: &FunctionalValues) -> Result<Point, ContourError> {
    check_values(ensemble, values)?;
    let weight = 2.0 * PI / values.grid.len() as f64;
    let mut acc = [0.0; 2];
    for (i, patch) in ensemble.patches().iter().enumerate() {
        let data = boundary_data(ensemble, i, &values.grid);
        let mut part = [0.0; 2];
        let mut area = 0.0;
        for (&fv, &[r, _, c, s]) in values.values[i].iter().zip(&data) {
            part[0] += fv * r * c;
            part[1] += fv * r * s;
            area += r * r;
        }
        let g = patch.circulation / PI * weight;
        acc[0] += g * part[0];
        acc[1] += g * (part[1] + 0.5 * ensemble.speed() * area);
    }
    Ok(acc)
}

/// `Σ_i (γ_i/π) ∫ F_i (ε b_i R_i²/2 + R_i w_i·(cos x, sin x)) dx`, vanishing when `U = 0`.
pub fn rotation_identity(ensemble: &PatchEnsemble, values: &FunctionalValues) -> Result<f64, ContourError> {
    check_values(ensemble, values)?;
    let weight = 2.0 * PI / values.grid.len() as f64;
    let eps = ensemble.epsilon();
    let mut acc = 0.0;
    for (i, patch) in ensemble.patches().iter().enumerate() {
        let data = boundary_data(ensemble, i, &values.grid);
        let w = patch.center;
        let part: f64 = values.values[i]
            .iter()
            .zip(&data)
            .map(|(&fv, &[r, _, c, s])| fv * (0.5 * eps * patch.scale * r * r + r * (w[0] * c + w[1] * s)))
            .sum();
        acc += patch.circulation / PI * weight * part;
    }
    Ok(acc)
}

/// Both translation components and the rotation pairing, for `Ω = U = 0`.
pub fn stationary_identity_vector(ensemble: &PatchEnsemble, values: &FunctionalValues) -> Result<[f64; 3], ContourError> {
    if ensemble.omega() != 0.0 || ensemble.speed() != 0.0 {
        return Err(ContourError::Invalid("stationary identities need omega = speed = 0".into()));
    }
    let t = translation_identity(ensemble, values)?;
    let r = rotation_identity(ensemble, values)?;
    Ok([t[0], t[1], r])
}

/// Trapezoid nodes used for a smooth boundary integral at distance `distance`
/// from a boundary of radius `rho`.
fn adaptive_nodes(rho: f64, distance: f64) -> usize {
    let wanted = (2.0 * PI * rho * 20.0 / distance).ceil();
    if wanted.is_finite() {
        (wanted as usize).clamp(256, 65536)
    } else {
        65536
    }
}

/// Smallest distance this evaluator accepts, relative to the patch radius.
const NEAR_BOUNDARY: f64 = 1e-3;

/// Contribution of patch `j` to `ψ` at `z`: boundary form of
/// `(γ_j/(ε² b_j²)) (C_α/2π) ∫_{D_j} |z - ξ|^{-α} dξ`.
fn patch_potential(ensemble: &PatchEnsemble, j: usize, z: Point, nodes: usize) -> f64 {
    let a = ensemble.alpha().value();
    let c = biot_savart_constant(ensemble.alpha());
    let patch = &ensemble.patches()[j];
    let eps = ensemble.epsilon();
    let delta = ensemble.amplitude(j);
    let rho = eps * patch.scale;
    let mut acc = 0.0;
    for l in 0..nodes {
        let y = 2.0 * PI * l as f64 / nodes as f64;
        acc += boundary_integrand(patch.center, &patch.shape, delta, rho, a, z, y);
    }
    patch.circulation / rho * c / (2.0 * PI * (2.0 - a)) * (2.0 * PI / nodes as f64) * acc
}

/// `cross(z_j(y) - z, (R e)′(y)) / |z_j(y) - z|^α`.
fn boundary_integrand(
    center: Point,
    shape: &PatchShape,
    delta: f64,
    rho: f64,
    a: f64,
    z: Point,
    y: f64,
) -> f64 {
    let [f, fp, _] = shape.evaluate(y);
    let (r, rp) = (1.0 + delta * f, delta * fp);
    let (s, c) = y.sin_cos();
    let d = [center[0] + rho * r * c - z[0], center[1] + rho * r * s - z[1]];
    let tangent = [rp * c - r * s, rp * s + r * c];
    let cross = d[0] * tangent[1] - d[1] * tangent[0];
    cross * (d[0] * d[0] + d[1] * d[1]).powf(-0.5 * a)
}

/// Stream function `ψ_ε(z)` of the ensemble, `Σ_j (γ_j C_α/2)|z - w_j|^{-α}` at `ε = 0`.
///
/// Points closer than `10⁻³ ε b_j` to a boundary are rejected.
pub fn stream_function(ensemble: &PatchEnsemble, z: Point) -> Result<f64, ContourError> {
    let a = ensemble.alpha().value();
    let c = biot_savart_constant(ensemble.alpha());
    let eps = ensemble.epsilon();
    let mut acc = 0.0;
    for (j, patch) in ensemble.patches().iter().enumerate() {
        if eps == 0.0 {
            let d2 = (z[0] - patch.center[0]).powi(2) + (z[1] - patch.center[1]).powi(2);
            if d2 == 0.0 {
                return Err(ContourError::NearBoundary { patch: j, distance: 0.0 });
            }
            acc += 0.5 * patch.circulation * c * d2.powf(-0.5 * a);
            continue;
        }
        let rho = eps.abs() * patch.scale;
        let distance = (0..1024)
            .map(|k| {
                let p = ensemble.boundary_point(j, 2.0 * PI * k as f64 / 1024.0);
                (p[0] - z[0]).hypot(p[1] - z[1])
            })
            .fold(f64::INFINITY, f64::min);
        if distance < NEAR_BOUNDARY * rho {
            return Err(ContourError::NearBoundary { patch: j, distance });
        }
        acc += patch_potential(ensemble, j, z, adaptive_nodes(rho, distance));
    }
    Ok(acc)
}

/// The two stream-moment sums, multiplied by `ε` so they stay `O(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamMoments {
    /// `Σ_i (γ_i/b_i) ∫ ψ(z_i) [w_i·(R_i e)′ + ε b_i R_i R_i′] dx`
    pub scalar: f64,
    /// `Σ_i (γ_i/b_i) ∫ ψ(z_i) (R_i e)′ dx`
    pub vector: Point,
}

/// Singular rule with per-node harmonic increments for `ψ` on a patch's own boundary.
struct OwnBoundaryRule {
    offsets: Vec<f64>,
    weights: Vec<f64>,
    /// `cos(nt) - 1` for `n = 2..=M`, row-major by node.
    vers: Vec<f64>,
    /// `sin(nt)` for `n = 2..=M`.
    sines: Vec<f64>,
    stride: usize,
}

impl OwnBoundaryRule {
    fn new(alpha: f64, modes: usize) -> Result<Self, ContourError> {
        let rule = SingularRule::new(alpha, PanelSettings::for_modes(20, 12, modes))?;
        let stride = modes.saturating_sub(1);
        let mut vers = Vec::with_capacity(rule.len() * stride);
        let mut sines = Vec::with_capacity(rule.len() * stride);
        for &t in rule.offsets() {
            for n in 2..=modes {
                let nt = n as f64 * t;
                vers.push(-2.0 * (0.5 * nt).sin().powi(2));
                sines.push(nt.sin());
            }
        }
        Ok(Self {
            offsets: rule.offsets().to_vec(),
            weights: rule.weights().to_vec(),
            vers,
            sines,
            stride,
        })
    }

    /// `∫ cross(z(x+t) - z(x), (R e)′(x+t)) / |z(x+t) - z(x)|^α dt` for a
    /// boundary `z = w + ρ R e`, with increments formed relative to `z(x)`.
    fn integrate(&self, shape: &PatchShape, delta: f64, rho: f64, alpha: f64, x: f64) -> f64 {
        let len = shape.cosine().len();
        let mut rot_a = Vec::with_capacity(len);
        let mut rot_b = Vec::with_capacity(len);
        let (mut f, mut fp) = (0.0, 0.0);
        for (k, (&a, &d)) in shape.cosine().iter().zip(shape.sine()).enumerate() {
            let n = (k + 2) as f64;
            let (sn, cn) = (n * x).sin_cos();
            let ra = a * cn + d * sn;
            let rb = d * cn - a * sn;
            f += ra;
            fp += n * rb;
            rot_a.push(ra);
            rot_b.push(rb);
        }
        let r = 1.0 + delta * f;
        let mut acc = 0.0;
        for (k, (&t, &w)) in self.offsets.iter().zip(&self.weights).enumerate() {
            let hv = &self.vers[k * self.stride..k * self.stride + len];
            let hs = &self.sines[k * self.stride..k * self.stride + len];
            let (mut inc, mut inc_slope) = (0.0, 0.0);
            for idx in 0..len {
                let n = (idx + 2) as f64;
                inc += rot_a[idx] * hv[idx] + rot_b[idx] * hs[idx];
                inc_slope += n * (rot_b[idx] * hv[idx] - rot_a[idx] * hs[idx]);
            }
            let ry = r + delta * inc;
            let rpy = delta * (fp + inc_slope);
            let (sy, cy) = (x + t).sin_cos();
            let (sm, cm) = (x + 0.5 * t).sin_cos();
            let chord = 2.0 * (0.5 * t).sin();
            let d = [
                rho * (delta * inc * cy - r * chord * sm),
                rho * (delta * inc * sy + r * chord * cm),
            ];
            let tangent = [rpy * cy - ry * sy, rpy * sy + ry * cy];
            let cross = d[0] * tangent[1] - d[1] * tangent[0];
            acc += w * cross * (d[0] * d[0] + d[1] * d[1]).powf(-0.5 * alpha);
        }
        acc
    }
}

/// Stream-moment identities on the boundaries; both vanish for every ensemble.
///
/// `ψ` on its own boundary uses the singular rule, other boundaries the
/// trapezoid rule. At `ε = 0` the limits are zero.
pub fn stream_moment_identities(ensemble: &PatchEnsemble, nodes: usize) -> Result<StreamMoments, ContourError> {
    let eps = ensemble.epsilon();
    if eps == 0.0 {
        return Ok(StreamMoments {
            scalar: 0.0,
            vector: [0.0; 2],
        });
    }
    let a = ensemble.alpha().value();
    let c = biot_savart_constant(ensemble.alpha());
    let modes = ensemble.mode_cutoff();
    let rule = OwnBoundaryRule::new(a, modes)?;
    let nodes = nodes.max(4 * modes).max(64);
    let weight = 2.0 * PI / nodes as f64;
    let mut scalar = 0.0;
    let mut vector = [0.0; 2];
    for (i, patch) in ensemble.patches().iter().enumerate() {
        let delta = ensemble.amplitude(i);
        let rho = eps * patch.scale;
        for m in 0..nodes {
            let x = 2.0 * PI * m as f64 / nodes as f64;
            let z = ensemble.boundary_point(i, x);
            let mut psi = 0.0;
            for (j, other) in ensemble.patches().iter().enumerate() {
                if j == i {
                    let own = rule.integrate(&patch.shape, delta, rho, a, x);
                    psi += patch.circulation / rho * c / (2.0 * PI * (2.0 - a)) * own;
                } else {
                    let gap = (other.center[0] - z[0]).hypot(other.center[1] - z[1]) - eps.abs() * other.scale * 2.0;
                    let n = adaptive_nodes(eps.abs() * other.scale, gap.max(1e-12));
                    psi += patch_potential(ensemble, j, z, n);
                }
            }
            let [f, fp, _] = patch.shape.evaluate(x);
            let (r, rp) = (1.0 + delta * f, delta * fp);
            let (s, cx) = x.sin_cos();
            let tangent = [rp * cx - r * s, rp * s + r * cx];
            let g = patch.circulation / patch.scale * weight * psi;
            vector[0] += g * tangent[0];
            vector[1] += g * tangent[1];
            scalar += g * (patch.center[0] * tangent[0] + patch.center[1] * tangent[1] + eps * patch.scale * r * rp);
        }
    }
    Ok(StreamMoments { scalar, vector })
}
