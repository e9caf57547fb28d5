use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::PatchEnsemble;
use super::shape::PatchShape;
use super::ContourError;
use crate::quadrature::{PanelSettings, SingularRule};
use crate::specialfn::{biot_savart_constant, linearization_symbol, point_vortex_constant, Alpha};

/// How the self-interaction term is evaluated at exactly `ε = 0`, where its
/// `1/(ε|ε|^α)` prefactor is removable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfTermRoute {
    /// Mode-wise action `γ n σ̂_n (a_n sin nx - d_n cos nx)`.
    Spectral,
    /// Singular quadrature of the linearized kernel (independent of σ̂_n).
    Quadrature,
}

/// Discretization of the contour functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluatorSettings {
    /// Highest Fourier mode `M`; the collocation grid has `4M` nodes.
    pub mode_cutoff: usize,
    /// Panels of the self-interaction rule.
    pub panels: PanelSettings,
    /// Trapezoid nodes for the mutual-interaction integrals.
    pub mutual_nodes: usize,
    pub self_route: SelfTermRoute,
}

impl EvaluatorSettings {
    /// 20 halvings per side, 12-point panels, `max(4M, 64)` mutual nodes.
    pub fn new(mode_cutoff: usize) -> Self {
        let mode_cutoff = mode_cutoff.max(2);
        Self {
            mode_cutoff,
            panels: PanelSettings::for_modes(20, 12, mode_cutoff),
            mutual_nodes: (4 * mode_cutoff).max(64),
            self_route: SelfTermRoute::Spectral,
        }
    }

    pub fn with_route(self, self_route: SelfTermRoute) -> Self {
        Self { self_route, ..self }
    }

    /// Doubled panel counts and mutual nodes.
    pub fn refined(self) -> Self {
        Self {
            panels: self.panels.refined(),
            mutual_nodes: 2 * self.mutual_nodes,
            ..self
        }
    }
}

/// Fourier coefficients of one residual component: `F ≈ mean + Σ s_n sin nx + c_n cos nx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    /// Mode 0, a diagnostic that should vanish.
    pub mean: f64,
    /// `s_1, …, s_M`
    pub sine: Vec<f64>,
    /// `c_1, …, c_M`
    pub cosine: Vec<f64>,
}

impl ModeCoefficients {
    pub fn zero(modes: usize) -> Self {
        Self {
            mean: 0.0,
            sine: vec![0.0; modes],
            cosine: vec![0.0; modes],
        }
    }

    /// `(s_n, c_n)` for `n ≥ 1`.
    pub fn mode(&self, n: usize) -> (f64, f64) {
        (self.sine[n - 1], self.cosine[n - 1])
    }

    pub fn modes(&self) -> usize {
        self.sine.len()
    }
}

/// Per-patch Fourier coefficients of the evaluated functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSpectrum {
    pub patches: Vec<ModeCoefficients>,
}

impl ResidualSpectrum {
    pub fn zero(patches: usize, modes: usize) -> Self {
        Self {
            patches: vec![ModeCoefficients::zero(modes); patches],
        }
    }

    /// Largest `|s_n|, |c_n|` over all patches and modes `n ≥ 1`.
    pub fn sup_norm(&self) -> f64 {
        self.flatten().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|mean|` over patches.
    pub fn mean_norm(&self) -> f64 {
        self.patches.iter().fold(0.0, |m, p| m.max(p.mean.abs()))
    }

    /// `(s_1..s_M, c_1..c_M)` per patch, concatenated.
    pub fn flatten(&self) -> Vec<f64> {
        self.patches
            .iter()
            .flat_map(|p| p.sine.iter().chain(&p.cosine).copied())
            .collect()
    }

    /// Element-wise `(self - other) / scale`.
    pub fn difference(&self, other: &Self, scale: f64) -> Self {
        self.combined(1.0 / scale, other, -1.0 / scale)
    }

    /// Element-wise `a·self + b·other`.
    pub fn combined(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(u, v)| a * u + b * v).collect() };
        Self {
            patches: self
                .patches
                .iter()
                .zip(&other.patches)
                .map(|(p, q)| ModeCoefficients {
                    mean: a * p.mean + b * q.mean,
                    sine: mix(&p.sine, &q.sine),
                    cosine: mix(&p.cosine, &q.cosine),
                })
                .collect(),
        }
    }
}

/// Values of `F_i` on the collocation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalValues {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// The three contributions `F_{i,1}`, `F_{i,2}` and `F_{i,3} = Σ_j F_{ij}` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TermValues {
    pub kinematic: Vec<Vec<f64>>,
    pub selfs: Vec<Vec<f64>>,
    /// `mutual[i][j]`, empty for `i == j`.
    pub mutual: Vec<Vec<Vec<f64>>>,
    circulations: Vec<f64>,
}

impl TermValues {
    pub fn total(&self, grid: &[f64]) -> FunctionalValues {
        let values = (0..self.kinematic.len())
            .map(|i| {
                (0..grid.len())
                    .map(|m| {
                        let mutual: f64 = self.mutual[i].iter().filter(|v| !v.is_empty()).map(|v| v[m]).sum();
                        self.kinematic[i][m] + self.selfs[i][m] + mutual
                    })
                    .collect()
            })
            .collect();
        FunctionalValues {
            grid: grid.to_vec(),
            values,
        }
    }
}

/// Which ensemble data changed relative to a cached [`TermValues`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Change {
    Shape(usize),
    Center(usize),
    Circulation(usize),
    Motion,
}

/// `cos(nx), sin(nx)` for `n = 1..=modes`.
fn harmonics(x: f64, modes: usize) -> (Vec<f64>, Vec<f64>) {
    (1..=modes).map(|n| (n as f64 * x).cos()).zip((1..=modes).map(|n| (n as f64 * x).sin())).unzip()
}

/// Shape data rotated to a base point `x`: `f(x + t) = Σ A_n cos nt + B_n sin nt`.
struct Rotated {
    a: Vec<f64>,
    b: Vec<f64>,
    na: Vec<f64>,
    nb: Vec<f64>,
    value: f64,
    slope: f64,
}

impl Rotated {
    fn new(shape: &PatchShape, cos_nx: &[f64], sin_nx: &[f64]) -> Self {
        let len = shape.cosine().len();
        let mut r = Rotated {
            a: Vec::with_capacity(len),
            b: Vec::with_capacity(len),
            na: Vec::with_capacity(len),
            nb: Vec::with_capacity(len),
            value: 0.0,
            slope: 0.0,
        };
        for (k, (&an, &dn)) in shape.cosine().iter().zip(shape.sine()).enumerate() {
            let n = (k + 2) as f64;
            let (c, s) = (cos_nx[k + 1], sin_nx[k + 1]);
            let a = an * c + dn * s;
            let b = dn * c - an * s;
            r.value += a;
            r.slope += n * b;
            r.a.push(a);
            r.b.push(b);
            r.na.push(n * a);
            r.nb.push(n * b);
        }
        r
    }
}

/// Radial data of one patch on the mutual-interaction grid.
struct PatchSamples {
    r: Vec<f64>,
    rp: Vec<f64>,
}

/// Evaluation machinery for `F = F₁ + F₂ + F₃` at fixed α and mode cutoff.
#[derive(Debug, Clone)]
pub struct Evaluator {
    alpha: Alpha,
    settings: EvaluatorSettings,
    c_alpha: f64,
    c_hat: f64,
    grid: Vec<f64>,
    grid_cos: Vec<f64>,
    grid_sin: Vec<f64>,
    node_weight: Vec<f64>,
    node_sin: Vec<f64>,
    node_cos: Vec<f64>,
    node_inv_pow: Vec<f64>,
    node_area: Vec<f64>,
    /// `cos(nt) - 1`, evaluated as `-2 sin²(nt/2)` to keep relative accuracy at small `t`.
    node_harm_vers: Vec<f64>,
    node_harm_sin: Vec<f64>,
    mutual_grid: Vec<f64>,
    mutual_harm_cos: Vec<f64>,
    mutual_harm_sin: Vec<f64>,
    symbols: Vec<f64>,
}

impl Evaluator {
    pub fn new(alpha: Alpha, settings: EvaluatorSettings) -> Result<Self, ContourError> {
        let modes = settings.mode_cutoff;
        if modes < 2 {
            return Err(ContourError::Invalid("mode cutoff must be at least 2".into()));
        }
        let a = alpha.value();
        let rule = SingularRule::new(a, settings.panels)?;
        let nodes = 4 * modes;
        let grid: Vec<f64> = (0..nodes).map(|m| 2.0 * PI * m as f64 / nodes as f64).collect();
        let mut grid_cos = Vec::with_capacity(nodes * modes);
        let mut grid_sin = Vec::with_capacity(nodes * modes);
        for &x in &grid {
            let (c, s) = harmonics(x, modes);
            grid_cos.extend(c);
            grid_sin.extend(s);
        }
        let stride = modes - 1;
        let mut node_harm_vers = Vec::with_capacity(rule.len() * stride);
        let mut node_harm_sin = Vec::with_capacity(rule.len() * stride);
        for &t in rule.offsets() {
            for n in 2..=modes {
                let s = (n as f64 * t).sin();
                node_harm_vers.push(-2.0 * (0.5 * n as f64 * t).sin().powi(2));
                node_harm_sin.push(s);
            }
        }
        let node_area: Vec<f64> = rule.offsets().iter().map(|&t| 4.0 * (0.5 * t).sin().powi(2)).collect();
        let mutual_nodes = settings.mutual_nodes.max(4);
        let mutual_grid: Vec<f64> = (0..mutual_nodes).map(|l| 2.0 * PI * l as f64 / mutual_nodes as f64).collect();
        let mut mutual_harm_cos = Vec::with_capacity(mutual_nodes * modes);
        let mut mutual_harm_sin = Vec::with_capacity(mutual_nodes * modes);
        for &y in &mutual_grid {
            let (c, s) = harmonics(y, modes);
            mutual_harm_cos.extend(c);
            mutual_harm_sin.extend(s);
        }
        let symbols = (2..=modes)
            .map(|n| linearization_symbol(alpha, n as u32))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            alpha,
            settings,
            c_alpha: biot_savart_constant(alpha),
            c_hat: point_vortex_constant(alpha),
            node_weight: rule.weights().to_vec(),
            node_sin: rule.offsets().iter().map(|t| t.sin()).collect(),
            node_cos: rule.offsets().iter().map(|t| t.cos()).collect(),
            node_inv_pow: node_area.iter().map(|&ar| ar.powf(-0.5 * a)).collect(),
            node_area,
            node_harm_vers,
            node_harm_sin,
            grid,
            grid_cos,
            grid_sin,
            mutual_grid,
            mutual_harm_cos,
            mutual_harm_sin,
            symbols,
        })
    }

    /// Default discretization for the ensemble's own mode cutoff.
    pub fn for_ensemble(ensemble: &PatchEnsemble) -> Result<Self, ContourError> {
        Self::new(ensemble.alpha(), EvaluatorSettings::new(ensemble.mode_cutoff()))
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }
    pub fn settings(&self) -> &EvaluatorSettings {
        &self.settings
    }
    pub fn modes(&self) -> usize {
        self.settings.mode_cutoff
    }
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Same discretization with a different self-term route.
    pub fn with_route(&self, route: SelfTermRoute) -> Self {
        let mut out = self.clone();
        out.settings.self_route = route;
        out
    }

    fn check(&self, ensemble: &PatchEnsemble) -> Result<(), ContourError> {
        if ensemble.alpha() != self.alpha {
            return Err(ContourError::Invalid("ensemble alpha differs from evaluator alpha".into()));
        }
        let cutoff = ensemble.mode_cutoff();
        if cutoff > self.modes() {
            return Err(ContourError::ModeCutoff {
                shape: cutoff,
                evaluator: self.modes(),
            });
        }
        Ok(())
    }

    fn grid_harmonics(&self, m: usize) -> (&[f64], &[f64]) {
        let modes = self.modes();
        (&self.grid_cos[m * modes..(m + 1) * modes], &self.grid_sin[m * modes..(m + 1) * modes])
    }

    /// `F_{i,1}`: closed form.
    fn kinematic(&self, ensemble: &PatchEnsemble, i: usize, x: f64, rot: &Rotated) -> f64 {
        let p = &ensemble.patches()[i];
        let delta = ensemble.amplitude(i);
        let r = 1.0 + delta * rot.value;
        let rp = delta * rot.slope;
        let (s, c) = x.sin_cos();
        let tangent = [rp * c - r * s, rp * s + r * c];
        let omega_part = p.center[0] * tangent[0] + p.center[1] * tangent[1] + ensemble.epsilon() * p.scale * r * rp;
        ensemble.omega() * omega_part + ensemble.speed() * tangent[0]
    }

    /// `F_{i,2}` at the base point encoded by `rot`.
    fn self_term(&self, gamma: f64, delta: f64, x_harm: (&[f64], &[f64]), rot: &Rotated) -> Result<f64, ContourError> {
        if delta == 0.0 && self.settings.self_route == SelfTermRoute::Spectral {
            let (cos_nx, sin_nx) = x_harm;
            let mut acc = 0.0;
            for (k, (&a, &b)) in rot.a.iter().zip(&rot.b).enumerate() {
                let _ = (a, b);
                let n = k + 2;
                let (an, dn) = (
                    a * cos_nx[n - 1] - b * sin_nx[n - 1],
                    a * sin_nx[n - 1] + b * cos_nx[n - 1],
                );
                acc += n as f64 * self.symbols[k] * (an * sin_nx[n - 1] - dn * cos_nx[n - 1]);
            }
            return Ok(gamma * acc);
        }
        let half_alpha = 0.5 * self.alpha.value();
        let len = rot.a.len();
        let stride = self.modes() - 1;
        let (fx, fpx) = (rot.value, rot.slope);
        let mut acc = 0.0;
        for k in 0..self.node_weight.len() {
            let hv = &self.node_harm_vers[k * stride..k * stride + len];
            let hs = &self.node_harm_sin[k * stride..k * stride + len];
            // Increments f(x+t) - f(x) and f'(x+t) - f'(x), formed without cancellation.
            let mut inc = 0.0;
            let mut inc_slope = 0.0;
            for idx in 0..len {
                inc += rot.a[idx] * hv[idx] + rot.b[idx] * hs[idx];
                inc_slope += rot.nb[idx] * hv[idx] - rot.na[idx] * hs[idx];
            }
            let fy = fx + inc;
            let fpy = fpx + inc_slope;
            let sin_xy = -self.node_sin[k];
            let cos_xy = self.node_cos[k];
            let numer = (fx + fy + delta * (fx * fy + fpx * fpy)) * sin_xy
                + (inc_slope + delta * (fx * inc_slope - fpx * inc)) * cos_xy;
            let spread = fx + fy + delta * fx * fy + delta * inc * inc / self.node_area[k];
            let excess = if delta == 0.0 {
                half_alpha * spread
            } else {
                let dg = delta * spread;
                if dg <= -1.0 {
                    return Err(ContourError::Invalid("self-interaction denominator not positive".into()));
                }
                (half_alpha * dg.ln_1p()).exp_m1() / delta
            };
            let scale = 1.0 + delta * excess;
            acc += self.node_weight[k] * (numer - sin_xy * excess) * self.node_inv_pow[k] / scale;
        }
        Ok(gamma * self.c_alpha / (2.0 * PI) * acc)
    }

    fn samples(&self, ensemble: &PatchEnsemble, j: usize) -> PatchSamples {
        let delta = ensemble.amplitude(j);
        let shape = &ensemble.patches()[j].shape;
        let modes = self.modes();
        let len = shape.cosine().len();
        let mut r = Vec::with_capacity(self.mutual_grid.len());
        let mut rp = Vec::with_capacity(self.mutual_grid.len());
        for l in 0..self.mutual_grid.len() {
            let hc = &self.mutual_harm_cos[l * modes..(l + 1) * modes];
            let hs = &self.mutual_harm_sin[l * modes..(l + 1) * modes];
            let mut f = 0.0;
            let mut fp = 0.0;
            for k in 0..len {
                let n = (k + 2) as f64;
                let (a, d) = (shape.cosine()[k], shape.sine()[k]);
                f += a * hc[k + 1] + d * hs[k + 1];
                fp += n * (d * hc[k + 1] - a * hs[k + 1]);
            }
            r.push(1.0 + delta * f);
            rp.push(delta * fp);
        }
        PatchSamples { r, rp }
    }

    /// `F_{ij}`, the contribution of patch `j` to `F_{i,3}` at `x`.
    fn mutual(
        &self,
        ensemble: &PatchEnsemble,
        i: usize,
        j: usize,
        x: f64,
        rot: &Rotated,
        samples_j: &PatchSamples,
    ) -> Result<f64, ContourError> {
        let a = self.alpha.value();
        let pi_ = &ensemble.patches()[i];
        let pj = &ensemble.patches()[j];
        let dw = [pi_.center[0] - pj.center[0], pi_.center[1] - pj.center[1]];
        let dist2 = dw[0] * dw[0] + dw[1] * dw[1];
        if dist2 == 0.0 {
            return Err(ContourError::Overlap {
                first: i.min(j),
                second: i.max(j),
                distance: 0.0,
            });
        }
        let (sx, cx) = x.sin_cos();
        let eps = ensemble.epsilon();
        if eps == 0.0 {
            let pairing = -dw[0] * sx + dw[1] * cx;
            return Ok(-0.5 * self.c_hat * pj.circulation * pairing * dist2.powf(-0.5 * (a + 2.0)));
        }
        let delta_i = ensemble.amplitude(i);
        let ri = 1.0 + delta_i * rot.value;
        let rpi = delta_i * rot.slope;
        let zi = [pi_.center[0] + eps * pi_.scale * ri * cx, pi_.center[1] + eps * pi_.scale * ri * sx];
        let base = dist2.powf(-0.5 * a);
        let mut acc = 0.0;
        for (l, &y) in self.mutual_grid.iter().enumerate() {
            let modes = self.modes();
            let (cy, sy) = (self.mutual_harm_cos[l * modes], self.mutual_harm_sin[l * modes]);
            let _ = y;
            let rj = samples_j.r[l];
            let rpj = samples_j.rp[l];
            let zj = [pj.center[0] + eps * pj.scale * rj * cy, pj.center[1] + eps * pj.scale * rj * sy];
            let d2 = (zi[0] - zj[0]).powi(2) + (zi[1] - zj[1]).powi(2);
            if d2 == 0.0 {
                return Err(ContourError::Overlap {
                    first: i.min(j),
                    second: i.max(j),
                    distance: 0.0,
                });
            }
            let s = sx * cy - cx * sy;
            let c = cx * cy + sx * sy;
            let numer = (ri * rj + rpi * rpj) * s + (ri * rpj - rpi * rj) * c;
            acc += numer * d2.powf(-0.5 * a) - s * base;
        }
        let weight = 2.0 * PI / self.mutual_grid.len() as f64;
        Ok(self.c_alpha / (2.0 * PI * eps) * pj.circulation / pj.scale * weight * acc)
    }

    /// All term values on the grid.
    pub fn terms(&self, ensemble: &PatchEnsemble) -> Result<TermValues, ContourError> {
        self.check(ensemble)?;
        let n = ensemble.len();
        self.compute(ensemble, None, &vec![true; n], &vec![SelfUpdate::Recompute; n], &vec![vec![true; n]; n])
    }

    /// Term values after `changes`, recomputing only what depends on them.
    pub fn update_terms(&self, ensemble: &PatchEnsemble, base: &TermValues, changes: &[Change]) -> Result<TermValues, ContourError> {
        self.check(ensemble)?;
        let n = ensemble.len();
        let mut kin = vec![false; n];
        let mut selfs = vec![SelfUpdate::Keep; n];
        let mut mutual = vec![vec![false; n]; n];
        for &change in changes {
            match change {
                Change::Shape(p) | Change::Center(p) => {
                    kin[p] = true;
                    if matches!(change, Change::Shape(_)) {
                        selfs[p] = SelfUpdate::Recompute;
                    }
                    for q in 0..n {
                        mutual[p][q] = true;
                        mutual[q][p] = true;
                    }
                }
                Change::Circulation(p) => {
                    if selfs[p] == SelfUpdate::Keep {
                        selfs[p] = SelfUpdate::Rescale;
                    }
                    for q in 0..n {
                        mutual[q][p] = true;
                    }
                }
                Change::Motion => kin.iter_mut().for_each(|k| *k = true),
            }
        }
        self.compute(ensemble, Some(base), &kin, &selfs, &mutual)
    }

    fn compute(
        &self,
        ensemble: &PatchEnsemble,
        base: Option<&TermValues>,
        kin: &[bool],
        selfs: &[SelfUpdate],
        mutual: &[Vec<bool>],
    ) -> Result<TermValues, ContourError> {
        let n = ensemble.len();
        let nodes = self.grid.len();
        let samples: Vec<Option<PatchSamples>> = (0..n)
            .map(|j| (0..n).any(|i| i != j && mutual[i][j]).then(|| self.samples(ensemble, j)))
            .collect();
        let mut out = match base {
            Some(b) => b.clone(),
            None => TermValues {
                kinematic: vec![vec![0.0; nodes]; n],
                selfs: vec![vec![0.0; nodes]; n],
                mutual: (0..n)
                    .map(|i| (0..n).map(|j| if i == j { Vec::new() } else { vec![0.0; nodes] }).collect())
                    .collect(),
                circulations: vec![0.0; n],
            },
        };
        for i in 0..n {
            let patch = &ensemble.patches()[i];
            let needs_rot = kin[i] || selfs[i] == SelfUpdate::Recompute || (0..n).any(|j| j != i && mutual[i][j]);
            if !needs_rot {
                if selfs[i] == SelfUpdate::Rescale {
                    let ratio = patch.circulation / out.circulations[i];
                    out.selfs[i].iter_mut().for_each(|v| *v *= ratio);
                    out.circulations[i] = patch.circulation;
                }
                continue;
            }
            let delta = ensemble.amplitude(i);
            let rows: Vec<Result<(f64, Option<f64>, Vec<(usize, f64)>), ContourError>> = (0..nodes)
                .into_par_iter()
                .map(|m| {
                    let x = self.grid[m];
                    let harm = self.grid_harmonics(m);
                    let rot = Rotated::new(&patch.shape, harm.0, harm.1);
                    let k = if kin[i] { self.kinematic(ensemble, i, x, &rot) } else { 0.0 };
                    let s = if selfs[i] == SelfUpdate::Recompute {
                        Some(self.self_term(patch.circulation, delta, harm, &rot)?)
                    } else {
                        None
                    };
                    let mut mu = Vec::new();
                    for j in 0..n {
                        if j != i && mutual[i][j] {
                            mu.push((j, self.mutual(ensemble, i, j, x, &rot, samples[j].as_ref().expect("sampled"))?));
                        }
                    }
                    Ok((k, s, mu))
                })
                .collect();
            for (m, row) in rows.into_iter().enumerate() {
                let (k, s, mu) = row?;
                if kin[i] {
                    out.kinematic[i][m] = k;
                }
                if let Some(s) = s {
                    out.selfs[i][m] = s;
                }
                for (j, v) in mu {
                    out.mutual[i][j][m] = v;
                }
            }
            match selfs[i] {
                SelfUpdate::Recompute => out.circulations[i] = patch.circulation,
                SelfUpdate::Rescale => {
                    let ratio = patch.circulation / out.circulations[i];
                    out.selfs[i].iter_mut().for_each(|v| *v *= ratio);
                    out.circulations[i] = patch.circulation;
                }
                SelfUpdate::Keep => {}
            }
        }
        Ok(out)
    }

    /// `F_i` on the grid.
    pub fn values(&self, ensemble: &PatchEnsemble) -> Result<FunctionalValues, ContourError> {
        Ok(self.terms(ensemble)?.total(&self.grid))
    }

    /// Discrete Fourier projection onto modes `0..=M`.
    pub fn project(&self, values: &FunctionalValues) -> ResidualSpectrum {
        let modes = self.modes();
        let nodes = self.grid.len() as f64;
        let patches = values
            .values
            .iter()
            .map(|v| {
                let mut coeffs = ModeCoefficients::zero(modes);
                coeffs.mean = v.iter().sum::<f64>() / nodes;
                for (m, &fv) in v.iter().enumerate() {
                    let (c, s) = self.grid_harmonics(m);
                    for k in 0..modes {
                        coeffs.sine[k] += fv * s[k];
                        coeffs.cosine[k] += fv * c[k];
                    }
                }
                for k in 0..modes {
                    coeffs.sine[k] *= 2.0 / nodes;
                    coeffs.cosine[k] *= 2.0 / nodes;
                }
                coeffs
            })
            .collect();
        ResidualSpectrum { patches }
    }

    /// Residual spectrum of the ensemble.
    pub fn residual(&self, ensemble: &PatchEnsemble) -> Result<ResidualSpectrum, ContourError> {
        Ok(self.project(&self.values(ensemble)?))
    }

    fn rotated_at(&self, ensemble: &PatchEnsemble, i: usize, x: f64) -> (Vec<f64>, Vec<f64>, Rotated) {
        let (c, s) = harmonics(x, self.modes());
        let rot = Rotated::new(&ensemble.patches()[i].shape, &c, &s);
        (c, s, rot)
    }

    /// `F_{i,1}(x)`.
    pub fn kinematic_at(&self, ensemble: &PatchEnsemble, i: usize, x: f64) -> Result<f64, ContourError> {
        self.check(ensemble)?;
        let (_, _, rot) = self.rotated_at(ensemble, i, x);
        Ok(self.kinematic(ensemble, i, x, &rot))
    }

    /// `F_{i,2}(x)`.
    pub fn self_at(&self, ensemble: &PatchEnsemble, i: usize, x: f64) -> Result<f64, ContourError> {
        self.check(ensemble)?;
        let (c, s, rot) = self.rotated_at(ensemble, i, x);
        let patch = &ensemble.patches()[i];
        self.self_term(patch.circulation, ensemble.amplitude(i), (&c, &s), &rot)
    }

    /// `F_{i,3}(x) = Σ_{j≠i} F_{ij}(x)`.
    pub fn mutual_at(&self, ensemble: &PatchEnsemble, i: usize, x: f64) -> Result<f64, ContourError> {
        self.check(ensemble)?;
        let (_, _, rot) = self.rotated_at(ensemble, i, x);
        let mut acc = 0.0;
        for j in 0..ensemble.len() {
            if j != i {
                let samples = self.samples(ensemble, j);
                acc += self.mutual(ensemble, i, j, x, &rot, &samples)?;
            }
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SelfUpdate {
    Keep,
    Rescale,
    Recompute,
}

/// `F_{i,1}(x)` with the default discretization.
pub fn kinematic_term(ensemble: &PatchEnsemble, i: usize, x: f64) -> Result<f64, ContourError> {
    Evaluator::for_ensemble(ensemble)?.kinematic_at(ensemble, i, x)
}

/// `F_{i,2}(x)` with the default discretization.
pub fn self_interaction_term(ensemble: &PatchEnsemble, i: usize, x: f64) -> Result<f64, ContourError> {
    Evaluator::for_ensemble(ensemble)?.self_at(ensemble, i, x)
}

/// `F_{i,3}(x)` with the default discretization.
pub fn mutual_interaction_term(ensemble: &PatchEnsemble, i: usize, x: f64) -> Result<f64, ContourError> {
    Evaluator::for_ensemble(ensemble)?.mutual_at(ensemble, i, x)
}

/// Residual spectrum with `M` equal to the ensemble's own mode cutoff.
pub fn functional_residual(ensemble: &PatchEnsemble) -> Result<ResidualSpectrum, ContourError> {
    Evaluator::for_ensemble(ensemble)?.residual(ensemble)
}
