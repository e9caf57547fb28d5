//! Point vortices under the gSQG interaction: induced velocities, the
//! relative-equilibrium residual, non-degeneracy and the canonical families.
//!
//! Parameters are flattened as `λ = (w_11..w_N1, w_12..w_N2, γ_1..γ_N, Ω, U)`.
//! The residual is `P_i = Ω w_i + U e_1 - (Ĉ_α/2) Σ_{j≠i} γ_j (w_i - w_j)/|w_i - w_j|^{α+2}`
//! and the induced velocity is the same interaction sum rotated by `⊥(a, b) = (-b, a)`,
//! so an equilibrium rotates with angular velocity `Ω` and translates with
//! velocity `U e_2`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specialfn::{point_vortex_constant, Alpha, SpecialFnError};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VortexError {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("vortices {0} and {1} coincide")]
    CoincidentCenters(usize, usize),
    #[error("near-collision at t = {time} (min distance {distance:e})")]
    Collision { time: f64, distance: f64 },
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),
    #[error("not an equilibrium: residual norm {0:e}")]
    NotEquilibrium(f64),
    #[error(transparent)]
    Alpha(#[from] SpecialFnError),
}

/// Rigid motion of a relative equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Rotating,
    Traveling,
    Stationary,
}

/// Index map of the flattened parameter vector λ for `n` vortices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterLayout {
    pub vortices: usize,
}

impl ParameterLayout {
    pub fn new(vortices: usize) -> Self {
        Self { vortices }
    }
    /// Component `axis` (0 or 1) of center `i`.
    pub fn center(&self, i: usize, axis: usize) -> usize {
        axis * self.vortices + i
    }
    pub fn circulation(&self, i: usize) -> usize {
        2 * self.vortices + i
    }
    pub fn omega(&self) -> usize {
        3 * self.vortices
    }
    pub fn speed(&self) -> usize {
        3 * self.vortices + 1
    }
    pub fn len(&self) -> usize {
        3 * self.vortices + 2
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// Human-readable label of a parameter index, e.g. `w21` or `gamma3`.
    pub fn label(&self, index: usize) -> String {
        let n = self.vortices;
        match index {
            k if k < 2 * n => format!("w{}{}", k % n + 1, k / n + 1),
            k if k < 3 * n => format!("gamma{}", k - 2 * n + 1),
            k if k == 3 * n => "omega".to_string(),
            _ => "speed".to_string(),
        }
    }
}

/// Positions, circulations and rigid-motion parameters of N point vortices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointVortexConfiguration {
    alpha: Alpha,
    centers: Vec<Point>,
    circulations: Vec<f64>,
    omega: f64,
    speed: f64,
    motion: MotionKind,
}

impl PointVortexConfiguration {
    pub fn new(
        alpha: Alpha,
        centers: Vec<Point>,
        circulations: Vec<f64>,
        omega: f64,
        speed: f64,
        motion: MotionKind,
    ) -> Result<Self, VortexError> {
        let invalid = |msg: &str| Err(VortexError::InvalidConfiguration(msg.to_string()));
        if centers.is_empty() {
            return invalid("at least one vortex is required");
        }
        if centers.len() != circulations.len() {
            return invalid("centers and circulations differ in length");
        }
        if centers.iter().flatten().chain(&circulations).any(|v| !v.is_finite())
            || !omega.is_finite()
            || !speed.is_finite()
        {
            return invalid("non-finite entry");
        }
        if circulations.iter().any(|&g| g == 0.0) {
            return invalid("circulations must be nonzero");
        }
        for i in 0..centers.len() {
            for j in 0..i {
                if centers[i] == centers[j] {
                    return Err(VortexError::CoincidentCenters(j, i));
                }
            }
        }
        let consistent = match motion {
            MotionKind::Rotating => speed == 0.0 && omega != 0.0,
            MotionKind::Traveling => omega == 0.0 && speed != 0.0,
            MotionKind::Stationary => omega == 0.0 && speed == 0.0,
        };
        if !consistent {
            return invalid("omega/speed inconsistent with the motion kind");
        }
        Ok(Self {
            alpha,
            centers,
            circulations,
            omega,
            speed,
            motion,
        })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }
    pub fn centers(&self) -> &[Point] {
        &self.centers
    }
    pub fn circulations(&self) -> &[f64] {
        &self.circulations
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn speed(&self) -> f64 {
        self.speed
    }
    pub fn motion(&self) -> MotionKind {
        self.motion
    }
    pub fn len(&self) -> usize {
        self.centers.len()
    }
    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
    pub fn layout(&self) -> ParameterLayout {
        ParameterLayout::new(self.len())
    }

    /// The flattened parameter vector λ.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.centers.iter().map(|w| w[0]).collect();
        out.extend(self.centers.iter().map(|w| w[1]));
        out.extend(&self.circulations);
        out.push(self.omega);
        out.push(self.speed);
        out
    }

    /// Rebuild from λ with the same α and motion kind; the invariants are re-checked.
    pub fn with_parameters(&self, lambda: &[f64]) -> Result<Self, VortexError> {
        let layout = self.layout();
        if lambda.len() != layout.len() {
            return Err(VortexError::InvalidConfiguration("parameter vector length".into()));
        }
        let n = self.len();
        Self::new(
            self.alpha,
            (0..n).map(|i| [lambda[i], lambda[n + i]]).collect(),
            lambda[2 * n..3 * n].to_vec(),
            lambda[layout.omega()],
            lambda[layout.speed()],
            self.motion,
        )
    }

    /// Same vortices with a different α.
    pub fn with_alpha(&self, alpha: Alpha) -> Self {
        Self { alpha, ..self.clone() }
    }
}

/// `(Ĉ_α/2) Σ_{j≠i} γ_j (w_i - w_j)/|w_i - w_j|^{α+2}` at every vortex.
fn interaction_sums(alpha: f64, centers: &[Point], circulations: &[f64]) -> Result<Vec<Point>, VortexError> {
    let c_hat = point_vortex_constant(Alpha::new(alpha)?);
    let n = centers.len();
    let mut out = vec![[0.0; 2]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dx = centers[i][0] - centers[j][0];
            let dy = centers[i][1] - centers[j][1];
            let r2 = dx * dx + dy * dy;
            if r2 == 0.0 {
                return Err(VortexError::CoincidentCenters(i.min(j), i.max(j)));
            }
            let factor = 0.5 * c_hat * circulations[j] * r2.powf(-0.5 * (alpha + 2.0));
            out[i][0] += factor * dx;
            out[i][1] += factor * dy;
        }
    }
    Ok(out)
}

/// Induced velocity `(Ĉ_α/2) Σ_{j≠i} γ_j (w_i - w_j)^⊥/|w_i - w_j|^{α+2}` at each vortex.
pub fn vortex_velocity(config: &PointVortexConfiguration) -> Result<Vec<Point>, VortexError> {
    let sums = interaction_sums(config.alpha.value(), &config.centers, &config.circulations)?;
    Ok(sums.into_iter().map(|[a, b]| [-b, a]).collect())
}

/// Relative-equilibrium residual `(P_1, …, P_N)` flattened as `(P_11, P_12, P_21, …)`.
pub fn equilibrium_residual(config: &PointVortexConfiguration) -> Result<Vec<f64>, VortexError> {
    residual_from_parameters(config.alpha.value(), config.len(), &config.parameters())
}

/// Residual as a function of the raw parameter vector (no invariant checks).
pub fn residual_from_parameters(alpha: f64, n: usize, lambda: &[f64]) -> Result<Vec<f64>, VortexError> {
    let layout = ParameterLayout::new(n);
    let centers: Vec<Point> = (0..n).map(|i| [lambda[i], lambda[n + i]]).collect();
    let circulations = &lambda[2 * n..3 * n];
    let omega = lambda[layout.omega()];
    let speed = lambda[layout.speed()];
    let sums = interaction_sums(alpha, &centers, circulations)?;
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        out.push(omega * centers[i][0] + speed - sums[i][0]);
        out.push(omega * centers[i][1] - sums[i][1]);
    }
    Ok(out)
}

/// Euclidean norm of the equilibrium residual.
pub fn residual_norm(config: &PointVortexConfiguration) -> Result<f64, VortexError> {
    Ok(equilibrium_residual(config)?.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Central-difference Jacobian `∂P/∂λ_k` for the selected parameter indices,
/// step `1e-6·max(1, |λ_k|)`.
pub fn equilibrium_jacobian(
    config: &PointVortexConfiguration,
    free_parameters: &[usize],
) -> Result<DMatrix<f64>, VortexError> {
    let n = config.len();
    let alpha = config.alpha.value();
    let lambda = config.parameters();
    let mut jac = DMatrix::zeros(2 * n, free_parameters.len());
    for (col, &k) in free_parameters.iter().enumerate() {
        if k >= lambda.len() {
            return Err(VortexError::InvalidConfiguration(format!("parameter index {k} out of range")));
        }
        let h = 1e-6 * lambda[k].abs().max(1.0);
        let mut plus = lambda.clone();
        let mut minus = lambda.clone();
        plus[k] += h;
        minus[k] -= h;
        let rp = residual_from_parameters(alpha, n, &plus)?;
        let rm = residual_from_parameters(alpha, n, &minus)?;
        for row in 0..2 * n {
            jac[(row, col)] = (rp[row] - rm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Interaction energy `Σ_{i<j} γ_i γ_j |w_i - w_j|^{-α}`, conserved by the dynamics.
pub fn interaction_energy(config: &PointVortexConfiguration) -> f64 {
    let a = config.alpha.value();
    let w = &config.centers;
    let g = &config.circulations;
    let mut energy = 0.0;
    for i in 0..w.len() {
        for j in 0..i {
            let r = ((w[i][0] - w[j][0]).powi(2) + (w[i][1] - w[j][1]).powi(2)).sqrt();
            energy += g[i] * g[j] * r.powf(-a);
        }
    }
    energy
}

/// Circulation-weighted center `Σ γ_i w_i`.
pub fn vorticity_moment(config: &PointVortexConfiguration) -> Point {
    config
        .centers
        .iter()
        .zip(&config.circulations)
        .fold([0.0; 2], |acc, (w, g)| [acc[0] + g * w[0], acc[1] + g * w[1]])
}

/// Sampled orbit, including the initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub centers: Vec<Vec<Point>>,
}

fn min_distance(centers: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..centers.len() {
        for j in 0..i {
            best = best.min(((centers[i][0] - centers[j][0]).powi(2) + (centers[i][1] - centers[j][1]).powi(2)).sqrt());
        }
    }
    best
}

/// Classical fourth-order Runge-Kutta integration of the vortex ODE. The step
/// is shrunk so that an integer number of steps spans `horizon` exactly.
pub fn integrate_orbit(
    config: &PointVortexConfiguration,
    horizon: f64,
    step: f64,
) -> Result<Trajectory, VortexError> {
    if !(step > 0.0) || !(horizon >= step) {
        return Err(VortexError::InvalidConfiguration("need step > 0 and horizon >= step".into()));
    }
    let steps = (horizon / step - 1e-9).ceil() as usize;
    let h = horizon / steps as f64;
    let alpha = config.alpha.value();
    let gammas = config.circulations.clone();
    let velocity = |state: &[Point]| -> Result<Vec<Point>, VortexError> {
        Ok(interaction_sums(alpha, state, &gammas)?
            .into_iter()
            .map(|[a, b]| [-b, a])
            .collect())
    };
    let shifted = |state: &[Point], k: &[Point], scale: f64| -> Vec<Point> {
        state
            .iter()
            .zip(k)
            .map(|(w, v)| [w[0] + scale * v[0], w[1] + scale * v[1]])
            .collect()
    };
    let initial_gap = min_distance(&config.centers);
    let mut state = config.centers.clone();
    let mut trajectory = Trajectory {
        times: vec![0.0],
        centers: vec![state.clone()],
    };
    for s in 1..=steps {
        let k1 = velocity(&state)?;
        let k2 = velocity(&shifted(&state, &k1, 0.5 * h))?;
        let k3 = velocity(&shifted(&state, &k2, 0.5 * h))?;
        let k4 = velocity(&shifted(&state, &k3, h))?;
        for i in 0..state.len() {
            for c in 0..2 {
                state[i][c] += h / 6.0 * (k1[i][c] + 2.0 * k2[i][c] + 2.0 * k3[i][c] + k4[i][c]);
            }
        }
        let time = s as f64 * h;
        let gap = min_distance(&state);
        if gap < 1e-8 * initial_gap {
            return Err(VortexError::Collision { time, distance: gap });
        }
        trajectory.times.push(time);
        trajectory.centers.push(state.clone());
    }
    Ok(trajectory)
}

/// The three explicit equilibrium families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalFamily {
    /// Centers `(d, 0)`, `(-c d, 0)`; circulations `(c γ, γ)`.
    CorotatingPair { d: f64, c: f64, gamma: f64 },
    /// Centers `(±d, 0)`; circulations `(-γ, γ)`.
    TravelingPair { d: f64, gamma: f64 },
    /// Centers `(1, 0)`, `(0, 0)`, `(-a, 0)`.
    StationaryTripole { a: f64, gamma: f64 },
}

impl CanonicalFamily {
    pub fn validate(&self) -> Result<(), VortexError> {
        let bad = |msg: &str| Err(VortexError::InvalidFamily(msg.to_string()));
        match *self {
            Self::CorotatingPair { d, c, gamma } => {
                if !(d > 0.0) || !d.is_finite() {
                    return bad("d must be positive");
                }
                if c == -1.0 {
                    return bad("c = -1 is degenerate");
                }
                if !(c.abs() > 0.0 && c.abs() <= 1.0) {
                    return bad("|c| must lie in (0, 1]");
                }
                if gamma == 0.0 || !gamma.is_finite() {
                    return bad("gamma must be nonzero");
                }
            }
            Self::TravelingPair { d, gamma } => {
                if !(d > 0.0) || !d.is_finite() {
                    return bad("d must be positive");
                }
                if gamma == 0.0 || !gamma.is_finite() {
                    return bad("gamma must be nonzero");
                }
            }
            Self::StationaryTripole { a, gamma } => {
                if !(a > 0.0 && a < 1.0) {
                    return bad("a must lie in (0, 1)");
                }
                if gamma == 0.0 || !gamma.is_finite() {
                    return bad("gamma must be nonzero");
                }
            }
        }
        Ok(())
    }

    pub fn motion(&self) -> MotionKind {
        match self {
            Self::CorotatingPair { .. } => MotionKind::Rotating,
            Self::TravelingPair { .. } => MotionKind::Traveling,
            Self::StationaryTripole { .. } => MotionKind::Stationary,
        }
    }

    pub fn vortices(&self) -> usize {
        match self {
            Self::StationaryTripole { .. } => 3,
            _ => 2,
        }
    }

    /// The equilibrium configuration at the given α.
    pub fn configuration(&self, alpha: Alpha) -> Result<PointVortexConfiguration, VortexError> {
        match *self {
            Self::CorotatingPair { d, c, gamma } => corotating_pair(d, c, gamma, alpha),
            Self::TravelingPair { d, gamma } => traveling_pair(d, gamma, alpha),
            Self::StationaryTripole { a, gamma } => stationary_tripole(a, gamma, alpha),
        }
    }

    /// The split λ₁ used for the printed Jacobians.
    pub fn free_parameters(&self) -> Vec<usize> {
        let layout = ParameterLayout::new(self.vortices());
        match self {
            Self::CorotatingPair { .. } => vec![layout.center(0, 0), layout.center(1, 0), layout.center(1, 1)],
            Self::TravelingPair { .. } => vec![layout.center(1, 0), layout.center(1, 1), layout.circulation(0)],
            Self::StationaryTripole { .. } => {
                vec![layout.center(2, 0), layout.center(2, 1), layout.circulation(1)]
            }
        }
    }

    /// Scalar prefactor and bracketed matrix of the closed-form Jacobian
    /// `∂P/∂λ₁` at the equilibrium.
    pub fn analytic_jacobian_factors(&self, alpha: Alpha) -> Result<(f64, DMatrix<f64>), VortexError> {
        self.validate()?;
        let a = alpha.value();
        let c_hat = point_vortex_constant(alpha);
        match *self {
            Self::CorotatingPair { d, c, gamma } => {
                let prefactor = gamma * c_hat / (2.0 * d.powf(a + 2.0) * (1.0 + c).powf(a + 2.0));
                let m = DMatrix::from_row_slice(
                    4,
                    3,
                    &[
                        2.0 + c + a, -(a + 1.0), 0.0,
                        0.0, 0.0, 1.0,
                        -c * (a + 1.0), 1.0 + c * (2.0 + a), 0.0,
                        0.0, 0.0, 1.0,
                    ],
                );
                Ok((prefactor, m))
            }
            Self::TravelingPair { d, gamma } => {
                let prefactor = c_hat / (2f64.powf(a + 3.0) * d.powf(a + 2.0));
                let m = DMatrix::from_row_slice(
                    4,
                    3,
                    &[
                        -gamma * (a + 1.0), 0.0, 0.0,
                        0.0, gamma, 0.0,
                        -gamma * (a + 1.0), 0.0, 2.0 * d,
                        0.0, gamma, 0.0,
                    ],
                );
                Ok((prefactor, m))
            }
            Self::StationaryTripole { a: s, gamma } => {
                let prefactor = gamma * c_hat / 2.0;
                let q = (s + 1.0).powf(-a - 2.0);
                let m = DMatrix::from_row_slice(
                    6,
                    3,
                    &[
                        -(a + 1.0) * s.powf(a + 1.0) * q, 0.0, -1.0 / gamma,
                        0.0, s.powf(a + 1.0) * q, 0.0,
                        -(a + 1.0) / s, 0.0, 0.0,
                        0.0, 1.0 / s, 0.0,
                        -(a + 1.0) / s * q, 0.0, s.powf(-a - 1.0) / gamma,
                        0.0, q / s, 0.0,
                    ],
                );
                Ok((prefactor, m))
            }
        }
    }

    /// The closed-form Jacobian, prefactor included.
    pub fn analytic_jacobian(&self, alpha: Alpha) -> Result<DMatrix<f64>, VortexError> {
        let (prefactor, m) = self.analytic_jacobian_factors(alpha)?;
        Ok(m * prefactor)
    }

    /// Determinant of the bracketed 4×3 matrix after deleting its redundant
    /// last row (pairs only).
    pub fn reduced_determinant(&self, alpha: Alpha) -> Result<Option<f64>, VortexError> {
        let (_, m) = self.analytic_jacobian_factors(alpha)?;
        Ok(match self {
            Self::StationaryTripole { .. } => None,
            _ => Some(m.remove_row(3).determinant()),
        })
    }

    /// The determinant formula as printed: `(α+2)(1+c)²` and `2γd(α+1)`.
    pub fn printed_determinant(&self, alpha: Alpha) -> Option<f64> {
        let a = alpha.value();
        match *self {
            Self::CorotatingPair { c, .. } => Some((a + 2.0) * (1.0 + c).powi(2)),
            Self::TravelingPair { d, gamma } => Some(2.0 * gamma * d * (a + 1.0)),
            Self::StationaryTripole { .. } => None,
        }
    }
}

/// Asymmetric co-rotating pair, `Ω* = γĈ_α / (2 d^{α+2} (1+c)^{α+1})`.
pub fn corotating_pair(d: f64, c: f64, gamma: f64, alpha: Alpha) -> Result<PointVortexConfiguration, VortexError> {
    CanonicalFamily::CorotatingPair { d, c, gamma }.validate()?;
    let a = alpha.value();
    let omega = gamma * point_vortex_constant(alpha) / (2.0 * d.powf(a + 2.0) * (1.0 + c).powf(a + 1.0));
    PointVortexConfiguration::new(
        alpha,
        vec![[d, 0.0], [-c * d, 0.0]],
        vec![c * gamma, gamma],
        omega,
        0.0,
        MotionKind::Rotating,
    )
}

/// Counter-rotating traveling pair, `U* = γĈ_α / (2^{α+2} d^{α+1})`.
pub fn traveling_pair(d: f64, gamma: f64, alpha: Alpha) -> Result<PointVortexConfiguration, VortexError> {
    CanonicalFamily::TravelingPair { d, gamma }.validate()?;
    let a = alpha.value();
    let speed = gamma * point_vortex_constant(alpha) / (2f64.powf(a + 2.0) * d.powf(a + 1.0));
    PointVortexConfiguration::new(
        alpha,
        vec![[d, 0.0], [-d, 0.0]],
        vec![-gamma, gamma],
        0.0,
        speed,
        MotionKind::Traveling,
    )
}

/// Collinear stationary tripole with circulations `(γ, -γ(a/(a+1))^{α+1}, γa^{α+1})`.
pub fn stationary_tripole(a: f64, gamma: f64, alpha: Alpha) -> Result<PointVortexConfiguration, VortexError> {
    CanonicalFamily::StationaryTripole { a, gamma }.validate()?;
    let p = alpha.value() + 1.0;
    PointVortexConfiguration::new(
        alpha,
        vec![[1.0, 0.0], [0.0, 0.0], [-a, 0.0]],
        vec![gamma, -gamma * (a / (a + 1.0)).powf(p), gamma * a.powf(p)],
        0.0,
        0.0,
        MotionKind::Stationary,
    )
}

/// Outcome of the non-degeneracy test for one parameter split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub free_parameter_indices: Vec<usize>,
    #[serde(serialize_with = "serialize_matrix")]
    pub jacobian: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub codim: usize,
    pub passes: bool,
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

/// Numerical rank with the cutoff `1e-8·σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> (usize, Vec<f64>) {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > 1e-8 * max && s > 0.0).count();
    (rank, sv)
}

/// Parameters that may move for a given motion kind.
fn admissible_parameters(config: &PointVortexConfiguration) -> Vec<usize> {
    let layout = config.layout();
    let mut out: Vec<usize> = (0..3 * config.len()).collect();
    match config.motion {
        MotionKind::Rotating => out.push(layout.omega()),
        MotionKind::Traveling => out.push(layout.speed()),
        MotionKind::Stationary => {}
    }
    out
}

/// Required `dim λ₁` and codimension for the motion kind.
pub fn required_split(motion: MotionKind, vortices: usize) -> Option<(usize, usize)> {
    let two_n = 2 * vortices;
    match motion {
        MotionKind::Rotating | MotionKind::Traveling => two_n.checked_sub(1).map(|d| (d, 1)),
        MotionKind::Stationary => two_n.checked_sub(3).filter(|&d| d > 0).map(|d| (d, 3)),
    }
}

/// Non-degeneracy test of exactly `split`, without searching alternatives.
pub fn split_report(config: &PointVortexConfiguration, split: &[usize]) -> Result<NondegeneracyReport, VortexError> {
    let jacobian = equilibrium_jacobian(config, split)?;
    let (rank, singular_values) = numerical_rank(&jacobian);
    let codim = 2 * config.len() - rank;
    let passes = required_split(config.motion, config.len())
        .is_some_and(|(dim, required)| split.len() == dim && codim == required);
    Ok(NondegeneracyReport {
        free_parameter_indices: split.to_vec(),
        jacobian,
        singular_values,
        rank,
        codim,
        passes,
    })
}

fn combinations(pool: &[usize], k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    fn rec(pool: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return visit(cur);
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            if rec(pool, k, i + 1, cur, visit) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(pool, k, 0, &mut Vec::new(), &mut visit);
}

/// Non-degeneracy test. Tries `preferred` first, then every admissible split
/// of the required dimension in lexicographic order, and returns the first
/// passing split (or the report of the first candidate tried).
pub fn nondegeneracy_report(
    config: &PointVortexConfiguration,
    preferred: Option<&[usize]>,
) -> Result<NondegeneracyReport, VortexError> {
    let scale = config
        .circulations
        .iter()
        .map(|g| g.abs())
        .fold(0.0, f64::max)
        * point_vortex_constant(config.alpha)
        / min_distance(&config.centers).powf(config.alpha.value() + 1.0).min(1.0);
    let norm = residual_norm(config)?;
    if norm > 1e-9 * scale.max(1.0) {
        return Err(VortexError::NotEquilibrium(norm));
    }
    let mut first: Option<NondegeneracyReport> = None;
    if let Some(split) = preferred {
        let report = split_report(config, split)?;
        if report.passes {
            return Ok(report);
        }
        first = Some(report);
    }
    let Some((dim, _)) = required_split(config.motion, config.len()) else {
        return first.ok_or_else(|| VortexError::InvalidConfiguration("no admissible split".into()));
    };
    let pool = admissible_parameters(config);
    let mut found = None;
    let mut error = None;
    combinations(&pool, dim, |split| match split_report(config, split) {
        Ok(report) if report.passes => {
            found = Some(report);
            true
        }
        Ok(report) => {
            first.get_or_insert(report);
            false
        }
        Err(e) => {
            error = Some(e);
            true
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    found
        .or(first)
        .ok_or_else(|| VortexError::InvalidConfiguration("no admissible split".into()))
}
