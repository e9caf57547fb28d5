//! Gauss-Legendre rules and singularity-graded panel quadrature on the circle.
//!
//! The periodic rule integrates `g` over one period with a weak power
//! singularity at a single point `x`. Offsets `t` are measured from `x` and come
//! in symmetric pairs `±t`, so the odd part of an integrand cancels pairwise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Failure of a refinement-checked quadrature.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge: refinements differ by {difference:e} (tolerance {tolerance:e})")]
    NotConverged { difference: f64, tolerance: f64 },
    #[error("invalid quadrature setting: {0}")]
    InvalidSetting(&'static str),
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the three-term recurrence, started from the
    /// Tricomi-type guesses `cos(π(i + 3/4)/(n + 1/2))`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 4.0 * f64::EPSILON {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&s, &w)| (mid + half * s, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.on_interval(a, b).map(|(t, w)| w * f(t)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the Bonnet recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Panel layout for a singular periodic rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelSettings {
    /// Number of geometric halvings between `π` and the innermost panel.
    pub levels: u32,
    /// Gauss-Legendre points per panel.
    pub order: usize,
    /// Upper bound on panel length; longer panels are split evenly.
    pub max_panel: f64,
}

impl PanelSettings {
    /// Default layout for a kernel acting on trigonometric data up to mode `modes`.
    pub fn for_modes(levels: u32, order: usize, modes: usize) -> Self {
        Self {
            levels,
            order,
            max_panel: PI / (2.0 * modes.max(4) as f64),
        }
    }

    /// The next refinement level used for convergence estimates.
    pub fn refined(self) -> Self {
        Self {
            levels: self.levels + 4,
            order: self.order + 4,
            max_panel: 0.5 * self.max_panel,
        }
    }

    fn check(&self) -> Result<(), QuadratureError> {
        if self.levels == 0 {
            return Err(QuadratureError::InvalidSetting("levels must be positive"));
        }
        if self.order == 0 {
            return Err(QuadratureError::InvalidSetting("order must be positive"));
        }
        if !(self.max_panel > 0.0) {
            return Err(QuadratureError::InvalidSetting("max_panel must be positive"));
        }
        Ok(())
    }
}

/// Symmetric offset rule for `∫_{-π}^{π} g(t) dt` with `g ~ |t|^{1-α}` at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularRule {
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

impl SingularRule {
    /// Geometric panels `[π 2^{-k-1}, π 2^{-k}]` down to `levels`, then an
    /// innermost panel `[0, h]` mapped by `t = h v^{1/(2-α)}`, which makes the
    /// model singularity `t^{1-α}` constant in `v`.
    pub fn new(alpha: f64, settings: PanelSettings) -> Result<Self, QuadratureError> {
        settings.check()?;
        if !(0.0..2.0).contains(&alpha) {
            return Err(QuadratureError::InvalidSetting("singularity exponent out of range"));
        }
        let rule = GaussLegendre::new(settings.order);
        let mut half_offsets = Vec::new();
        let mut half_weights = Vec::new();
        let mut upper = PI;
        for _ in 0..settings.levels {
            let lower = 0.5 * upper;
            let pieces = ((upper - lower) / settings.max_panel).ceil().max(1.0) as usize;
            let width = (upper - lower) / pieces as f64;
            for p in 0..pieces {
                let a = lower + p as f64 * width;
                for (t, w) in rule.on_interval(a, a + width) {
                    half_offsets.push(t);
                    half_weights.push(w);
                }
            }
            upper = lower;
        }
        let h = upper;
        let power = 1.0 / (2.0 - alpha);
        for (v, w) in rule.on_interval(0.0, 1.0) {
            half_offsets.push(h * v.powf(power));
            half_weights.push(w * h * power * v.powf(power - 1.0));
        }
        let mut offsets = Vec::with_capacity(2 * half_offsets.len());
        let mut weights = Vec::with_capacity(2 * half_offsets.len());
        for (t, w) in half_offsets.into_iter().zip(half_weights) {
            offsets.push(t);
            weights.push(w);
            offsets.push(-t);
            weights.push(w);
        }
        Ok(Self { offsets, weights })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_0^{2π} f(y) dy` with the singular point at `y = x`.
    pub fn integrate(&self, x: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(x + t))
            .sum()
    }
}

/// A quadrature value with the difference to the next refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub refinement_difference: f64,
}

/// `∫_0^{2π} f(y) dy` for an integrand with an `O(|y - x|^{1-α})` singularity
/// at `y = x`, checked against one refinement level.
pub fn singular_quadrature(
    f: impl Fn(f64) -> f64,
    alpha: f64,
    x: f64,
    settings: PanelSettings,
    tolerance: f64,
) -> Result<Estimate, QuadratureError> {
    let coarse = SingularRule::new(alpha, settings)?.integrate(x, &f);
    let fine = SingularRule::new(alpha, settings.refined())?.integrate(x, &f);
    let difference = (fine - coarse).abs();
    let allowed = tolerance * fine.abs().max(1.0);
    if difference > allowed {
        return Err(QuadratureError::NotConverged {
            difference,
            tolerance: allowed,
        });
    }
    Ok(Estimate {
        value: fine,
        refinement_difference: difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1, 2, 5, 12, 16, 20] {
            let rule = GaussLegendre::new(order);
            assert_relative_eq!(rule.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-14);
            for degree in 0..(2 * order) {
                let exact = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(degree as i32));
                assert!((got - exact).abs() < 1e-14, "order {order} degree {degree}: {got}");
            }
        }
    }

    #[test]
    fn smooth_periodic_integrand_matches_trapezoid() {
        let rule = SingularRule::new(1.5, PanelSettings::for_modes(20, 12, 8)).unwrap();
        let f = |y: f64| (3.0 * y).cos().powi(2) + (y.sin() + 2.0).ln();
        let n = 256;
        let trapezoid: f64 = (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).sum::<f64>() * 2.0 * PI / n as f64;
        assert_relative_eq!(rule.integrate(0.7, f), trapezoid, max_relative = 1e-12);
    }

    #[test]
    fn power_singularity_matches_closed_form() {
        // ∫_0^{2π} |sin(y/2)|^{1-α} dy = 2√π Γ(1-α/2)/Γ(3/2-α/2)
        use statrs::function::gamma::gamma;
        for alpha in [1.0, 1.3, 1.7, 1.95] {
            let exact = 2.0 * PI.sqrt() * gamma(1.0 - alpha / 2.0) / gamma(1.5 - alpha / 2.0);
            let settings = PanelSettings::for_modes(20, 12, 4);
            let est = singular_quadrature(|y| (0.5 * y).sin().abs().powf(1.0 - alpha), alpha, 0.0, settings, 1e-10)
                .unwrap();
            assert_relative_eq!(est.value, exact, max_relative = 1e-11);
        }
    }
}
