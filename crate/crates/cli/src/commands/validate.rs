//! Named verification suite with measured values and thresholds.

use std::f64::consts::PI;

use gsqg_core::contour::{
    random_ensemble, rotation_identity, stationary_identity_vector, stream_moment_identities, translation_identity, Evaluator,
    PatchEnsemble, PatchShape,
};
use gsqg_core::linop::{gateaux_fd, quadrature_evaluator, SpectralMultiplier};
use gsqg_core::pointvortex::{
    corotating_pair, equilibrium_jacobian, integrate_orbit, interaction_energy, nondegeneracy_report, residual_norm,
    stationary_tripole, traveling_pair, CanonicalFamily, MotionKind, PointVortexConfiguration,
};
use gsqg_core::solver::{branch_report, continue_branch, ContinuationSettings};
use gsqg_core::specialfn::{
    beta_coefficient, biot_savart_constant, constant_ratio, kernel_quadrature_oracle, linearization_symbol,
    point_vortex_constant, printed_constant_ratio, sigma_coefficient, KernelKind,
};
use gsqg_core::Alpha;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ValidateConfig;
use crate::error::CliError;
use crate::output::Sink;

/// One measured quantity against its limit. `lower` marks a lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub quantity: String,
    pub value: f64,
    pub threshold: f64,
    pub lower: bool,
    pub passed: bool,
}

impl Measurement {
    fn at_most(quantity: &str, value: f64, threshold: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            threshold,
            lower: false,
            passed: value <= threshold,
        }
    }

    fn above(quantity: &str, value: f64, threshold: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            threshold,
            lower: true,
            passed: value > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    /// Non-gating checks are reported but never fail the suite.
    pub gating: bool,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &'static str, measurements: Vec<Measurement>) -> Self {
        Self {
            name,
            gating: true,
            passed: measurements.iter().all(|m| m.passed),
            measurements,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub first_failure: Option<&'static str>,
    pub checks: Vec<Check>,
}

fn alpha(v: f64) -> Alpha {
    Alpha::new(v).expect("fixed grid inside [1, 2)")
}

/// β_n against the quadrature oracle, σ_n monotonicity, β_n growth, and the
/// symbol σ̂_n against a finite-difference derivative of the functional.
fn spectral(config: &ValidateConfig) -> Result<Check, CliError> {
    let cells: Vec<(Alpha, u32)> = config
        .alphas
        .iter()
        .flat_map(|&a| (1..=config.max_mode).map(move |n| (a, n)))
        .collect();
    let errors: Vec<f64> = cells
        .into_par_iter()
        .map(|(a, n)| -> Result<f64, CliError> {
            let x = PI / (2.0 * n as f64);
            let oracle = kernel_quadrature_oracle(a, n, KernelKind::Sine, x, 1e-8)?.value / (n as f64 * x).sin();
            let exact = beta_coefficient(a, n)?;
            Ok((exact - oracle).abs() / exact)
        })
        .collect::<Result<_, _>>()?;
    let beta_error = errors.into_iter().fold(0.0, f64::max);

    let mut decreases = 0usize;
    let mut growth: f64 = 0.0;
    for &a in &config.alphas {
        let sigma: Vec<f64> = (1..=4096).map(|n| sigma_coefficient(a, n)).collect::<Result<_, _>>()?;
        decreases += sigma.windows(2).filter(|w| w[1] <= w[0]).count();
        // β_n over its growth rate: n^{α-1}, or log n on the unit branch.
        let rate = |n: u32| if a.is_unit() { 1.0 + (n as f64).ln() } else { (n as f64).powf(a.value() - 1.0) };
        let scaled: Vec<f64> = [1u32, 16, 256, 4096, 1 << 16]
            .into_iter()
            .map(|n| Ok(beta_coefficient(a, n)? / rate(n)))
            .collect::<Result<_, CliError>>()?;
        let max = scaled.iter().copied().fold(0.0, f64::max);
        growth = growth.max(max / scaled[scaled.len() - 1]);
    }

    let scale = config.fault_injection.map_or(1.0, |f| f.sigma_scale);
    let symbol_modes = config.max_mode.min(8) as usize;
    let mut symbol_error: f64 = 0.0;
    for &a in &config.alphas {
        let single = PointVortexConfiguration::new(a, vec![[0.0, 0.0]], vec![1.0], 0.0, 0.0, MotionKind::Stationary)?;
        let evaluator = quadrature_evaluator(a, symbol_modes)?;
        let trivial = PatchEnsemble::from_configuration(&single, 0.0, &[1.0], vec![PatchShape::zero(symbol_modes)])?;
        for n in 2..=symbol_modes {
            let direction = vec![PatchShape::from_modes(symbol_modes, &[(n, 1.0, 0.0)])?];
            let fd = gateaux_fd(&evaluator, &trivial, &direction, 1e-4)?;
            let expected = scale * n as f64 * linearization_symbol(a, n as u32)?;
            symbol_error = symbol_error.max((fd.patches[0].mode(n).0.abs() - expected).abs());
        }
    }
    Ok(Check::new(
        "spectral",
        vec![
            Measurement::at_most("beta_vs_quadrature_rel_err", beta_error, 1e-7),
            Measurement::at_most("sigma_non_increasing_steps", decreases as f64, 0.0),
            Measurement::at_most("scaled_beta_sup_over_tail", growth, 10.0),
            Measurement::at_most("symbol_vs_gateaux_abs_err", symbol_error, 1e-5),
        ],
    ))
}

fn constant_samples(count: usize) -> Vec<Alpha> {
    (1..=count).map(|k| alpha(1.0 + k as f64 / (count + 1) as f64)).collect()
}

fn constants(config: &ValidateConfig) -> Result<Vec<Check>, CliError> {
    let mut hat: f64 = 0.0;
    let mut corrected: f64 = 0.0;
    let mut printed: f64 = 0.0;
    for a in constant_samples(config.constant_samples) {
        hat = hat.max((point_vortex_constant(a) / (a.value() * biot_savart_constant(a)) - 1.0).abs());
        let ratio = constant_ratio(a)?;
        let closed = printed_constant_ratio(a)?;
        printed = printed.max((closed / ratio - 1.0).abs());
        corrected = corrected.max((2.0 * closed / ratio - 1.0).abs());
    }
    let mut known = Check::new("constants_printed_ratio", vec![Measurement::at_most("printed_ratio_rel_err", printed, 1e-10)]);
    known.gating = false;
    known.note = Some("known defect: the printed closed form is half the ratio computed from the definitions".into());
    Ok(vec![
        Check::new(
            "constants",
            vec![
                Measurement::at_most("c_hat_equals_alpha_c_rel_err", hat, 1e-10),
                Measurement::at_most("corrected_ratio_rel_err", corrected, 1e-10),
            ],
        ),
        known,
    ])
}

fn family_grid() -> Vec<CanonicalFamily> {
    let mut out = Vec::new();
    for c in [0.2, 0.4, 0.6, 0.8, 1.0] {
        out.push(CanonicalFamily::CorotatingPair { d: 1.0, c, gamma: 1.0 });
    }
    for (k, d) in [0.25, 0.5, 0.75, 1.0, 1.5].into_iter().enumerate() {
        out.push(CanonicalFamily::TravelingPair {
            d,
            gamma: if k % 2 == 0 { 1.0 } else { -1.0 },
        });
    }
    for a in [0.2, 0.35, 0.5, 0.65, 0.8] {
        out.push(CanonicalFamily::StationaryTripole { a, gamma: 1.0 });
    }
    out
}

fn equilibria(config: &ValidateConfig) -> Result<Check, CliError> {
    let (mut residual, mut jacobian, mut determinant): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut wrong_ranks = 0usize;
    for &a in &config.alphas {
        for family in family_grid() {
            let vortices = family.configuration(a)?;
            residual = residual.max(residual_norm(&vortices)?);
            let free = family.free_parameters();
            let report = nondegeneracy_report(&vortices, Some(&free))?;
            let codim = if family.vortices() == 3 { 3 } else { 1 };
            if !(report.passes && report.rank == 3 && report.codim == codim) {
                wrong_ranks += 1;
            }
            let fd = equilibrium_jacobian(&vortices, &free)?;
            let exact = family.analytic_jacobian(a)?;
            for (p, q) in fd.iter().zip(exact.iter()) {
                jacobian = jacobian.max(if *q != 0.0 { ((p - q) / q).abs() } else { p.abs() });
            }
            if let (Some(reduced), Some(printed)) = (family.reduced_determinant(a)?, family.printed_determinant(a)) {
                determinant = determinant.max((reduced.abs() / printed.abs() - 1.0).abs());
            }
        }
    }
    Ok(Check::new(
        "equilibria",
        vec![
            Measurement::at_most("residual_norm", residual, 1e-11),
            Measurement::at_most("families_with_wrong_rank", wrong_ranks as f64, 0.0),
            Measurement::at_most("jacobian_rel_err", jacobian, 1e-5),
            Measurement::at_most("abs_determinant_rel_err", determinant, 1e-8),
        ],
    ))
}

fn dynamics() -> Result<Check, CliError> {
    let pair = corotating_pair(1.0, 0.5, 1.0, alpha(1.5))?;
    let period = 2.0 * PI / pair.omega();
    let orbit = integrate_orbit(&pair, period, period / 4000.0)?;
    let rotation = orbit
        .centers
        .last()
        .map(|last| {
            last.iter()
                .zip(pair.centers())
                .map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);

    let travel = traveling_pair(1.0, 1.0, alpha(1.5))?;
    let orbit = integrate_orbit(&travel, 1.0, 1e-2)?;
    let mut speed: f64 = 0.0;
    for (t, state) in orbit.times.iter().zip(&orbit.centers).skip(1) {
        for (p, q) in state.iter().zip(travel.centers()) {
            speed = speed.max(((p[1] - q[1]) / t - travel.speed()).abs()).max((p[0] - q[0]).abs() / t);
        }
    }

    let free = PointVortexConfiguration::new(
        alpha(1.25),
        vec![[1.0, 0.0], [-0.5, 0.4], [0.1, -1.2]],
        vec![1.0, 0.7, -0.4],
        0.0,
        0.0,
        MotionKind::Stationary,
    )?;
    let orbit = integrate_orbit(&free, 10.0, 1e-3)?;
    let e0 = interaction_energy(&free);
    let mut drift: f64 = 0.0;
    for state in &orbit.centers {
        let moved =
            PointVortexConfiguration::new(free.alpha(), state.clone(), free.circulations().to_vec(), 0.0, 0.0, MotionKind::Stationary)?;
        drift = drift.max(((interaction_energy(&moved) - e0) / e0).abs());
    }
    Ok(Check::new(
        "dynamics",
        vec![
            Measurement::at_most("rigid_rotation_error", rotation, 1e-6),
            Measurement::at_most("translation_speed_error", speed, 1e-8),
            Measurement::at_most("energy_drift_rel", drift, 1e-6),
        ],
    ))
}

fn linearization() -> Result<Check, CliError> {
    let modes = 8;
    let mut worst: f64 = 0.0;
    for a in [1.0, 1.5] {
        for vortices in [
            corotating_pair(1.0, 0.5, 1.0, alpha(a))?,
            traveling_pair(1.0, 1.0, alpha(a))?,
            stationary_tripole(0.5, 1.0, alpha(a))?,
        ] {
            let n = vortices.len();
            let evaluator = quadrature_evaluator(vortices.alpha(), modes)?;
            let trivial = PatchEnsemble::from_configuration(&vortices, 0.0, &vec![1.0; n], vec![PatchShape::zero(modes); n])?;
            let op = SpectralMultiplier::calibrated(&vortices, modes)?;
            for m in 2..=modes {
                let mut direction = vec![PatchShape::zero(modes); n];
                direction[0] = PatchShape::from_modes(modes, &[(m, 1.0, -0.5)])?;
                let fd = gateaux_fd(&evaluator, &trivial, &direction, 1e-4)?;
                worst = worst.max(fd.difference(&op.apply(&direction)?, 1.0).sup_norm());
            }
        }
    }
    Ok(Check::new(
        "linearization",
        vec![Measurement::at_most("gateaux_vs_diagonal_abs_err", worst, 1e-5)],
    ))
}

fn identities(config: &ValidateConfig, seed: u64) -> Result<Check, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 5];
    let grid = [1.0, 1.25, 1.5, 1.75];
    for k in 0..config.identity_ensembles {
        let a = alpha(grid[k % grid.len()]);
        let ens = random_ensemble(&mut rng, MotionKind::Traveling, a, 8);
        let values = Evaluator::for_ensemble(&ens)?.values(&ens)?;
        let t = translation_identity(&ens, &values)?;
        worst[0] = worst[0].max(t[0].hypot(t[1]));

        let ens = random_ensemble(&mut rng, MotionKind::Rotating, a, 8);
        let values = Evaluator::for_ensemble(&ens)?.values(&ens)?;
        worst[1] = worst[1].max(rotation_identity(&ens, &values)?.abs());

        let ens = random_ensemble(&mut rng, MotionKind::Stationary, a, 8);
        let values = Evaluator::for_ensemble(&ens)?.values(&ens)?;
        let v = stationary_identity_vector(&ens, &values)?;
        worst[2] = worst[2].max(v.iter().fold(0.0, |m, c| m.max(c.abs())));

        let motion = [MotionKind::Rotating, MotionKind::Traveling, MotionKind::Stationary][k % 3];
        let ens = random_ensemble(&mut rng, motion, a, 8);
        let moments = stream_moment_identities(&ens, 64)?;
        worst[3] = worst[3].max(moments.scalar.abs());
        worst[4] = worst[4].max(moments.vector[0].hypot(moments.vector[1]));
    }
    Ok(Check::new(
        "identities",
        vec![
            Measurement::at_most("translation", worst[0], 1e-7),
            Measurement::at_most("rotation", worst[1], 1e-7),
            Measurement::at_most("stationary", worst[2], 1e-7),
            Measurement::at_most("stream_moment_scalar", worst[3], 1e-7),
            Measurement::at_most("stream_moment_vector", worst[4], 1e-7),
        ],
    ))
}

/// Short co-rotating branch at α = 1.5.
fn desingularization(modes: usize) -> Result<Check, CliError> {
    let vortices = corotating_pair(1.0, 0.5, 1.0, alpha(1.5))?;
    let settings = ContinuationSettings {
        mode_cutoff: modes,
        ..ContinuationSettings::default()
    };
    let branch = continue_branch(&vortices, &settings)?.branch;
    let report = branch_report(&branch)?;
    let residual = branch.entries.iter().map(|e| e.residual_norm).fold(0.0, f64::max);
    let curvature = branch.entries.iter().map(|e| e.min_curvature).fold(f64::INFINITY, f64::min);
    let lambda_slope = report.lambda_slope.iter().fold(0.0, |m: f64, s| m.max(s.abs()));
    Ok(Check::new(
        "desingularization",
        vec![
            Measurement::at_most("residual_norm", residual, 1e-8),
            Measurement::above("min_curvature", curvature, 0.0),
            Measurement::at_most("mode2_slope_rel_err", report.mode2_relative_error, 0.05),
            Measurement::at_most("lambda_slope", lambda_slope, 1e-3),
        ],
    ))
}

pub fn suite(config: &ValidateConfig, seed: u64) -> Result<Summary, CliError> {
    let mut checks = vec![spectral(config)?];
    checks.extend(constants(config)?);
    checks.push(equilibria(config)?);
    checks.push(dynamics()?);
    checks.push(linearization()?);
    checks.push(identities(config, seed)?);
    if config.branch_mode_cutoff > 0 {
        checks.push(desingularization(config.branch_mode_cutoff)?);
    }
    let first_failure = checks.iter().find(|c| c.gating && !c.passed).map(|c| c.name);
    Ok(Summary {
        passed: first_failure.is_none(),
        first_failure,
        checks,
    })
}

pub fn run(config: &ValidateConfig, seed: u64, sink: &Sink) -> Result<(), CliError> {
    let summary = suite(config, seed)?;
    let path = sink.json("validate.json", &summary)?;
    for check in &summary.checks {
        let status = match (check.passed, check.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "KNOWN",
        };
        sink.say(format!("{status:>5} {}", check.name));
        for m in &check.measurements {
            let relation = if m.lower { ">" } else { "<=" };
            sink.say(format!("      {}: {:.3e} ({relation} {:.1e})", m.quantity, m.value, m.threshold));
        }
        if let Some(note) = &check.note {
            sink.say(format!("      {note}"));
        }
    }
    sink.say(format!("summary written to {}", path.display()));
    match summary.first_failure {
        Some(name) => Err(CliError::Validation(name.to_string())),
        None => Ok(()),
    }
}
