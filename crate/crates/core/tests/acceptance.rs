//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gsqg_core::contour::{
    random_ensemble, rotation_identity, stationary_identity_vector, stream_moment_identities, translation_identity, Evaluator,
    EvaluatorSettings, PatchEnsemble, PatchShape,
};
use gsqg_core::linop::{epsilon_derivative, gateaux_fd, quadrature_evaluator, SpectralMultiplier};
use gsqg_core::pointvortex::*;
use gsqg_core::solver::{branch_report, continue_branch, uniqueness_probe, ContinuationRun, ContinuationSettings};
use gsqg_core::specialfn::*;
use gsqg_core::Alpha;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn alpha(v: f64) -> Alpha {
    Alpha::new(v).expect("alpha in [1, 2)")
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn spectral_coefficients() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [1.0, 1.1, 1.25, 1.5, 1.75, 1.9] {
        let a = alpha(a);
        for n in 1..=32u32 {
            let x = PI / (2.0 * n as f64);
            let oracle = kernel_quadrature_oracle(a, n, KernelKind::Sine, x, 1e-8).map_err(err)?.value
                / (n as f64 * x).sin();
            let exact = beta_coefficient(a, n).map_err(err)?;
            worst = worst.max((exact - oracle).abs() / exact);
        }
    }
    let mut monotone = true;
    let mut growth_spread: f64 = 0.0;
    for a in [1.0, 1.1, 1.25, 1.5, 1.75, 1.9] {
        let a = alpha(a);
        let sigma: Vec<f64> = (1..=4096).map(|n| sigma_coefficient(a, n)).collect::<Result<_, _>>().map_err(err)?;
        monotone &= sigma.windows(2).all(|w| w[1] > w[0]);
        // β_n against its growth rate: n^{α-1}, or log n on the unit branch.
        let scaled = |n: u32| -> Result<f64, String> {
            let rate = if a.is_unit() { 1.0 + (n as f64).ln() } else { (n as f64).powf(a.value() - 1.0) };
            Ok(beta_coefficient(a, n).map_err(err)? / rate)
        };
        let tail = [scaled(1 << 14)?, scaled(1 << 16)?];
        let head = (1..=4096).map(scaled).collect::<Result<Vec<_>, _>>()?;
        let sup = head.iter().copied().fold(0.0, f64::max);
        growth_spread = growth_spread.max(sup / tail[1]).max((tail[1] / tail[0] - 1.0).abs());
    }
    ensure(
        worst <= 1e-7 && monotone && growth_spread.is_finite() && growth_spread < 10.0,
        format!("max rel err {worst:.2e}; sigma increasing: {monotone}; scaled beta sup/tail {growth_spread:.3}"),
    )
}

fn constant_identities() -> Outcome {
    let samples: Vec<Alpha> = (1..=50).map(|k| alpha(1.0 + k as f64 / 51.0)).collect();
    let mut hat = 0.0f64;
    let mut printed = 0.0f64;
    let mut corrected = 0.0f64;
    for &a in &samples {
        let c = biot_savart_constant(a);
        hat = hat.max((point_vortex_constant(a) / (a.value() * c) - 1.0).abs());
        let ratio = constant_ratio(a).map_err(err)?;
        printed = printed.max((printed_constant_ratio(a).map_err(err)? / ratio - 1.0).abs());
        corrected = corrected.max((2.0 * printed_constant_ratio(a).map_err(err)? / ratio - 1.0).abs());
    }
    ensure(
        hat <= 1e-10 && printed <= 1e-10,
        format!(
            "C-hat = alpha C rel err {hat:.2e}; printed ratio identity rel err {printed:.2e} \
             (ratio off by a factor 2); corrected form rel err {corrected:.2e}"
        ),
    )
}

fn canonical_equilibria() -> Outcome {
    let mut families = Vec::new();
    for c in [0.2, 0.4, 0.6, 0.8, 1.0] {
        families.push(CanonicalFamily::CorotatingPair { d: 1.0, c, gamma: 1.0 });
    }
    for (k, d) in [0.25, 0.5, 0.75, 1.0, 1.5].into_iter().enumerate() {
        families.push(CanonicalFamily::TravelingPair { d, gamma: if k % 2 == 0 { 1.0 } else { -1.0 } });
    }
    for a in [0.2, 0.35, 0.5, 0.65, 0.8] {
        families.push(CanonicalFamily::StationaryTripole { a, gamma: 1.0 });
    }
    let (mut residual, mut jac, mut det): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut ranks_ok = true;
    for a in [1.0, 1.5, 1.9] {
        let a = alpha(a);
        for family in &families {
            let config = family.configuration(a).map_err(err)?;
            residual = residual.max(residual_norm(&config).map_err(err)?);
            let report = nondegeneracy_report(&config, Some(&family.free_parameters())).map_err(err)?;
            let codim = if family.vortices() == 3 { 3 } else { 1 };
            ranks_ok &= report.passes && report.rank == 3 && report.codim == codim;
            let fd = equilibrium_jacobian(&config, &family.free_parameters()).map_err(err)?;
            let exact = family.analytic_jacobian(a).map_err(err)?;
            for (p, q) in fd.iter().zip(exact.iter()) {
                if q.abs() > 0.0 {
                    jac = jac.max(((p - q) / q).abs());
                } else {
                    jac = jac.max(p.abs());
                }
            }
            if let (Some(reduced), Some(printed)) = (family.reduced_determinant(a).map_err(err)?, family.printed_determinant(a)) {
                det = det.max((reduced.abs() / printed.abs() - 1.0).abs());
            }
        }
    }
    ensure(
        residual <= 1e-11 && ranks_ok && jac <= 1e-5 && det <= 1e-8,
        format!("residual {residual:.2e}; ranks 3/3/3 codims 1/1/3: {ranks_ok}; jacobian rel err {jac:.2e}; |det| rel err {det:.2e}"),
    )
}

fn dynamics() -> Outcome {
    let d = 1.0;
    let pair = corotating_pair(d, 0.5, 1.0, alpha(1.5)).map_err(err)?;
    let period = 2.0 * PI / pair.omega();
    let orbit = integrate_orbit(&pair, period, period / 4000.0).map_err(err)?;
    let last = orbit.centers.last().ok_or("empty orbit")?;
    let rotation = last
        .iter()
        .zip(pair.centers())
        .map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
        .fold(0.0, f64::max);

    let travel = traveling_pair(1.0, 1.0, alpha(1.5)).map_err(err)?;
    let orbit = integrate_orbit(&travel, 1.0, 1e-2).map_err(err)?;
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
    )
    .map_err(err)?;
    let orbit = integrate_orbit(&free, 10.0, 1e-3).map_err(err)?;
    let e0 = interaction_energy(&free);
    let mut drift: f64 = 0.0;
    for state in &orbit.centers {
        let moved = PointVortexConfiguration::new(
            free.alpha(),
            state.clone(),
            free.circulations().to_vec(),
            0.0,
            0.0,
            MotionKind::Stationary,
        )
        .map_err(err)?;
        drift = drift.max(((interaction_energy(&moved) - e0) / e0).abs());
    }
    ensure(
        rotation <= 1e-6 * d && speed <= 1e-8 && drift <= 1e-6,
        format!("rotation error {rotation:.2e}; speed error {speed:.2e}; energy drift {drift:.2e}"),
    )
}

fn families(a: f64) -> Result<Vec<PointVortexConfiguration>, String> {
    Ok(vec![
        corotating_pair(1.0, 0.5, 1.0, alpha(a)).map_err(err)?,
        traveling_pair(1.0, 1.0, alpha(a)).map_err(err)?,
        stationary_tripole(0.5, 1.0, alpha(a)).map_err(err)?,
    ])
}

fn linearization() -> Outcome {
    let modes = 8;
    let mut worst: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    for a in [1.0, 1.5, 1.9] {
        for config in families(a)? {
            let n = config.len();
            let evaluator = quadrature_evaluator(config.alpha(), modes).map_err(err)?;
            let trivial =
                PatchEnsemble::from_configuration(&config, 0.0, &vec![1.0; n], vec![PatchShape::zero(modes); n])
                    .map_err(err)?;
            let op = SpectralMultiplier::calibrated(&config, modes).map_err(err)?;
            for target in 0..n {
                for m in 2..=modes {
                    let mut direction = vec![PatchShape::zero(modes); n];
                    direction[target] = PatchShape::from_modes(modes, &[(m, 1.0, -0.5)]).map_err(err)?;
                    let fd = gateaux_fd(&evaluator, &trivial, &direction, 1e-4).map_err(err)?;
                    worst = worst.max(fd.difference(&op.apply(&direction).map_err(err)?, 1.0).sup_norm());
                }
            }
            // Cross-patch block: response of patch 1 to a cos 2x perturbation of patch 0.
            let spectral = Evaluator::new(config.alpha(), EvaluatorSettings::new(modes)).map_err(err)?;
            let mut direction = vec![PatchShape::zero(modes); n];
            direction[0] = PatchShape::from_modes(modes, &[(2, 1.0, 0.0)]).map_err(err)?;
            let cross = |eps: f64| -> Result<f64, String> {
                let ensemble =
                    PatchEnsemble::from_configuration(&config, eps, &vec![1.0; n], vec![PatchShape::zero(modes); n])
                        .map_err(err)?;
                let fd = gateaux_fd(&spectral, &ensemble, &direction, 1e-3).map_err(err)?;
                Ok(fd.patches[1].modes_sup())
            };
            let (coarse, fine) = (cross(0.02)?, cross(0.01)?);
            if cross(0.0)? != 0.0 {
                return Err("cross-patch block nonzero at eps = 0".into());
            }
            min_order = min_order.min((coarse / fine).log2());
        }
    }
    ensure(
        worst <= 1e-5 && min_order >= 0.9,
        format!("max |FD - diagonal| {worst:.2e} over n = 2..8; cross-patch order in eps >= {min_order:.2}"),
    )
}

trait ModesSup {
    fn modes_sup(&self) -> f64;
}

impl ModesSup for gsqg_core::contour::ModeCoefficients {
    fn modes_sup(&self) -> f64 {
        (1..=self.modes()).fold(self.mean.abs(), |m, n| {
            let (s, c) = self.mode(n);
            m.max(s.abs()).max(c.abs())
        })
    }
}

fn integral_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst = [0.0f64; 5];
    for k in 0..20 {
        let a = [1.0, 1.25, 1.5, 1.75][k % 4];
        let ens = random_ensemble(&mut rng, MotionKind::Traveling, alpha(a), 8);
        let values = Evaluator::for_ensemble(&ens).and_then(|e| e.values(&ens)).map_err(err)?;
        let t = translation_identity(&ens, &values).map_err(err)?;
        worst[0] = worst[0].max(t[0].hypot(t[1]));

        let ens = random_ensemble(&mut rng, MotionKind::Rotating, alpha(a), 8);
        let values = Evaluator::for_ensemble(&ens).and_then(|e| e.values(&ens)).map_err(err)?;
        worst[1] = worst[1].max(rotation_identity(&ens, &values).map_err(err)?.abs());

        let ens = random_ensemble(&mut rng, MotionKind::Stationary, alpha(a), 8);
        let values = Evaluator::for_ensemble(&ens).and_then(|e| e.values(&ens)).map_err(err)?;
        let v = stationary_identity_vector(&ens, &values).map_err(err)?;
        worst[2] = worst[2].max(v.iter().fold(0.0, |m, c| m.max(c.abs())));

        let motion = [MotionKind::Rotating, MotionKind::Traveling, MotionKind::Stationary][k % 3];
        let ens = random_ensemble(&mut rng, motion, alpha(a), 8);
        let m = stream_moment_identities(&ens, 64).map_err(err)?;
        worst[3] = worst[3].max(m.scalar.abs());
        worst[4] = worst[4].max(m.vector[0].hypot(m.vector[1]));
    }
    ensure(
        worst.iter().all(|&w| w <= 1e-7),
        format!(
            "20 ensembles per case: translation {:.2e}, rotation {:.2e}, stationary {:.2e}, stream moments {:.2e} / {:.2e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

const BRANCH_MODES: usize = 16;

fn branch_settings() -> ContinuationSettings {
    ContinuationSettings {
        mode_cutoff: BRANCH_MODES,
        ..ContinuationSettings::default()
    }
}

fn branches() -> Result<Vec<(String, ContinuationRun)>, String> {
    let mut out = Vec::new();
    for a in [1.0, 1.5] {
        for config in families(a)? {
            let label = format!("{:?} alpha={a}", config.motion());
            let run = continue_branch(&config, &branch_settings()).map_err(|e| format!("{label}: {e}"))?;
            out.push((label, run));
        }
    }
    Ok(out)
}

/// Mode-2 slope predicted from the finite-difference ∂_ε oracle.
fn oracle_prediction(run: &ContinuationRun) -> Result<Vec<(f64, f64)>, String> {
    let branch = &run.branch;
    let config = &branch.configuration;
    let measured = epsilon_derivative(config, &branch.scales, 4).map_err(err)?;
    let negated = measured.combined(-1.0, &measured, 0.0);
    let op = SpectralMultiplier::calibrated(config, 4).map_err(err)?;
    let shapes = op.solve(&negated, 1e-6).map_err(err)?;
    Ok(shapes.iter().map(|s| s.coefficient(2)).collect())
}

fn desingularization(runs: &[(String, ContinuationRun)]) -> Outcome {
    let mut residual: f64 = 0.0;
    let mut curvature = f64::INFINITY;
    let mut slope_error: f64 = 0.0;
    let mut lambda_slope: f64 = 0.0;
    for (label, run) in runs {
        let branch = &run.branch;
        let report = branch_report(branch).map_err(err)?;
        for entry in &branch.entries {
            residual = residual.max(entry.residual_norm);
            curvature = curvature.min(entry.min_curvature);
        }
        for (fit, predicted) in report.mode2_slope.iter().zip(oracle_prediction(run)?) {
            let scale = predicted.0.hypot(predicted.1);
            if scale == 0.0 {
                return Err(format!("{label}: oracle predicts no mode-2 shape"));
            }
            slope_error = slope_error.max((fit.0 - predicted.0).hypot(fit.1 - predicted.1) / scale);
        }
        lambda_slope = report.lambda_slope.iter().fold(lambda_slope, |m, s| m.max(s.abs()));
    }
    ensure(
        residual <= 1e-8 && curvature > 0.0 && slope_error <= 0.05 && lambda_slope <= 1e-3,
        format!(
            "{} branches to eps = 0.02 (M = {BRANCH_MODES}): residual {residual:.2e}; min curvature {curvature:.4}; \
             mode-2 slope rel err {slope_error:.2e}; lambda slope {lambda_slope:.2e}",
            runs.len()
        ),
    )
}

fn local_uniqueness(runs: &[(String, ContinuationRun)]) -> Outcome {
    let mut deviation: f64 = 0.0;
    let mut failures = 0;
    let mut entries = 0;
    for (k, (_, run)) in runs.iter().enumerate() {
        for report in uniqueness_probe(run, 10, 0.1, 1000 + k as u64).map_err(err)? {
            deviation = deviation.max(report.max_deviation);
            failures += report.failures;
            entries += 1;
        }
    }
    ensure(
        failures == 0 && deviation <= 1e-8,
        format!("{entries} entries x 10 restarts: max deviation {deviation:.2e}; failed restarts {failures}"),
    )
}

fn report(id: usize, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let within = elapsed <= limit;
    let (pass, detail) = match outcome {
        Ok(detail) => (within, detail),
        Err(detail) => (false, detail),
    };
    println!(
        "criterion {id} {}: {name}: {detail} [{:.1} s, limit {} s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn main() -> ExitCode {
    let mut passed = Vec::new();
    passed.push(report(1, "spectral coefficients", Duration::from_secs(30), spectral_coefficients));
    passed.push(report(2, "constant identities", Duration::from_secs(1), constant_identities));
    passed.push(report(3, "canonical equilibria", Duration::from_secs(5), canonical_equilibria));
    passed.push(report(4, "dynamics consistency", Duration::from_secs(10), dynamics));
    passed.push(report(5, "linearization", Duration::from_secs(60), linearization));
    passed.push(report(6, "integral identities", Duration::from_secs(120), integral_identities));

    let start = Instant::now();
    let runs = branches();
    let continuation_time = start.elapsed();
    match &runs {
        Ok(runs) => {
            passed.push(report(7, "desingularization", Duration::from_secs(600).saturating_sub(continuation_time), || {
                desingularization(runs)
            }));
            passed.push(report(8, "local uniqueness", Duration::from_secs(600), || local_uniqueness(runs)));
        }
        Err(e) => {
            for (id, name) in [(7, "desingularization"), (8, "local uniqueness")] {
                passed.push(report(id, name, Duration::from_secs(600), || Err(e.clone())));
            }
        }
    }
    println!("continuation runs: {:.1} s (counted against criterion 7)", continuation_time.as_secs_f64());

    let failed: Vec<usize> = passed.iter().enumerate().filter(|(_, &p)| !p).map(|(i, _)| i + 1).collect();
    println!("{} of {} criteria pass", passed.len() - failed.len(), passed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
