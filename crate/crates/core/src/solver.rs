//! ε-continuation from a point-vortex equilibrium to vortex-patch equilibria.
//!
//! The unknowns are the shape coefficients `a_n, d_n` (`2 ≤ n ≤ M`) of every
//! patch together with a non-degenerate subset λ₁ of the point-vortex
//! parameters; the equations are the modes `1..=M` of every `F_i`. There are
//! one (rotating, traveling) or three (stationary) more equations than
//! unknowns. Those surplus rows are consistent because of the integral
//! identities, so the corrector solves in the least-squares sense and checks
//! the identities afterwards.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{
    min_curvature, rotation_identity, translation_identity, Change, ContourError, Evaluator, EvaluatorSettings, Patch,
    PatchEnsemble, PatchShape, ResidualSpectrum, TermValues, ADMISSIBILITY_SAMPLES,
};
use crate::linop::{first_order_shapes, LinopError};
use crate::pointvortex::{nondegeneracy_report, NondegeneracyReport, PointVortexConfiguration, VortexError};

/// Smallest accepted `σ_min/σ_max` of the corrector Jacobian.
pub const RANK_THRESHOLD: f64 = 1e-12;
/// Most step halvings per Gauss-Newton iteration.
pub const MAX_HALVINGS: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid continuation settings: {0}")]
    InvalidSettings(String),
    #[error("point-vortex configuration is degenerate (rank {rank}, codim {codim})")]
    Degenerate { rank: usize, codim: usize },
    #[error("corrector did not converge at eps = {epsilon} after {iterations} iterations (residual {residual:e})")]
    Diverged { epsilon: f64, iterations: usize, residual: f64 },
    #[error("corrector Jacobian is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("identity residual {value:e} exceeds {limit:e} at eps = {epsilon}")]
    IdentityViolation { epsilon: f64, value: f64, limit: f64 },
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Linop(#[from] LinopError),
    #[error(transparent)]
    Vortex(#[from] VortexError),
}

/// Discretization and iteration controls of the continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationSettings {
    pub mode_cutoff: usize,
    /// Targets `ε_1, ε_2, …`, strictly monotone away from 0 (a leading 0 is allowed).
    pub epsilon_schedule: Vec<f64>,
    /// Bound on the residual sup-norm.
    pub corrector_tol: f64,
    pub max_corrector_iters: usize,
    /// Relative finite-difference step of the Jacobian.
    pub fd_jacobian_step: f64,
    /// Accuracy attributed to the quadratures; identities must stay below 100× this.
    pub quadrature_tol: f64,
    /// Relative sizes `b_i`; all ones when absent.
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    /// λ₁ as indices into the parameter vector; searched when absent.
    #[serde(default)]
    pub free_parameters: Option<Vec<usize>>,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            mode_cutoff: 32,
            epsilon_schedule: vec![0.0, 0.005, 0.01, 0.015, 0.02],
            corrector_tol: 1e-10,
            max_corrector_iters: 12,
            fd_jacobian_step: 1e-6,
            quadrature_tol: 1e-9,
            scales: None,
            free_parameters: None,
        }
    }
}

impl ContinuationSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: &str| Err(SolverError::InvalidSettings(msg.to_string()));
        if self.mode_cutoff < 2 {
            return bad("mode_cutoff must be at least 2");
        }
        if self.epsilon_schedule.is_empty() {
            return bad("epsilon_schedule is empty");
        }
        if self.epsilon_schedule.iter().any(|e| !e.is_finite()) {
            return bad("epsilon_schedule has a non-finite entry");
        }
        let magnitudes: Vec<f64> = self.epsilon_schedule.iter().map(|e| e.abs()).collect();
        let signs_agree = self.epsilon_schedule.iter().filter(|&&e| e != 0.0).all(|e| e.signum() > 0.0)
            || self.epsilon_schedule.iter().filter(|&&e| e != 0.0).all(|e| e.signum() < 0.0);
        if !signs_agree || magnitudes.windows(2).any(|w| w[1] <= w[0]) {
            return bad("epsilon_schedule must be strictly monotone from 0");
        }
        if self.epsilon_schedule.iter().skip(1).any(|&e| e == 0.0) {
            return bad("only the first target may be 0");
        }
        for (name, v) in [
            ("corrector_tol", self.corrector_tol),
            ("fd_jacobian_step", self.fd_jacobian_step),
            ("quadrature_tol", self.quadrature_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SolverError::InvalidSettings(format!("{name} must be positive")));
            }
        }
        if self.max_corrector_iters == 0 {
            return bad("max_corrector_iters must be positive");
        }
        if let Some(scales) = &self.scales {
            if scales.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
                return bad("scales must be positive");
            }
        }
        Ok(())
    }
}

/// One converged point of the branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEntry {
    pub epsilon: f64,
    pub ensemble: PatchEnsemble,
    /// Values of the free parameters λ₁.
    pub lambda_free: Vec<f64>,
    /// Sup-norm of modes `1..=M` of the residual.
    pub residual_norm: f64,
    /// Largest mode-0 coefficient, a diagnostic.
    pub mean_residual: f64,
    /// Identities applicable to the motion kind (rotation; translation; or both).
    pub identity_residuals: Vec<f64>,
    pub min_curvature: f64,
    pub corrector_iters: usize,
    /// Residual sup-norm before each corrector iteration and after the last.
    pub residual_history: Vec<f64>,
}

/// A computed branch together with the data that seeded it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBranch {
    pub configuration: PointVortexConfiguration,
    pub free_parameters: Vec<usize>,
    pub scales: Vec<f64>,
    pub settings: ContinuationSettings,
    pub entries: Vec<BranchEntry>,
}

/// Maps between the flat unknown vector and ensembles.
#[derive(Debug, Clone)]
struct Problem {
    config: PointVortexConfiguration,
    free: Vec<usize>,
    scales: Vec<f64>,
    modes: usize,
}

impl Problem {
    fn shape_len(&self) -> usize {
        2 * (self.modes - 1)
    }

    fn pack(&self, shapes: &[PatchShape], lambda_free: &[f64]) -> DVector<f64> {
        let mut out: Vec<f64> = shapes.iter().flat_map(|s| s.resized(self.modes).to_flat()).collect();
        out.extend_from_slice(lambda_free);
        DVector::from_vec(out)
    }

    fn shapes(&self, u: &DVector<f64>) -> Vec<PatchShape> {
        let len = self.shape_len();
        (0..self.config.len())
            .map(|i| PatchShape::from_flat(&u.as_slice()[i * len..(i + 1) * len]))
            .collect()
    }

    fn lambda_free<'a>(&self, u: &'a DVector<f64>) -> &'a [f64] {
        &u.as_slice()[self.config.len() * self.shape_len()..]
    }

    fn ensemble(&self, epsilon: f64, u: &DVector<f64>) -> PatchEnsemble {
        let mut lambda = self.config.parameters();
        for (&k, &v) in self.free.iter().zip(self.lambda_free(u)) {
            lambda[k] = v;
        }
        let n = self.config.len();
        let layout = self.config.layout();
        let patches = self
            .shapes(u)
            .into_iter()
            .enumerate()
            .map(|(i, shape)| Patch {
                shape,
                scale: self.scales[i],
                center: [lambda[layout.center(i, 0)], lambda[layout.center(i, 1)]],
                circulation: lambda[layout.circulation(i)],
            })
            .collect::<Vec<_>>();
        debug_assert_eq!(patches.len(), n);
        PatchEnsemble::new_unchecked(self.config.alpha(), epsilon, patches, lambda[layout.omega()], lambda[layout.speed()])
    }

    /// Which cached terms a perturbation of unknown `k` invalidates.
    fn change(&self, k: usize) -> Change {
        let len = self.shape_len();
        let n = self.config.len();
        if k < n * len {
            return Change::Shape(k / len);
        }
        let param = self.free[k - n * len];
        if param < 2 * n {
            Change::Center(param % n)
        } else if param < 3 * n {
            Change::Circulation(param - 2 * n)
        } else {
            Change::Motion
        }
    }
}

/// Least-squares Gauss-Newton update `argmin |J δ + r|` by SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussNewtonUpdate {
    pub step: DVector<f64>,
    /// `σ_min / σ_max` of the Jacobian.
    pub singular_ratio: f64,
}

/// Solve the linearized least-squares problem; fails when `J` loses column rank.
pub fn gauss_newton_step(jacobian: &DMatrix<f64>, residual: &DVector<f64>) -> Result<GaussNewtonUpdate, SolverError> {
    let svd = jacobian.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if ratio < RANK_THRESHOLD {
        return Err(SolverError::RankDeficient { ratio });
    }
    let step = svd
        .solve(&(-residual), 0.0)
        .map_err(|e| SolverError::InvalidSettings(e.to_string()))?;
    Ok(GaussNewtonUpdate {
        step,
        singular_ratio: ratio,
    })
}

/// Residual evaluation and Jacobian assembly at fixed ε.
struct Corrector<'a> {
    problem: &'a Problem,
    evaluator: &'a Evaluator,
    epsilon: f64,
    step: f64,
}

impl Corrector<'_> {
    fn terms(&self, u: &DVector<f64>) -> Result<TermValues, SolverError> {
        Ok(self.evaluator.terms(&self.problem.ensemble(self.epsilon, u))?)
    }

    fn spectrum(&self, terms: &TermValues) -> ResidualSpectrum {
        self.evaluator.project(&terms.total(self.evaluator.grid()))
    }

    /// Central-difference Jacobian; columns are independent and evaluated in parallel.
    fn jacobian(&self, u: &DVector<f64>, base: &TermValues) -> Result<DMatrix<f64>, SolverError> {
        let columns: Vec<Result<Vec<f64>, SolverError>> = (0..u.len())
            .into_par_iter()
            .map(|k| {
                let h = self.step * u[k].abs().max(1.0);
                let change = [self.problem.change(k)];
                let probe = |sign: f64| -> Result<Vec<f64>, SolverError> {
                    let mut v = u.clone();
                    v[k] += sign * h;
                    let ensemble = self.problem.ensemble(self.epsilon, &v);
                    let terms = self.evaluator.update_terms(&ensemble, base, &change)?;
                    Ok(self.spectrum(&terms).flatten())
                };
                let plus = probe(1.0)?;
                let minus = probe(-1.0)?;
                Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect())
            })
            .collect();
        let columns = columns.into_iter().collect::<Result<Vec<_>, _>>()?;
        let rows = columns.first().map_or(0, Vec::len);
        Ok(DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][r]))
    }

    /// Damped Gauss-Newton from `start`. With `frozen`, the given Jacobian is
    /// reused (chord iteration) instead of being refreshed every iteration.
    fn solve(
        &self,
        start: DVector<f64>,
        tolerance: f64,
        max_iters: usize,
        frozen: Option<&DMatrix<f64>>,
    ) -> Result<CorrectorOutcome, SolverError> {
        let mut u = start;
        let mut terms = self.terms(&u)?;
        let mut spectrum = self.spectrum(&terms);
        let mut norm = spectrum.sup_norm();
        let mut history = vec![norm];
        let mut jacobian = None;
        let mut iterations = 0;
        while norm > tolerance {
            if iterations == max_iters {
                return Err(SolverError::Diverged {
                    epsilon: self.epsilon,
                    iterations,
                    residual: norm,
                });
            }
            iterations += 1;
            let j = match frozen {
                Some(j) => j.clone(),
                None => self.jacobian(&u, &terms)?,
            };
            let update = gauss_newton_step(&j, &DVector::from_vec(spectrum.flatten()))?;
            jacobian = Some(j);
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let trial = &u + &update.step * scale;
                let trial_ensemble = self.problem.ensemble(self.epsilon, &trial);
                if trial_ensemble.validate().is_ok() {
                    let trial_terms = self.evaluator.terms(&trial_ensemble)?;
                    let trial_spectrum = self.spectrum(&trial_terms);
                    let trial_norm = trial_spectrum.sup_norm();
                    if trial_norm < norm {
                        accepted = Some((trial, trial_terms, trial_spectrum, trial_norm));
                        break;
                    }
                }
                scale *= 0.5;
            }
            let Some((next, next_terms, next_spectrum, next_norm)) = accepted else {
                return Err(SolverError::Diverged {
                    epsilon: self.epsilon,
                    iterations,
                    residual: norm,
                });
            };
            u = next;
            terms = next_terms;
            spectrum = next_spectrum;
            norm = next_norm;
            history.push(norm);
        }
        Ok(CorrectorOutcome {
            solution: u,
            terms,
            spectrum,
            iterations,
            history,
            jacobian,
        })
    }
}

struct CorrectorOutcome {
    solution: DVector<f64>,
    terms: TermValues,
    spectrum: ResidualSpectrum,
    iterations: usize,
    history: Vec<f64>,
    jacobian: Option<DMatrix<f64>>,
}

/// Identity functionals applicable to the motion kind, evaluated on `F`.
fn identity_residuals(ensemble: &PatchEnsemble, evaluator: &Evaluator, terms: &TermValues) -> Result<Vec<f64>, SolverError> {
    let values = terms.total(evaluator.grid());
    let mut out = Vec::new();
    if ensemble.speed() == 0.0 {
        out.push(rotation_identity(ensemble, &values)?);
    }
    if ensemble.omega() == 0.0 {
        out.extend(translation_identity(ensemble, &values)?);
    }
    Ok(out)
}

fn ensemble_curvature(ensemble: &PatchEnsemble) -> f64 {
    ensemble
        .patches()
        .iter()
        .map(|p| min_curvature(&p.shape, ensemble.epsilon(), p.scale, ensemble.alpha(), ADMISSIBILITY_SAMPLES))
        .fold(f64::INFINITY, f64::min)
}

/// State needed to re-run the corrector at a converged entry.
#[derive(Debug, Clone)]
pub struct EntryProbe {
    pub epsilon: f64,
    pub predictor: DVector<f64>,
    pub solution: DVector<f64>,
    pub jacobian: Option<DMatrix<f64>>,
}

/// A branch with the per-entry corrector data used by [`uniqueness_probe`].
#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub branch: SolutionBranch,
    pub probes: Vec<EntryProbe>,
}

fn setup(config: &PointVortexConfiguration, settings: &ContinuationSettings) -> Result<(Problem, NondegeneracyReport), SolverError> {
    settings.validate()?;
    let report = nondegeneracy_report(config, settings.free_parameters.as_deref())?;
    if !report.passes {
        return Err(SolverError::Degenerate {
            rank: report.rank,
            codim: report.codim,
        });
    }
    let scales = settings.scales.clone().unwrap_or_else(|| vec![1.0; config.len()]);
    if scales.len() != config.len() {
        return Err(SolverError::InvalidSettings("one scale per vortex".into()));
    }
    let problem = Problem {
        config: config.clone(),
        free: report.free_parameter_indices.clone(),
        scales,
        modes: settings.mode_cutoff,
    };
    Ok((problem, report))
}

/// Continuation along `settings.epsilon_schedule`, keeping the corrector data.
pub fn continue_branch(config: &PointVortexConfiguration, settings: &ContinuationSettings) -> Result<ContinuationRun, SolverError> {
    let (problem, _) = setup(config, settings)?;
    let evaluator = Evaluator::new(config.alpha(), EvaluatorSettings::new(settings.mode_cutoff))?;
    let slope_shapes = first_order_shapes(config, &problem.scales, settings.mode_cutoff)?;
    let slope = problem.pack(&slope_shapes, &vec![0.0; problem.free.len()]);
    let lambda_star: Vec<f64> = problem.free.iter().map(|&k| config.parameters()[k]).collect();
    let mut previous = problem.pack(&vec![PatchShape::zero(settings.mode_cutoff); config.len()], &lambda_star);
    let mut previous_eps = 0.0;
    let mut entries = Vec::with_capacity(settings.epsilon_schedule.len());
    let mut probes = Vec::with_capacity(settings.epsilon_schedule.len());
    let identity_limit = 100.0 * settings.quadrature_tol;
    for &epsilon in &settings.epsilon_schedule {
        let predictor = &previous + &slope * (epsilon - previous_eps);
        let corrector = Corrector {
            problem: &problem,
            evaluator: &evaluator,
            epsilon,
            step: settings.fd_jacobian_step,
        };
        let outcome = corrector.solve(predictor.clone(), settings.corrector_tol, settings.max_corrector_iters, None)?;
        let ensemble = problem.ensemble(epsilon, &outcome.solution);
        ensemble.validate()?;
        let identities = identity_residuals(&ensemble, &evaluator, &outcome.terms)?;
        if let Some(&worst) = identities.iter().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
            if worst.abs() > identity_limit {
                return Err(SolverError::IdentityViolation {
                    epsilon,
                    value: worst.abs(),
                    limit: identity_limit,
                });
            }
        }
        entries.push(BranchEntry {
            epsilon,
            lambda_free: problem.lambda_free(&outcome.solution).to_vec(),
            residual_norm: outcome.spectrum.sup_norm(),
            mean_residual: outcome.spectrum.mean_norm(),
            identity_residuals: identities,
            min_curvature: ensemble_curvature(&ensemble),
            corrector_iters: outcome.iterations,
            residual_history: outcome.history,
            ensemble,
        });
        probes.push(EntryProbe {
            epsilon,
            predictor,
            solution: outcome.solution.clone(),
            jacobian: outcome.jacobian,
        });
        previous = outcome.solution;
        previous_eps = epsilon;
    }
    Ok(ContinuationRun {
        branch: SolutionBranch {
            configuration: config.clone(),
            free_parameters: problem.free,
            scales: problem.scales,
            settings: settings.clone(),
            entries,
        },
        probes,
    })
}

/// Desingularize `config` along the schedule of `settings`.
pub fn desingularize(config: &PointVortexConfiguration, settings: &ContinuationSettings) -> Result<SolutionBranch, SolverError> {
    Ok(continue_branch(config, settings)?.branch)
}

/// Outcome of restarting the corrector from perturbed predictors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub epsilon: f64,
    pub restarts: usize,
    /// Largest `|u_restart - u|_∞` over restarts that converged.
    pub max_deviation: f64,
    /// Restarts whose corrector failed.
    pub failures: usize,
}

/// Restart the corrector at every entry from `restarts` predictors perturbed
/// by random vectors of norm `relative_size·|predictor|`.
///
/// Each restart iterates with the entry's converged Jacobian (chord steps);
/// the fixed point is the same as for full Gauss-Newton.
pub fn uniqueness_probe(
    run: &ContinuationRun,
    restarts: usize,
    relative_size: f64,
    seed: u64,
) -> Result<Vec<UniquenessReport>, SolverError> {
    let branch = &run.branch;
    let settings = &branch.settings;
    let config = &branch.configuration;
    let problem = Problem {
        config: config.clone(),
        free: branch.free_parameters.clone(),
        scales: branch.scales.clone(),
        modes: settings.mode_cutoff,
    };
    let evaluator = Evaluator::new(config.alpha(), EvaluatorSettings::new(settings.mode_cutoff))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(run.probes.len());
    for probe in &run.probes {
        let corrector = Corrector {
            problem: &problem,
            evaluator: &evaluator,
            epsilon: probe.epsilon,
            step: settings.fd_jacobian_step,
        };
        let frozen = match &probe.jacobian {
            Some(j) => j.clone(),
            None => corrector.jacobian(&probe.solution, &corrector.terms(&probe.solution)?)?,
        };
        let size = relative_size * probe.predictor.norm();
        let mut max_deviation: f64 = 0.0;
        let mut failures = 0;
        for _ in 0..restarts {
            let direction = DVector::from_fn(probe.predictor.len(), |_, _| rng.random_range(-1.0..1.0));
            let start = &probe.predictor + direction.normalize() * size;
            match corrector.solve(start, settings.corrector_tol, 4 * settings.max_corrector_iters, Some(&frozen)) {
                Ok(outcome) => {
                    max_deviation = max_deviation.max((&outcome.solution - &probe.solution).amax());
                }
                Err(_) => failures += 1,
            }
        }
        reports.push(UniquenessReport {
            epsilon: probe.epsilon,
            restarts,
            max_deviation,
            failures,
        });
    }
    Ok(reports)
}

/// Per-entry diagnostics of a branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub epsilon: f64,
    pub residual_norm: f64,
    pub identity_max: f64,
    pub min_curvature: f64,
    pub corrector_iters: usize,
    /// `(Σ_n (a_n² + d_n²))^{1/2}` over all patches.
    pub shape_norm: f64,
    /// `(a_2, d_2) / ε` per patch.
    pub mode2_over_eps: Vec<(f64, f64)>,
}

/// Branch-level diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub rows: Vec<ReportRow>,
    /// Quadratic-fit slope of `(a_2, d_2)` at `ε = 0`, per patch.
    pub mode2_slope: Vec<(f64, f64)>,
    /// Prediction of the first-order theory, per patch.
    pub mode2_prediction: Vec<(f64, f64)>,
    /// `|fit - prediction| / |prediction|`, largest over patches.
    pub mode2_relative_error: f64,
    /// Quadratic-fit slope of λ₁ at `ε = 0`, per free parameter.
    pub lambda_slope: Vec<f64>,
    /// Log-log slope of `|f|` against `ε` over the last two entries.
    pub shape_order: Option<f64>,
    /// Smallest `ε` at which the minimum curvature is not positive.
    pub convexity_lost_at: Option<f64>,
}

/// Slope at 0 of the quadratic through `(0, y0)`, `(e1, y1)`, `(e2, y2)`;
/// with a single sample, the secant slope.
fn slope_at_zero(y0: f64, samples: &[(f64, f64)]) -> f64 {
    match samples {
        [] => 0.0,
        [(e1, y1)] => (y1 - y0) / e1,
        [(e1, y1), (e2, y2), ..] => ((y1 - y0) * e2 * e2 - (y2 - y0) * e1 * e1) / (e1 * e2 * (e2 - e1)),
    }
}

pub fn branch_report(branch: &SolutionBranch) -> Result<BranchReport, SolverError> {
    let config = &branch.configuration;
    let patches = config.len();
    let rows: Vec<ReportRow> = branch
        .entries
        .iter()
        .map(|e| {
            let shapes = e.ensemble.shapes();
            ReportRow {
                epsilon: e.epsilon,
                residual_norm: e.residual_norm,
                identity_max: e.identity_residuals.iter().fold(0.0, |m, v| m.max(v.abs())),
                min_curvature: e.min_curvature,
                corrector_iters: e.corrector_iters,
                shape_norm: shapes.iter().map(|s| s.sobolev_norm(0)).sum::<f64>().sqrt(),
                mode2_over_eps: shapes
                    .iter()
                    .map(|s| {
                        let (a, d) = s.coefficient(2);
                        if e.epsilon == 0.0 {
                            (0.0, 0.0)
                        } else {
                            (a / e.epsilon, d / e.epsilon)
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    let nonzero: Vec<&BranchEntry> = branch.entries.iter().filter(|e| e.epsilon != 0.0).collect();
    let modes = branch.settings.mode_cutoff;
    let prediction_shapes = if nonzero.is_empty() {
        vec![PatchShape::zero(modes); patches]
    } else {
        first_order_shapes(config, &branch.scales, modes)?
    };
    let mut mode2_slope = Vec::with_capacity(patches);
    let mut mode2_prediction = Vec::with_capacity(patches);
    let mut mode2_relative_error: f64 = 0.0;
    for i in 0..patches {
        let series = |pick: fn((f64, f64)) -> f64| -> Vec<(f64, f64)> {
            nonzero.iter().map(|e| (e.epsilon, pick(e.ensemble.patches()[i].shape.coefficient(2)))).collect()
        };
        let fit = (slope_at_zero(0.0, &series(|c| c.0)), slope_at_zero(0.0, &series(|c| c.1)));
        let predicted = prediction_shapes[i].coefficient(2);
        let scale = predicted.0.hypot(predicted.1);
        if scale > 0.0 {
            mode2_relative_error = mode2_relative_error.max((fit.0 - predicted.0).hypot(fit.1 - predicted.1) / scale);
        }
        mode2_slope.push(fit);
        mode2_prediction.push(predicted);
    }
    let lambda_star: Vec<f64> = branch.free_parameters.iter().map(|&k| config.parameters()[k]).collect();
    let lambda_slope = (0..lambda_star.len())
        .map(|k| {
            let samples: Vec<(f64, f64)> = nonzero.iter().map(|e| (e.epsilon, e.lambda_free[k])).collect();
            slope_at_zero(lambda_star[k], &samples)
        })
        .collect();
    let shape_order = match rows.iter().filter(|r| r.epsilon != 0.0 && r.shape_norm > 0.0).collect::<Vec<_>>()[..] {
        [.., a, b] => Some((b.shape_norm / a.shape_norm).ln() / (b.epsilon.abs() / a.epsilon.abs()).ln()),
        _ => None,
    };
    let convexity_lost_at = rows.iter().find(|r| r.min_curvature <= 0.0).map(|r| r.epsilon);
    Ok(BranchReport {
        rows,
        mode2_slope,
        mode2_prediction,
        mode2_relative_error,
        lambda_slope,
        shape_order,
        convexity_lost_at,
    })
}
