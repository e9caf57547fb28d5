//! Continuation of a point-vortex equilibrium into a branch of patch V-states.

use gsqg_core::contour::{boundary_samples, PatchEnsemble, PatchShape};
use gsqg_core::pointvortex::PointVortexConfiguration;
use gsqg_core::solver::{branch_report, continue_branch, uniqueness_probe, BranchReport, SolutionBranch, UniquenessReport};
use serde::Serialize;

use crate::config::VstateConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VstateOutput {
    pub branch: SolutionBranch,
    pub report: BranchReport,
    pub uniqueness: Option<Vec<UniquenessReport>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportCsvRow {
    pub epsilon: f64,
    pub patch: usize,
    pub residual_norm: f64,
    pub identity_max: f64,
    pub min_curvature: f64,
    pub corrector_iters: usize,
    pub shape_norm: f64,
    pub a2_over_eps: f64,
    pub d2_over_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub patch: usize,
    pub x: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub z1: f64,
    pub z2: f64,
    pub kappa: f64,
}

/// Circular patches must already be disjoint at every target size.
fn check_disjoint(config: &VstateConfig, vortices: &PointVortexConfiguration) -> Result<(), CliError> {
    let scales = config
        .continuation
        .scales
        .clone()
        .unwrap_or_else(|| vec![1.0; vortices.len()]);
    if scales.len() != vortices.len() {
        return Err(CliError::Config("continuation.scales needs one entry per vortex".into()));
    }
    let modes = config.continuation.mode_cutoff;
    for &epsilon in &config.continuation.epsilon_schedule {
        PatchEnsemble::from_configuration(vortices, epsilon, &scales, vec![PatchShape::zero(modes); vortices.len()])
            .map_err(|e| CliError::Config(format!("patches are not disjoint at eps = {epsilon}: {e}")))?;
    }
    Ok(())
}

fn report_rows(report: &BranchReport) -> Vec<ReportCsvRow> {
    report
        .rows
        .iter()
        .flat_map(|row| {
            row.mode2_over_eps.iter().enumerate().map(move |(patch, &(a, d))| ReportCsvRow {
                epsilon: row.epsilon,
                patch,
                residual_norm: row.residual_norm,
                identity_max: row.identity_max,
                min_curvature: row.min_curvature,
                corrector_iters: row.corrector_iters,
                shape_norm: row.shape_norm,
                a2_over_eps: a,
                d2_over_eps: d,
            })
        })
        .collect()
}

pub fn run(config: &VstateConfig, seed: u64, sink: &Sink) -> Result<(), CliError> {
    let vortices = config.family.configuration(config.alpha)?;
    check_disjoint(config, &vortices)?;
    let run = continue_branch(&vortices, &config.continuation)?;
    let report = branch_report(&run.branch)?;
    let uniqueness = config
        .uniqueness
        .map(|u| uniqueness_probe(&run, u.restarts, u.relative_size, seed))
        .transpose()?;

    for (k, entry) in run.branch.entries.iter().enumerate() {
        let rows: Vec<BoundaryRow> = boundary_samples(&entry.ensemble, config.boundary_samples)
            .into_iter()
            .map(|s| BoundaryRow {
                patch: s.patch,
                x: s.x,
                radius: s.radius,
                z1: s.point[0],
                z2: s.point[1],
                kappa: s.curvature,
            })
            .collect();
        sink.csv(&format!("boundary_{k:03}.csv"), &rows)?;
    }
    sink.csv("report.csv", &report_rows(&report))?;
    let output = VstateOutput {
        branch: run.branch,
        report,
        uniqueness,
    };
    let path = sink.json("branch.json", &output)?;

    sink.say(format!("branch written to {}", path.display()));
    sink.say(format!(
        "{:>10} {:>12} {:>12} {:>12} {:>6}",
        "eps", "residual", "identity", "min kappa", "iters"
    ));
    for row in &output.report.rows {
        sink.say(format!(
            "{:>10.5} {:>12.3e} {:>12.3e} {:>12.6} {:>6}",
            row.epsilon, row.residual_norm, row.identity_max, row.min_curvature, row.corrector_iters
        ));
    }
    if let Some(eps) = output.report.convexity_lost_at {
        sink.say(format!("convexity lost at eps = {eps}"));
    }
    if let Some(reports) = &output.uniqueness {
        let worst = reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
        let failures: usize = reports.iter().map(|r| r.failures).sum();
        sink.say(format!("uniqueness: max deviation {worst:.3e}; failed restarts {failures}"));
    }
    Ok(())
}
