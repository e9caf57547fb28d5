//! Canonical point-vortex equilibrium: residual, Jacobians, rank report and orbit.

use gsqg_core::pointvortex::{
    equilibrium_jacobian, equilibrium_residual, integrate_orbit, nondegeneracy_report, residual_norm, vortex_velocity,
    split_report, CanonicalFamily, NondegeneracyReport, ParameterLayout, Point,
};
use gsqg_core::Alpha;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::PointVortexRunConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameter {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointVortexReport {
    pub alpha: Alpha,
    pub family: CanonicalFamily,
    pub parameters: Vec<Parameter>,
    pub omega: f64,
    pub speed: f64,
    pub velocities: Vec<Point>,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub free_parameters: Vec<String>,
    pub analytic_jacobian: Vec<Vec<f64>>,
    pub fd_jacobian: Vec<Vec<f64>>,
    pub reduced_determinant: Option<f64>,
    pub printed_determinant: Option<f64>,
    pub nondegeneracy: NondegeneracyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRow {
    pub time: f64,
    pub vortex: usize,
    pub x: f64,
    pub y: f64,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

pub fn report(config: &PointVortexRunConfig) -> Result<PointVortexReport, CliError> {
    let family = config.family;
    let alpha = config.alpha;
    let vortices = family.configuration(alpha)?;
    let layout = ParameterLayout::new(vortices.len());
    let free = config.free_parameters.clone().unwrap_or_else(|| family.free_parameters());
    // An explicit split is judged as given; otherwise other splits may be searched.
    let nondegeneracy = match &config.free_parameters {
        Some(split) => split_report(&vortices, split)?,
        None => nondegeneracy_report(&vortices, Some(&free))?,
    };
    Ok(PointVortexReport {
        alpha,
        family,
        parameters: vortices
            .parameters()
            .into_iter()
            .enumerate()
            .map(|(k, value)| Parameter { label: layout.label(k), value })
            .collect(),
        omega: vortices.omega(),
        speed: vortices.speed(),
        velocities: vortex_velocity(&vortices)?,
        residual: equilibrium_residual(&vortices)?,
        residual_norm: residual_norm(&vortices)?,
        free_parameters: free.iter().map(|&k| layout.label(k)).collect(),
        analytic_jacobian: rows(&family.analytic_jacobian(alpha)?),
        fd_jacobian: rows(&equilibrium_jacobian(&vortices, &free)?),
        reduced_determinant: family.reduced_determinant(alpha)?,
        printed_determinant: family.printed_determinant(alpha),
        nondegeneracy,
    })
}

pub fn run(config: &PointVortexRunConfig, sink: &Sink) -> Result<(), CliError> {
    let report = report(config)?;
    let path = sink.json("pointvortex.json", &report)?;
    sink.say(format!("report written to {}", path.display()));
    sink.say(format!(
        "Omega* = {}; U* = {}; |P| = {:.3e}",
        report.omega, report.speed, report.residual_norm
    ));
    let nd = &report.nondegeneracy;
    let layout = ParameterLayout::new(report.velocities.len());
    let split: Vec<String> = nd.free_parameter_indices.iter().map(|&k| layout.label(k)).collect();
    sink.say(format!(
        "free parameters [{}]: rank {}, codim {}, passes {}",
        split.join(", "),
        nd.rank,
        nd.codim,
        nd.passes
    ));
    if let Some(orbit) = config.orbit {
        let vortices = config.family.configuration(config.alpha)?;
        let trajectory = integrate_orbit(&vortices, orbit.horizon, orbit.step)?;
        let rows: Vec<OrbitRow> = trajectory
            .times
            .iter()
            .zip(&trajectory.centers)
            .flat_map(|(&time, state)| {
                state.iter().enumerate().map(move |(vortex, p)| OrbitRow { time, vortex, x: p[0], y: p[1] })
            })
            .collect();
        let path = sink.csv("orbit.csv", &rows)?;
        sink.say(format!("{} orbit samples written to {}", trajectory.times.len(), path.display()));
    }
    if !nd.passes {
        return Err(CliError::Nondegeneracy(format!(
            "rank {} and codim {} for the split [{}]",
            nd.rank,
            nd.codim,
            split.join(", ")
        )));
    }
    Ok(())
}
