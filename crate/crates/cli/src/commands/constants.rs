//! Table of kernel constants and spectral coefficients with a quadrature cross-check.

use std::f64::consts::PI;

use gsqg_core::quadrature::QuadratureError;
use gsqg_core::specialfn::{
    beta_coefficient, biot_savart_constant, kernel_quadrature_oracle, point_vortex_constant, sigma_coefficient, KernelKind,
    SpecialFnError,
};
use gsqg_core::Alpha;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ConstantsConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsRow {
    pub alpha: f64,
    pub n: u32,
    #[serde(rename = "C_alpha")]
    pub c_alpha: f64,
    #[serde(rename = "C_hat_alpha")]
    pub c_hat_alpha: f64,
    pub sigma_n: f64,
    pub beta_n: f64,
    /// NaN when the oracle did not converge.
    pub beta_n_quadrature: f64,
    pub rel_err: f64,
    pub oracle_converged: bool,
}

/// β_n read off `I_n` at `x = π/(2n)`, where `sin(nx) = 1`.
fn oracle_beta(alpha: Alpha, n: u32, tolerance: f64) -> Result<Option<f64>, CliError> {
    let x = PI / (2.0 * n as f64);
    match kernel_quadrature_oracle(alpha, n, KernelKind::Sine, x, tolerance) {
        Ok(estimate) => Ok(Some(estimate.value / (n as f64 * x).sin())),
        Err(SpecialFnError::Oracle(QuadratureError::NotConverged { .. })) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn table(config: &ConstantsConfig) -> Result<Vec<ConstantsRow>, CliError> {
    let cells: Vec<(Alpha, u32)> = config
        .alphas
        .iter()
        .flat_map(|&a| (1..=config.max_mode).map(move |n| (a, n)))
        .collect();
    cells
        .into_par_iter()
        .map(|(alpha, n)| {
            let beta_n = beta_coefficient(alpha, n)?;
            let quadrature = oracle_beta(alpha, n, config.oracle_tolerance)?;
            let beta_n_quadrature = quadrature.unwrap_or(f64::NAN);
            Ok(ConstantsRow {
                alpha: alpha.value(),
                n,
                c_alpha: biot_savart_constant(alpha),
                c_hat_alpha: point_vortex_constant(alpha),
                sigma_n: sigma_coefficient(alpha, n)?,
                beta_n,
                beta_n_quadrature,
                rel_err: (beta_n - beta_n_quadrature).abs() / beta_n.abs(),
                oracle_converged: quadrature.is_some(),
            })
        })
        .collect()
}

pub fn run(config: &ConstantsConfig, sink: &Sink) -> Result<(), CliError> {
    let rows = table(config)?;
    let path = sink.csv("constants.csv", &rows)?;
    let flagged = rows.iter().filter(|r| !r.oracle_converged).count();
    let worst = rows.iter().filter(|r| r.oracle_converged).map(|r| r.rel_err).fold(0.0, f64::max);
    sink.say(format!("{} rows written to {}", rows.len(), path.display()));
    sink.say(format!("max rel err {worst:.2e}; oracle not converged on {flagged} rows"));
    Ok(())
}
