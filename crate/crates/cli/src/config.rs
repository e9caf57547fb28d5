//! Versioned JSON run configurations. Unknown keys are rejected and physical
//! preconditions are re-checked after parsing.

use std::path::Path;

use gsqg_core::pointvortex::CanonicalFamily;
use gsqg_core::solver::ContinuationSettings;
use gsqg_core::Alpha;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub trait RunConfig: Serialize + DeserializeOwned + Default {
    fn schema_version(&self) -> u32;
    fn check(&self) -> Result<(), CliError>;
}

/// Parse `path`, or take the defaults when no file is given.
pub fn load<T: RunConfig>(path: Option<&Path>) -> Result<T, CliError> {
    let config: T = match path {
        None => T::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
                path: path.to_path_buf(),
                source,
            })?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    if config.schema_version() != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            config.schema_version()
        )));
    }
    config.check()?;
    Ok(config)
}

fn default_alphas() -> Vec<Alpha> {
    [1.0, 1.1, 1.25, 1.5, 1.75, 1.9].map(|a| Alpha::new(a).expect("grid inside [1, 2)")).to_vec()
}

fn positive(name: &str, value: f64) -> Result<(), CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub schema_version: u32,
    pub alphas: Vec<Alpha>,
    pub max_mode: u32,
    pub oracle_tolerance: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            alphas: default_alphas(),
            max_mode: 32,
            oracle_tolerance: 1e-8,
        }
    }
}

impl RunConfig for ConstantsConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
    fn check(&self) -> Result<(), CliError> {
        if self.alphas.is_empty() || self.max_mode == 0 {
            return Err(CliError::Config("need at least one alpha and max_mode >= 1".into()));
        }
        positive("oracle_tolerance", self.oracle_tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSettings {
    pub horizon: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointVortexRunConfig {
    pub schema_version: u32,
    pub alpha: Alpha,
    pub family: CanonicalFamily,
    #[serde(default)]
    pub free_parameters: Option<Vec<usize>>,
    #[serde(default)]
    pub orbit: Option<OrbitSettings>,
}

fn default_family() -> CanonicalFamily {
    CanonicalFamily::CorotatingPair { d: 1.0, c: 0.5, gamma: 1.0 }
}

impl Default for PointVortexRunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            alpha: Alpha::new(1.5).expect("inside [1, 2)"),
            family: default_family(),
            free_parameters: None,
            orbit: None,
        }
    }
}

impl RunConfig for PointVortexRunConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
    fn check(&self) -> Result<(), CliError> {
        self.family.validate()?;
        if let Some(free) = &self.free_parameters {
            let len = 3 * self.family.vortices() + 2;
            if free.iter().any(|&k| k >= len) {
                return Err(CliError::Config(format!("free parameter indices must be below {len}")));
            }
        }
        if let Some(orbit) = self.orbit {
            positive("orbit.step", orbit.step)?;
            positive("orbit.horizon", orbit.horizon)?;
            if orbit.horizon < orbit.step {
                return Err(CliError::Config("orbit.horizon must be at least orbit.step".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessSettings {
    pub restarts: usize,
    pub relative_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VstateConfig {
    pub schema_version: u32,
    pub alpha: Alpha,
    pub family: CanonicalFamily,
    pub continuation: ContinuationSettings,
    /// Boundary points per patch in the exported CSVs.
    pub boundary_samples: usize,
    #[serde(default)]
    pub uniqueness: Option<UniquenessSettings>,
}

impl Default for VstateConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            alpha: Alpha::new(1.5).expect("inside [1, 2)"),
            family: default_family(),
            continuation: ContinuationSettings::default(),
            boundary_samples: 256,
            uniqueness: None,
        }
    }
}

impl RunConfig for VstateConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
    fn check(&self) -> Result<(), CliError> {
        self.family.validate()?;
        self.continuation.validate()?;
        if self.boundary_samples < 3 {
            return Err(CliError::Config("boundary_samples must be at least 3".into()));
        }
        if let Some(u) = self.uniqueness {
            positive("uniqueness.relative_size", u.relative_size)?;
        }
        Ok(())
    }
}

/// Test hook that corrupts the linearization symbol seen by the spectral check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultInjection {
    pub sigma_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub schema_version: u32,
    pub alphas: Vec<Alpha>,
    pub max_mode: u32,
    /// α samples for the constant identities.
    pub constant_samples: usize,
    /// Random ensembles per identity.
    pub identity_ensembles: usize,
    /// Mode cutoff of the short continuation check; 0 skips it.
    pub branch_mode_cutoff: usize,
    #[serde(default)]
    pub fault_injection: Option<FaultInjection>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            alphas: default_alphas(),
            max_mode: 32,
            constant_samples: 50,
            identity_ensembles: 20,
            branch_mode_cutoff: 8,
            fault_injection: None,
        }
    }
}

impl RunConfig for ValidateConfig {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
    fn check(&self) -> Result<(), CliError> {
        if self.alphas.is_empty() || self.max_mode == 0 || self.constant_samples == 0 {
            return Err(CliError::Config("alphas, max_mode and constant_samples must be nonempty".into()));
        }
        if self.branch_mode_cutoff == 1 {
            return Err(CliError::Config("branch_mode_cutoff must be 0 or at least 2".into()));
        }
        if let Some(fault) = self.fault_injection {
            positive("fault_injection.sigma_scale", fault.sigma_scale)?;
        }
        Ok(())
    }
}
