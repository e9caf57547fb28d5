use std::path::PathBuf;
use std::process::ExitCode;

use gsqg_core::contour::ContourError;
use gsqg_core::linop::LinopError;
use gsqg_core::pointvortex::VortexError;
use gsqg_core::solver::SolverError;
use gsqg_core::specialfn::SpecialFnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("csv output {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("nondegeneracy: {0}")]
    Nondegeneracy(String),
    #[error("corrector: {0}")]
    Corrector(String),
    #[error("identity check: {0}")]
    Identity(String),
    #[error("validation failed at check '{0}'")]
    Validation(String),
    #[error("{0}")]
    Numerics(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Config(_) | Self::ReadConfig { .. } => 2,
            Self::Nondegeneracy(_) => 3,
            Self::Corrector(_) => 4,
            Self::Identity(_) => 5,
            Self::Write { .. } | Self::Csv { .. } | Self::Validation(_) | Self::Numerics(_) => 1,
        })
    }
}

impl From<SpecialFnError> for CliError {
    fn from(e: SpecialFnError) -> Self {
        match e {
            SpecialFnError::AlphaOutOfRange(_) => Self::Config(e.to_string()),
            _ => Self::Numerics(e.to_string()),
        }
    }
}

impl From<VortexError> for CliError {
    fn from(e: VortexError) -> Self {
        match e {
            VortexError::NotEquilibrium(_) => Self::Nondegeneracy(e.to_string()),
            VortexError::InvalidConfiguration(_)
            | VortexError::InvalidFamily(_)
            | VortexError::CoincidentCenters(..)
            | VortexError::Alpha(_) => {
                Self::Config(e.to_string())
            }
            _ => Self::Numerics(e.to_string()),
        }
    }
}

impl From<ContourError> for CliError {
    fn from(e: ContourError) -> Self {
        match e {
            ContourError::Invalid(_)
            | ContourError::NonPositiveRadius { .. }
            | ContourError::Overlap { .. }
            | ContourError::InvalidMode(_)
            | ContourError::ModeCutoff { .. } => Self::Config(e.to_string()),
            _ => Self::Numerics(e.to_string()),
        }
    }
}

impl From<LinopError> for CliError {
    fn from(e: LinopError) -> Self {
        match e {
            LinopError::NotEquilibrium(_) => Self::Nondegeneracy(e.to_string()),
            LinopError::Contour(inner) => inner.into(),
            LinopError::Vortex(inner) => inner.into(),
            _ => Self::Numerics(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidSettings(_) => Self::Config(e.to_string()),
            SolverError::Degenerate { .. } => Self::Nondegeneracy(e.to_string()),
            SolverError::Diverged { .. } | SolverError::RankDeficient { .. } => Self::Corrector(e.to_string()),
            SolverError::IdentityViolation { .. } => Self::Identity(e.to_string()),
            SolverError::Contour(inner) => inner.into(),
            SolverError::Linop(inner) => inner.into(),
            SolverError::Vortex(inner) => inner.into(),
        }
    }
}
