use std::fs;

use critmode::design::{catalog_entry, CatalogEntry};
use critmode::linalg::ToleranceConfig;
use critmode::model::{OscillatorSystem, PhaseVector, SystemFile};
use critmode::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::args::Common;

pub const TOL_ENV: &str = "CRITMODE_TOL_OVERRIDE";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Analysis(#[from] Error),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 parse or configuration, 3 verification, 4 numerical convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 2,
            CliError::Failed(_) => 3,
            CliError::Analysis(e) => match e {
                Error::Verification { .. }
                | Error::Inconsistent { .. }
                | Error::ImpossibleNormalization { .. }
                | Error::QuadraticFormVanishes { .. }
                | Error::PairingFailure { .. } => 3,
                Error::Convergence(_) | Error::StillDefective(_) | Error::AmbiguousMatching { .. } => 4,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToleranceOverride {
    rank_tol: Option<f64>,
    cluster_tol: Option<f64>,
    residual_tol: Option<f64>,
}

/// Defaults, then the environment override, then command-line flags.
pub fn tolerances(common: &Common) -> CliResult<ToleranceConfig> {
    let mut tol = ToleranceConfig::default();
    if let Ok(raw) = std::env::var(TOL_ENV) {
        let o: ToleranceOverride =
            serde_json::from_str(&raw).map_err(|e| config_err(format!("{TOL_ENV}: {e}")))?;
        tol.rank_tol = o.rank_tol.unwrap_or(tol.rank_tol);
        tol.cluster_tol = o.cluster_tol.unwrap_or(tol.cluster_tol);
        tol.residual_tol = o.residual_tol.unwrap_or(tol.residual_tol);
    }
    tol.rank_tol = common.tol_rank.unwrap_or(tol.rank_tol);
    tol.cluster_tol = common.tol_cluster.unwrap_or(tol.cluster_tol);
    tol.residual_tol = common.tol_residual.unwrap_or(tol.residual_tol);
    tol.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(tol)
}

pub enum SystemSource {
    Catalog(Box<CatalogEntry>),
    File(OscillatorSystem),
}

impl SystemSource {
    pub fn system(&self) -> &OscillatorSystem {
        match self {
            SystemSource::Catalog(e) => &e.system,
            SystemSource::File(s) => s,
        }
    }

    pub fn catalog(&self) -> Option<&CatalogEntry> {
        match self {
            SystemSource::Catalog(e) => Some(e),
            SystemSource::File(_) => None,
        }
    }
}

pub fn load_system(common: &Common) -> CliResult<SystemSource> {
    let arg = common
        .system
        .as_deref()
        .ok_or_else(|| config_err("--system is required"))?;
    if let Some(name) = arg.strip_prefix("catalog:") {
        return Ok(SystemSource::Catalog(Box::new(catalog_entry(name)?)));
    }
    let text = fs::read_to_string(arg).map_err(|e| config_err(format!("{arg}: {e}")))?;
    let file = SystemFile::from_json(&text).map_err(|e| config_err(format!("{arg}: {e}")))?;
    Ok(SystemSource::File(file.into_system()?))
}

fn parse_entry(s: &str) -> CliResult<Complex64> {
    let bad = || config_err(format!("cannot parse vector entry '{s}'"));
    match s.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(
            re.trim().parse().map_err(|_| bad())?,
            im.trim().parse().map_err(|_| bad())?,
        )),
        None => Ok(Complex64::new(s.trim().parse().map_err(|_| bad())?, 0.0)),
    }
}

/// Phase-space vector from the command line; defaults to the first unit
/// vector.
pub fn state_vector(entries: Option<&[String]>, dim: usize) -> CliResult<PhaseVector> {
    match entries {
        None => Ok(PhaseVector::from_fn(dim, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0))),
        Some(list) => {
            if list.len() != dim {
                return Err(CliError::Analysis(Error::DimensionMismatch {
                    expected: dim,
                    found: list.len(),
                }));
            }
            let v: CliResult<Vec<Complex64>> = list.iter().map(|s| parse_entry(s)).collect();
            Ok(PhaseVector::from_vec(v?))
        }
    }
}

/// Perturbation matrix from explicit entries or a catalog name.
pub fn perturbation_matrix(
    source: &SystemSource,
    entries: Option<&[f64]>,
    name: Option<&str>,
) -> CliResult<DMatrix<f64>> {
    let n = source.system().n();
    match (entries, name) {
        (Some(v), _) => {
            if v.len() != n * n {
                return Err(config_err(format!("--dk needs {} entries, got {}", n * n, v.len())));
            }
            Ok(DMatrix::from_row_slice(n, n, v))
        }
        (None, Some(name)) => {
            let entry = source
                .catalog()
                .ok_or_else(|| config_err("named perturbations need a catalog system"))?;
            entry
                .perturbation(name)
                .map(|p| p.delta_k.clone())
                .ok_or_else(|| config_err(format!("catalog system '{}' has no perturbation '{name}'", entry.name)))
        }
        (None, None) => Err(config_err("give --dk or --perturbation")),
    }
}
