//! JSON configuration files.

use std::path::{Path, PathBuf};

use prefmoo_core::moead::StmConfig;
use prefmoo_core::nums::{map_multi_roi, map_multilayer, map_reference_set};
use prefmoo_core::problems::ProblemConfig;
use prefmoo_core::simplex::{generate_das_dennis, generate_multilayer};
use prefmoo_core::{ReferenceSet, RoiSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Parses JSON; schema errors carry the pointer of the offending value.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Validation {
        message: e.inner().to_string(),
        pointer: Some(prefmoo_session::api::json_pointer(e.path())),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    parse_json(&text)
}

/// How the reference points are built from the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub h: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roi: Option<RoiSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rois: Vec<RoiSpec>,
    /// One contraction factor per layer (`null` keeps a layer in place);
    /// the pivot comes from `roi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer_tau: Option<Vec<Option<f64>>>,
}

impl ReferenceConfig {
    pub fn build(&self, m: usize) -> CliResult<ReferenceSet> {
        let lattice = generate_das_dennis(m, self.h).map_err(|e| CliError::from(e).at("/h"))?;
        build_references(&lattice, self.roi.as_ref(), &self.rois, self.layer_tau.as_deref())
    }
}

/// Applies a single-region, multi-region or layered mapping to `lattice`,
/// or returns it unchanged when no region is given.
pub fn build_references(
    lattice: &ReferenceSet,
    roi: Option<&RoiSpec>,
    rois: &[RoiSpec],
    layer_tau: Option<&[Option<f64>]>,
) -> CliResult<ReferenceSet> {
    match (roi, rois.is_empty(), layer_tau) {
        (Some(_), false, _) => Err(CliError::validation("give either roi or rois, not both").at("/rois")),
        (_, false, Some(_)) => {
            Err(CliError::validation("layer_tau cannot be combined with rois").at("/layer_tau"))
        }
        (None, true, Some(_)) => Err(CliError::validation("layer_tau needs roi for its pivot").at("/roi")),
        (Some(roi), true, Some(taus)) => {
            let h = lattice
                .h
                .ok_or_else(|| CliError::validation("layered mapping needs a lattice with known H"))?;
            let layers = generate_multilayer(lattice.m, h, taus.len()).map_err(|e| CliError::from(e).at("/layer_tau"))?;
            map_multilayer(&layers, roi, taus).map_err(|e| CliError::from(e).at("/layer_tau"))
        }
        (Some(roi), true, None) => map_reference_set(lattice, roi).map_err(|e| tau_pointer(e, "/roi")),
        (None, false, None) => map_multi_roi(lattice, rois).map_err(|e| tau_pointer(e, "/rois")),
        (None, true, None) => Ok(lattice.clone()),
    }
}

fn tau_pointer(e: prefmoo_core::Error, base: &str) -> CliError {
    let tau = matches!(e, prefmoo_core::Error::TauOutOfBounds { .. });
    let err = CliError::from(e);
    if tau && base == "/roi" {
        err.at("/roi/tau")
    } else {
        err.at(base)
    }
}

/// Batch run description for `prefmoo run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub references: ReferenceConfig,
    pub generations: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub optimizer: StmConfig,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.seeds.is_empty() {
            return Err(CliError::validation("at least one seed is required").at("/seeds"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(CliError::validation(format!("seed {dup} listed twice")).at("/seeds"));
        }
        self.problem.build().map_err(|e| CliError::from(e).at("/problem"))?;
        self.optimizer
            .validate()
            .map_err(|e| CliError::from(e).at("/optimizer"))?;
        Ok(())
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// R-metric evaluation settings for `prefmoo rmetric`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RMetricFile {
    pub z_r: Vec<f64>,
    #[serde(default)]
    pub z_w: Option<Vec<f64>>,
    #[serde(default)]
    pub extent: Option<f64>,
    #[serde(default)]
    pub hv_reference: Option<Vec<f64>>,
    /// PF sample as a `.dat` file.
    #[serde(default)]
    pub pf_file: Option<PathBuf>,
    /// Or sampled from the analytic front.
    #[serde(default)]
    pub pf_problem: Option<ProblemConfig>,
    #[serde(default = "default_pf_count")]
    pub pf_count: usize,
    #[serde(default)]
    pub mc_samples: Option<usize>,
    #[serde(default)]
    pub mc_seed: u64,
}

fn default_pf_count() -> usize {
    10_000
}
