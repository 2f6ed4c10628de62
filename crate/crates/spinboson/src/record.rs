//! The per-run manifest.

use serde::{Deserialize, Serialize};
use spinboson_core::model::{Tlf, TlfEnsemble};
use spinboson_core::Warning;

use crate::output::{FileEntry, Format};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TlfRecord {
    pub eps: f64,
    pub delta: f64,
    pub theta: f64,
    pub omega: f64,
    pub gamma_z: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub rate_z: f64,
    pub rate_minus: f64,
    pub rate_plus: f64,
}

impl From<&Tlf> for TlfRecord {
    fn from(t: &Tlf) -> Self {
        Self {
            eps: t.eps,
            delta: t.delta,
            theta: t.theta,
            omega: t.omega,
            gamma_z: t.gamma_z,
            gamma_minus: t.gamma_minus,
            gamma_plus: t.gamma_plus,
            rate_z: t.rate_z,
            rate_minus: t.rate_minus,
            rate_plus: t.rate_plus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub seed: u64,
    pub ratio_eps: f64,
    pub tan_theta_bar: f64,
    pub omega_min: f64,
    pub nu: f64,
    pub warnings: Vec<String>,
    pub tlfs: Vec<TlfRecord>,
}

impl EnsembleRecord {
    pub fn new(seed: u64, ratio_eps: f64, tan_theta_bar: f64, ens: &TlfEnsemble, warnings: &[Warning]) -> Self {
        Self {
            seed,
            ratio_eps,
            tan_theta_bar,
            omega_min: ens.omega_min,
            nu: ens.nu,
            warnings: warnings.iter().map(ToString::to_string).collect(),
            tlfs: ens.tlfs.iter().map(TlfRecord::from).collect(),
        }
    }
}

/// Written last into the output directory as `manifest.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_hash: String,
    pub kind: String,
    pub seeds: Vec<u64>,
    pub library_version: String,
    pub deterministic: bool,
    pub format: Format,
    pub wall_clock_seconds: f64,
    /// Resolved scenario.
    pub scenario: toml::Table,
    pub ensembles: Vec<EnsembleRecord>,
    pub files: Vec<FileEntry>,
}

impl RunRecord {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("record serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}
