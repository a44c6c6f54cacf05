//! Run configuration: one JSON document per run, unknown keys rejected.

use std::path::{Path, PathBuf};

use patchlab_core::timestep::{IntegratorConfig, Scheme};
use patchlab_core::{Alpha, QuadratureConfig, SobolevIndex};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    #[serde(default = "defaults::n_modes")]
    pub n_modes: usize,
    /// Quadrature nodes per grid point; ignored when `quad_nodes` is set.
    #[serde(default = "defaults::quad_oversample")]
    pub quad_oversample: usize,
    #[serde(default)]
    pub quad_nodes: Option<usize>,
    #[serde(default = "defaults::s_list")]
    pub s_list: Vec<f64>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub dispersion: DispersionSection,
    #[serde(default)]
    pub resonance: ResonanceSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub lifespan: LifespanSection,
    #[serde(default)]
    pub paradiff: ParadiffSection,
    #[serde(default)]
    pub normal_form: NormalFormSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Rk4,
    IfRk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub dt: f64,
    pub scheme: SchemeName,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub omega_frame: f64,
    pub record_conserved: bool,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt: 0.01,
            scheme: SchemeName::IfRk4,
            t_end: 10.0,
            snapshot_stride: 10,
            omega_frame: 0.0,
            record_conserved: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    pub j_max: usize,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self { j_max: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceSection {
    pub k_max: usize,
}

impl Default for ResonanceSection {
    fn default() -> Self {
        Self { k_max: 128 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub eps: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { eps: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifespanSection {
    pub eps_list: Vec<f64>,
    pub c_budget: f64,
}

impl Default for LifespanSection {
    fn default() -> Self {
        Self {
            eps_list: vec![0.1, 0.05, 0.025],
            c_budget: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParadiffSection {
    /// Probe mode for the commutator check; `2k` is probed too.
    pub k: usize,
    pub k_max: usize,
}

impl Default for ParadiffSection {
    fn default() -> Self {
        Self { k: 64, k_max: 136 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalFormSection {
    /// Band truncation; `n_modes / 4` when absent.
    pub band_k: Option<usize>,
    /// Band data `n,j,k,re,im`; a seeded random real band when absent.
    pub band_csv: Option<PathBuf>,
    pub eps_list: Vec<f64>,
}

impl Default for NormalFormSection {
    fn default() -> Self {
        Self {
            band_k: None,
            band_csv: None,
            eps_list: vec![1e-2, 5e-3, 2.5e-3],
        }
    }
}

mod defaults {
    pub fn n_modes() -> usize {
        256
    }
    pub fn quad_oversample() -> usize {
        2
    }
    pub fn s_list() -> Vec<f64> {
        vec![3.0]
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks shared by every subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        self.alpha()?;
        if self.n_modes < 8 || !self.n_modes.is_power_of_two() {
            return Err(CliError::Config(format!(
                "n_modes must be a power of two >= 8, got {}",
                self.n_modes
            )));
        }
        if self.quad_oversample == 0 || self.quad_nodes == Some(0) {
            return Err(CliError::Config("quadrature node counts must be positive".into()));
        }
        if self.s_list.is_empty() {
            return Err(CliError::Config("s_list must not be empty".into()));
        }
        for &s in &self.s_list {
            SobolevIndex::new(s).map_err(CliError::from)?;
        }
        self.integrator_config().validate().map_err(CliError::from)?;
        Ok(())
    }

    pub fn alpha(&self) -> Result<Alpha, CliError> {
        Alpha::new(self.alpha).map_err(CliError::from)
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        match self.quad_nodes {
            Some(m) => QuadratureConfig::fixed(m),
            None => QuadratureConfig::oversample(self.quad_oversample),
        }
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        let i = &self.integrator;
        IntegratorConfig {
            dt: i.dt,
            scheme: match i.scheme {
                SchemeName::Rk4 => Scheme::Rk4,
                SchemeName::IfRk4 => Scheme::IfRk4,
            },
            t_end: i.t_end,
            snapshot_stride: i.snapshot_stride,
            omega_frame: i.omega_frame,
            hs_indices: self.s_list.clone(),
            record_conserved: i.record_conserved,
        }
    }

    pub fn band_k(&self) -> usize {
        self.normal_form.band_k.unwrap_or(self.n_modes / 4)
    }
}
