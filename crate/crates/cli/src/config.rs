//! TOML run configurations. Relative paths inside a config resolve against
//! the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use spdclab_core::biphoton::GridSpec;
use spdclab_core::counting::{DetectionChain, SampleModel, SourceRates};
use spdclab_core::dispersion::SellmeierModel;
use spdclab_core::phasematch::CrystalConfig;

use crate::CliError;

pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    /// Material coefficient file; the built-in MgO:CLN model when absent.
    pub material_file: Option<PathBuf>,
    pub length_mm: f64,
    pub poling_period_um: f64,
    /// Crystal set point. Defaults to the (calibrated) degeneracy temperature.
    pub temperature_c: Option<f64>,
    #[serde(default)]
    pub calibration_offset_c: f64,
    /// Measured degeneracy temperature. When set, the calibration offset is
    /// derived so that the model's degeneracy lands here, replacing
    /// `calibration_offset_c`.
    pub target_degeneracy_c: Option<f64>,
}

impl CrystalSection {
    pub fn model(&self, base: &Path) -> Result<SellmeierModel, CliError> {
        match &self.material_file {
            None => Ok(SellmeierModel::mgo_cln()),
            Some(p) => {
                let path = resolve(base, p);
                SellmeierModel::from_file(&path)
                    .map_err(|e| CliError::Config(format!("material file {}: {e}", path.display())))
            }
        }
    }

    /// Crystal at its nominal set point (25 °C placeholder when unset) with
    /// the configured offset.
    pub fn crystal(&self, base: &Path) -> Result<CrystalConfig, CliError> {
        let model = self.model(base)?;
        let cfg = CrystalConfig::new(
            model,
            self.length_mm,
            self.poling_period_um,
            self.temperature_c.unwrap_or(25.0),
        )
        .map_err(|e| CliError::Config(format!("crystal: {e}")))?;
        Ok(cfg.with_offset(self.calibration_offset_c))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub wavelength_nm: f64,
    #[serde(default = "default_linewidth")]
    pub linewidth_fwhm_nm: f64,
}

fn default_linewidth() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub theta_min_c: f64,
    pub theta_max_c: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    pub crystal: CrystalSection,
    pub pump: PumpSection,
    pub scan: ScanSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSection {
    pub beta_fs2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredSection {
    /// Matrix CSV holding a measured JSI.
    pub jsi_path: PathBuf,
    /// Resample to this many points per axis (required for non-uniform axes).
    pub resample: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportSection {
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    4
}

impl Default for ExportSection {
    fn default() -> Self {
        Self {
            stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsaConfig {
    /// Model crystal; required unless `measured` is given.
    pub crystal: Option<CrystalSection>,
    pub pump: PumpSection,
    #[serde(default)]
    pub grid: GridSpec,
    pub fiber: FiberSection,
    pub measured: Option<MeasuredSection>,
    #[serde(default)]
    pub export: ExportSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_windows")]
    pub windows: u64,
    /// Write every window's time tags as CSV.
    #[serde(default)]
    pub write_tags: bool,
}

fn default_windows() -> u64 {
    1
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            windows: default_windows(),
            write_tags: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub chain: DetectionChain,
    pub source: SourceRates,
    pub sample: Option<SampleModel>,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub solvent: PathBuf,
    pub sample: PathBuf,
    #[serde(default = "default_threshold")]
    pub flag_threshold: f64,
    #[serde(default)]
    pub drop_flagged: bool,
    pub monte_carlo_draws: Option<usize>,
}

fn default_threshold() -> f64 {
    spdclab_core::analysis::DEFAULT_FLAG_THRESHOLD
}
