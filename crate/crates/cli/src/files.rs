//! Scenario, channel, calibration and terrain files.
//!
//! Relative paths inside a file resolve against that file's directory first
//! and the preset directory second. Speeds always carry a unit.

use std::fs;
use std::path::{Path, PathBuf};

use passfeas_core::sim_engine::{DEFAULT_BEACON_INTERVAL_S, DEFAULT_DURATION_LIMIT_S, DEFAULT_LINK_LOSS_THRESHOLD, DEFAULT_TIME_STEP_S};
use passfeas_core::{
    ChannelModel, DeliveryModel, EncounterConfig, PassScenario, Placement, RangeEntry, RangeTable, Speed,
    TerrainProfile,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DATA_DIR_ENV: &str = "PASSFEAS_DATA_DIR";

/// Preset directory: `$PASSFEAS_DATA_DIR`, else the presets shipped with the crate.
pub fn data_dir() -> PathBuf {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")),
    }
}

/// Finds `name` relative to `base` (when given), as typed, or in the preset
/// directory, in that order.
pub fn resolve(name: &Path, base: Option<&Path>) -> PathBuf {
    if name.is_absolute() {
        return name.to_path_buf();
    }
    if let Some(base) = base {
        let candidate = base.join(name);
        if candidate.exists() {
            return candidate;
        }
    } else if name.exists() {
        return name.to_path_buf();
    }
    let preset = data_dir().join(name);
    if preset.exists() {
        return preset;
    }
    base.map_or_else(|| name.to_path_buf(), |b| b.join(name))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn parent(path: &Path) -> Option<&Path> {
    path.parent().filter(|p| !p.as_os_str().is_empty()).or(Some(Path::new(".")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassScenarioSection {
    pub v1: Speed,
    pub v2: Speed,
    pub headway: f64,
    pub reaction_time: f64,
    pub car_length: f64,
    pub truck_length: f64,
    pub safety_margin: f64,
    pub max_accel: f64,
}

impl PassScenarioSection {
    pub fn to_scenario(&self) -> Result<PassScenario, CliError> {
        Ok(PassScenario::new(
            self.v1.to_mps(),
            self.v2.to_mps(),
            self.headway,
            self.reaction_time,
            self.car_length,
            self.truck_length,
            self.safety_margin,
            self.max_accel,
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ref<T> {
    Path(PathBuf),
    Inline(T),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CalibrationFile {
    Entries(Vec<RangeEntry>),
    Annotated {
        #[serde(default)]
        note: Option<String>,
        entries: Vec<RangeEntry>,
    },
}

impl CalibrationFile {
    pub fn into_table(self) -> Result<RangeTable, CliError> {
        let entries = match self {
            CalibrationFile::Entries(e) | CalibrationFile::Annotated { entries: e, .. } => e,
        };
        Ok(RangeTable::new(entries)?)
    }
}

pub fn load_calibration(path: &Path) -> Result<RangeTable, CliError> {
    read_json::<CalibrationFile>(path)?.into_table()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub placement: Placement,
    /// Calibration path or inline entries; the built-in calibration when absent.
    #[serde(default)]
    pub table: Option<Ref<CalibrationFile>>,
    #[serde(default)]
    pub delivery: DeliveryModel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainFile {
    pub samples: Vec<(f64, f64)>,
    /// Defaults to the placement's antenna height.
    #[serde(default)]
    pub antenna_height_m: Option<f64>,
}

impl TerrainFile {
    pub fn into_profile(self, placement: Placement) -> Result<TerrainProfile, CliError> {
        let h = self
            .antenna_height_m
            .unwrap_or_else(|| placement.default_antenna_height());
        Ok(TerrainProfile::new(self.samples, h)?)
    }
}

pub fn load_terrain(path: &Path, placement: Placement) -> Result<TerrainProfile, CliError> {
    read_json::<TerrainFile>(path)?.into_profile(placement)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub initial_separation: Option<f64>,
    #[serde(default = "default_beacon_interval")]
    pub beacon_interval: f64,
    #[serde(default = "default_time_step")]
    pub time_step: f64,
    #[serde(default = "default_duration_limit")]
    pub duration_limit: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub relay_enabled: bool,
    #[serde(default = "default_link_loss")]
    pub link_loss_threshold: u32,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            initial_separation: None,
            beacon_interval: default_beacon_interval(),
            time_step: default_time_step(),
            duration_limit: default_duration_limit(),
            seed: 0,
            relay_enabled: false,
            link_loss_threshold: default_link_loss(),
        }
    }
}

fn default_beacon_interval() -> f64 {
    DEFAULT_BEACON_INTERVAL_S
}
fn default_time_step() -> f64 {
    DEFAULT_TIME_STEP_S
}
fn default_duration_limit() -> f64 {
    DEFAULT_DURATION_LIMIT_S
}
fn default_link_loss() -> u32 {
    DEFAULT_LINK_LOSS_THRESHOLD
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub pass_scenario: PassScenarioSection,
    pub channel: Ref<ChannelFile>,
    #[serde(default)]
    pub terrain: Option<Ref<TerrainFile>>,
    #[serde(default)]
    pub sim: SimSection,
}

/// Command-line replacements for parts of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub channel: Option<PathBuf>,
    pub terrain: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// A fully validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub source: PathBuf,
    pub file: ScenarioFile,
    pub config: EncounterConfig,
}

impl Setup {
    pub fn scenario(&self) -> &PassScenario {
        &self.config.scenario
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let source = resolve(path, None);
        let mut file: ScenarioFile = read_json(&source)?;
        let base = parent(&source);
        if let Some(ch) = &overrides.channel {
            file.channel = Ref::Path(std::path::absolute(resolve(ch, None)).map_err(|e| CliError::io(ch, e))?);
        }
        if let Some(t) = &overrides.terrain {
            file.terrain = Some(Ref::Path(std::path::absolute(resolve(t, None)).map_err(|e| CliError::io(t, e))?));
        }
        if let Some(seed) = overrides.seed {
            file.sim.seed = seed;
        }
        let config = build_config(&file, base)?;
        Ok(Self { source, file, config })
    }

    /// Rebuilds the encounter configuration after the file was edited.
    pub fn rebuild(&self) -> Result<Self, CliError> {
        let config = build_config(&self.file, parent(&self.source))?;
        Ok(Self {
            source: self.source.clone(),
            file: self.file.clone(),
            config,
        })
    }
}

fn build_config(file: &ScenarioFile, base: Option<&Path>) -> Result<EncounterConfig, CliError> {
    let scenario = file.pass_scenario.to_scenario()?;
    let (channel_file, channel_base) = match &file.channel {
        Ref::Path(p) => {
            let path = resolve(p, base);
            (read_json::<ChannelFile>(&path)?, parent(&path).map(Path::to_path_buf))
        }
        Ref::Inline(c) => (c.clone(), base.map(Path::to_path_buf)),
    };
    let table = match &channel_file.table {
        None => RangeTable::reference_default(),
        Some(Ref::Path(p)) => load_calibration(&resolve(p, channel_base.as_deref()))?,
        Some(Ref::Inline(c)) => c.clone().into_table()?,
    };
    let placement = channel_file.placement;
    let terrain = match &file.terrain {
        None => None,
        Some(Ref::Path(p)) => Some(load_terrain(&resolve(p, base), placement)?),
        Some(Ref::Inline(t)) => Some(t.clone().into_profile(placement)?),
    };
    let channel = ChannelModel::new(table, terrain, channel_file.delivery)?;
    let mut config = EncounterConfig::new(scenario, channel, placement);
    let sim = &file.sim;
    if let Some(sep) = sim.initial_separation {
        config.initial_separation = sep;
    }
    config.beacon_interval = sim.beacon_interval;
    config.time_step = sim.time_step;
    config.duration_limit = sim.duration_limit;
    config.rng_seed = sim.seed;
    config.relay_enabled = sim.relay_enabled;
    config.link_loss_threshold = sim.link_loss_threshold;
    config.validate()?;
    // Surfaces uncalibrated speeds and unreachable first contact before any run.
    passfeas_core::Simulation::new(config.clone())?;
    Ok(config)
}
