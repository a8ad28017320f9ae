use std::fs;
use std::path::{Path, PathBuf};

use layercode::analysis::SearchMode;
use layercode::code::{parse_code, CssCode};
use layercode::thermal::{geometric_schedule, CheckpointDecoder, MemoryExperiment, RateKind};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable that overrides the output directory.
pub const OUTPUT_ENV: &str = "LAYERCODE_OUTPUT_DIR";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Input code file, relative to the config file.
    pub code: Option<PathBuf>,
    #[serde(default = "default_scale")]
    pub surface_scale: usize,
    #[serde(default)]
    pub extended: bool,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub sample: Option<SampleBlock>,
    pub thermal: Option<ThermalBlock>,
    pub barrier: Option<BarrierBlock>,
    pub bounds: Option<BoundsBlock>,
}

fn default_scale() -> usize {
    2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBlock {
    pub p: f64,
    pub samples: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometric {
    pub t0: f64,
    pub t_max: f64,
    pub count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalBlock {
    pub betas: Vec<f64>,
    #[serde(default)]
    pub rate: RateKind,
    pub times: Option<Vec<f64>>,
    pub geometric: Option<Geometric>,
    pub trajectories: usize,
    #[serde(default)]
    pub checkpoint_decoder: CheckpointDecoder,
    pub stop_fraction: Option<f64>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

fn default_bootstrap() -> usize {
    1000
}

impl ThermalBlock {
    pub fn experiment(&self, master_seed: u64) -> Result<MemoryExperiment, CliError> {
        let schedule = match (&self.times, &self.geometric) {
            (Some(t), None) => t.clone(),
            (None, Some(g)) => geometric_schedule(g.t0, g.t_max, g.count),
            _ => {
                return Err(CliError::Config(
                    "thermal needs exactly one of `times` or `geometric`".into(),
                ))
            }
        };
        let exp = MemoryExperiment {
            betas: self.betas.clone(),
            rate: self.rate,
            schedule,
            trajectories: self.trajectories,
            master_seed,
            checkpoint_decoder: self.checkpoint_decoder,
            stop_fraction: self.stop_fraction,
            bootstrap: self.bootstrap,
        };
        exp.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(exp)
    }
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BarrierOn {
    Code,
    Lattice,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Exhaustive,
    Beam,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierBlock {
    pub on: BarrierOn,
    #[serde(default = "default_kind")]
    pub kind: String,
    /// Target class signature; any nontrivial class when absent.
    pub class: Option<u64>,
    pub mode: ModeName,
    #[serde(default = "default_states")]
    pub max_states: usize,
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_depth")]
    pub max_depth: usize,
    pub walk: Option<WalkBlock>,
    pub distance: Option<DistanceBlock>,
}

fn default_kind() -> String {
    "x".into()
}

fn default_states() -> usize {
    1_000_000
}

fn default_width() -> usize {
    64
}

fn default_depth() -> usize {
    64
}

impl BarrierBlock {
    pub fn search_mode(&self, budget: Option<u64>) -> SearchMode {
        match self.mode {
            ModeName::Exhaustive => SearchMode::Exhaustive {
                max_states: budget.map_or(self.max_states, |b| b as usize),
            },
            ModeName::Beam => SearchMode::Beam {
                width: self.width,
                max_depth: self.max_depth,
            },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkBlock {
    /// Penalty budget; one below the found barrier when absent.
    pub budget: Option<usize>,
    pub length: usize,
    pub samples: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceBlock {
    pub max_weight: usize,
    #[serde(default = "default_enumeration")]
    pub budget: u64,
    #[serde(default = "default_distance_samples")]
    pub samples: usize,
}

fn default_enumeration() -> u64 {
    100_000
}

fn default_distance_samples() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsBlock {
    pub a: Vec<f64>,
    pub beta: Vec<f64>,
    pub m: Vec<u64>,
    #[serde(rename = "L")]
    pub l: Vec<u64>,
    pub k: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub r: f64,
    pub c: f64,
    pub v: f64,
    #[serde(default = "default_t")]
    pub t: f64,
}

fn default_t() -> f64 {
    1.0
}

/// A parsed config with everything needed to reproduce its outputs.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub dir: PathBuf,
    pub hash: String,
    pub master_seed: u64,
}

impl Loaded {
    /// Reads and hashes a config. Commands that draw random numbers pass `needs_seed`, and
    /// a missing seed is then drawn from OS entropy and printed.
    pub fn load(path: &Path, seed_flag: Option<u64>, needs_seed: bool) -> Result<Loaded, CliError> {
        let bytes =
            fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let Some(code) = &config.code {
            if !dir.join(code).is_file() {
                return Err(CliError::Config(format!(
                    "code file {} not found",
                    dir.join(code).display()
                )));
            }
        }
        let hash: String = Sha256::digest(&bytes)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        let master_seed = match seed_flag.or(config.seed) {
            Some(s) => s,
            None if !needs_seed => 0,
            None => {
                let s = rand::random::<u64>();
                eprintln!("no seed given; drew master seed {s}");
                s
            }
        };
        Ok(Loaded {
            config,
            dir,
            hash,
            master_seed,
        })
    }

    pub fn code(&self) -> Result<CssCode, CliError> {
        let rel = self
            .config
            .code
            .as_ref()
            .ok_or_else(|| CliError::Config("config has no `code` entry".into()))?;
        let path = self.dir.join(rel);
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        parse_code(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn output_dir(&self) -> Result<PathBuf, CliError> {
        let dir = match std::env::var_os(OUTPUT_ENV) {
            Some(d) => PathBuf::from(d),
            None => self
                .config
                .output_dir
                .as_ref()
                .map_or_else(|| self.dir.join("layercode-out"), |d| self.dir.join(d)),
        };
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}
