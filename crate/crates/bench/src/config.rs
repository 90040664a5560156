//! Benchmark configuration, read from TOML and overridden from the command
//! line.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hsp_core::baselines::{RhcParams, UctParams};
use hsp_core::dreamr::{DreamrParams, ScenarioConfig, TableSpec};
use hsp_core::executive::ExecutiveConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// One family of episodes: route counts and ETA perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSet {
    pub name: String,
    pub routes_min: u32,
    pub routes_max: u32,
    pub perturb_p: f64,
}

/// Settings of the hybrid executive shared by every β variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HspSection {
    pub replan_period: u32,
    pub sample_count: usize,
    pub context_horizon: u32,
    pub max_consecutive_no_path: u32,
    pub quantum: f64,
    pub max_expansions: usize,
    /// Largest ETA with a precomputed arrival window.
    pub arrival_max_eta: u32,
}

impl Default for HspSection {
    fn default() -> Self {
        Self {
            replan_period: 10,
            sample_count: 64,
            context_horizon: 150,
            max_consecutive_no_path: 720,
            quantum: 1e-6,
            max_expansions: 100_000,
            arrival_max_eta: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub table_dir: PathBuf,
    /// Build a missing value table instead of failing.
    pub auto_preprocess: bool,
    /// Write a JSONL trajectory per episode.
    pub step_logs: bool,
    /// Measure wall time; off makes every output byte-reproducible.
    pub timing: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            table_dir: PathBuf::from("tables"),
            auto_preprocess: true,
            step_logs: false,
            timing: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Episode `i` uses scenario seed `seed + i`.
    pub seed: u64,
    pub episodes: u32,
    /// Shrinks episode and route counts uniformly.
    pub scale: f64,
    /// 1-based index into `sets`.
    pub set: usize,
    /// Steps before an episode is cut off.
    pub step_cap: u32,
    pub sets: Vec<EpisodeSet>,
    /// Names as accepted by [`Algorithm::from_str`].
    pub algorithms: Vec<String>,
    pub dreamr: DreamrParams,
    pub table: TableSpec,
    pub hsp: HspSection,
    pub uct: Vec<UctParams>,
    pub rhc: RhcParams,
    pub output: OutputSection,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let set = |name: &str, lo, hi, p| EpisodeSet {
            name: name.to_string(),
            routes_min: lo,
            routes_max: hi,
            perturb_p: p,
        };
        Self {
            seed: 0,
            episodes: 100,
            scale: 1.0,
            set: 1,
            step_cap: 720,
            sets: vec![set("set1", 50, 200, 0.75), set("set2", 250, 500, 0.75), set("set3", 250, 500, 0.35)],
            algorithms: ["hsp-0.55", "hsp-0.75", "hsp-0.95", "uct1", "uct2", "uct3", "rhc"]
                .map(String::from)
                .to_vec(),
            dreamr: DreamrParams::default(),
            table: TableSpec::default(),
            hsp: HspSection::default(),
            uct: vec![
                UctParams::new(100, 50.0, 500, 1),
                UctParams::new(200, 1.0, 500, 1),
                UctParams::new(100, 100.0, 500, 50),
            ],
            rhc: RhcParams::default(),
            output: OutputSection::default(),
        }
    }
}

/// A configured planner.
#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    Hsp { beta: f64 },
    /// Zero-based index into the UCT variants.
    Uct(usize),
    Rhc,
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Hsp { beta } => format!("hsp-{beta}"),
            Algorithm::Uct(i) => format!("uct{}", i + 1),
            Algorithm::Rhc => "rhc".to_string(),
        }
    }
}

impl FromStr for Algorithm {
    type Err = ConfigError;

    /// `hsp` (β = 0.75), `hsp-<β>`, `uct<i>` (1-based) or `rhc`.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim().to_ascii_lowercase();
        if s == "rhc" {
            return Ok(Algorithm::Rhc);
        }
        if s == "hsp" {
            return Ok(Algorithm::Hsp { beta: 0.75 });
        }
        if let Some(b) = s.strip_prefix("hsp-") {
            let beta: f64 = b.parse().map_err(|_| invalid(format!("bad β in '{s}'")))?;
            if !(0.0..=1.0).contains(&beta) {
                return Err(invalid(format!("β must lie in [0, 1], got {beta}")));
            }
            return Ok(Algorithm::Hsp { beta });
        }
        if let Some(i) = s.strip_prefix("uct") {
            let i: usize = i.parse().map_err(|_| invalid(format!("bad UCT variant '{s}'")))?;
            if i == 0 {
                return Err(invalid("UCT variants are numbered from 1"));
            }
            return Ok(Algorithm::Uct(i - 1));
        }
        Err(invalid(format!("unknown algorithm '{s}'")))
    }
}

fn scaled(n: u32, scale: f64) -> u32 {
    ((n as f64 * scale).round() as u32).max(1)
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.episodes < 1 {
            return Err(invalid("episode count must be at least 1"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(invalid("scale must be positive"));
        }
        if self.set < 1 || self.set > self.sets.len() {
            return Err(invalid(format!("set {} is not defined ({} sets)", self.set, self.sets.len())));
        }
        if self.step_cap < 1 {
            return Err(invalid("step cap must be at least 1"));
        }
        for s in &self.sets {
            if s.routes_min < 1 || s.routes_min > s.routes_max {
                return Err(invalid(format!("{}: route range {}..{} is empty", s.name, s.routes_min, s.routes_max)));
            }
            if !(0.0..=1.0).contains(&s.perturb_p) {
                return Err(invalid(format!("{}: perturbation probability outside [0, 1]", s.name)));
            }
        }
        if self.algorithms.is_empty() {
            return Err(invalid("no algorithms selected"));
        }
        for a in self.algorithm_list()? {
            if let Algorithm::Uct(i) = a {
                let p = self
                    .uct
                    .get(i)
                    .ok_or_else(|| invalid(format!("uct{} is not configured ({} variants)", i + 1, self.uct.len())))?;
                p.validate().map_err(|e| invalid(format!("uct{}: {e}", i + 1)))?;
            }
        }
        self.dreamr.validate().map_err(|e| invalid(format!("dreamr: {e}")))?;
        self.rhc.validate().map_err(|e| invalid(format!("rhc: {e}")))?;
        if self.table.horizon < 1 || self.table.samples < 1 {
            return Err(invalid("table horizon and sample count must be positive"));
        }
        if self.hsp.context_horizon > self.table.horizon {
            return Err(invalid("context horizon exceeds the table horizon"));
        }
        if self.hsp.arrival_max_eta < self.hsp.context_horizon {
            return Err(invalid("arrival table must cover the context horizon"));
        }
        self.executive(0.75)
            .validate()
            .map_err(|e| invalid(format!("hsp: {e}")))?;
        Ok(())
    }

    pub fn algorithm_list(&self) -> Result<Vec<Algorithm>, ConfigError> {
        self.algorithms.iter().map(|s| s.parse()).collect()
    }

    pub fn active_set(&self) -> &EpisodeSet {
        &self.sets[self.set - 1]
    }

    pub fn episode_count(&self) -> u32 {
        scaled(self.episodes, self.scale)
    }

    /// Scenario generator settings for a set, after scaling.
    pub fn scenario_config(&self, set: &EpisodeSet) -> ScenarioConfig {
        ScenarioConfig {
            routes_min: scaled(set.routes_min, self.scale),
            routes_max: scaled(set.routes_max, self.scale),
            perturb_p: set.perturb_p,
        }
    }

    pub fn executive(&self, beta: f64) -> ExecutiveConfig {
        let h = &self.hsp;
        ExecutiveConfig {
            // Ride is passive: never pre-empt it.
            beta: vec![beta, 1.0],
            replan_period: h.replan_period,
            sample_count: h.sample_count,
            context_horizon: h.context_horizon,
            step_cap: self.step_cap,
            max_consecutive_no_path: h.max_consecutive_no_path,
            quantum: h.quantum,
            max_expansions: h.max_expansions,
            log_steps: self.output.step_logs,
        }
    }
}
