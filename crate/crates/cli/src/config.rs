//! Experiment configuration: an optional TOML/JSON file, overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use aoi_bandit::policies::{PolicyConfig, PolicyKind};
use aoi_bandit::simulator::BaselineMode;
use serde::Deserialize;

pub const FULL_PRESET: &str = "paper-iv";

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub instance: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub horizon: Option<u64>,
    pub runs: Option<usize>,
    pub checkpoints: Option<Vec<u64>>,
    pub baseline: Option<BaselineMode>,
    pub plot: Option<bool>,
    pub policies: Option<Vec<PolicyConfig>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        let config = if is_json {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        Ok(config)
    }
}

/// Fully resolved settings for one `simulate` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instances: Vec<String>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub horizon: u64,
    pub runs: usize,
    /// `None` means log-spaced defaults.
    pub checkpoints: Option<Vec<u64>>,
    pub baseline: BaselineMode,
    pub plot: bool,
    pub policies: Vec<PolicyConfig>,
}

/// Flag values; `None` when the flag was not given.
#[derive(Debug, Default, Clone)]
pub struct FlagOverrides {
    pub preset: Option<String>,
    pub instance: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub horizon: Option<u64>,
    pub runs: Option<usize>,
    pub checkpoints: Option<Vec<u64>>,
    pub baseline: Option<BaselineMode>,
    pub plot: bool,
    pub policies: Option<Vec<String>>,
    pub beta: Option<f64>,
    pub aoi_threshold_c: Option<f64>,
}

/// All six learning policies, each plain and AoI-aware.
pub fn full_comparison_policies() -> Vec<PolicyConfig> {
    PolicyKind::LEARNING
        .iter()
        .flat_map(|&k| [PolicyConfig::new(k), PolicyConfig::new(k).aoi_aware()])
        .collect()
}

fn preset_base(name: &str) -> Result<FileConfig> {
    match name {
        FULL_PRESET => Ok(FileConfig {
            horizon: Some(100_000),
            runs: Some(1000),
            policies: Some(full_comparison_policies()),
            ..Default::default()
        }),
        other => bail!("unknown preset {other:?} (available: {FULL_PRESET})"),
    }
}

impl ExperimentConfig {
    /// Merges preset, then file, then flags; later sources win.
    pub fn resolve(file: Option<FileConfig>, flags: FlagOverrides) -> Result<Self> {
        let preset = flags.preset.as_deref().map(preset_base).transpose()?;
        let base = preset.clone().unwrap_or_default();
        let file = file.unwrap_or_default();

        let instances = match flags.instance.or(file.instance).or(base.instance) {
            Some(name) => vec![name],
            None if preset.is_some() => vec!["i1".to_string(), "i2".to_string()],
            None => bail!("no instance given (use --instance, a config file or --preset)"),
        };

        let mut policies = match flags.policies {
            Some(labels) => labels
                .iter()
                .map(|l| PolicyConfig::parse_label(l.trim()))
                .collect::<aoi_bandit::Result<Vec<_>>>()?,
            None => file
                .policies
                .or(base.policies)
                .unwrap_or_else(|| vec![
                    PolicyConfig::new(PolicyKind::Ucb),
                    PolicyConfig::new(PolicyKind::TsBeta),
                    PolicyConfig::new(PolicyKind::Cucb),
                    PolicyConfig::new(PolicyKind::CtsBeta),
                ]),
        };
        if policies.is_empty() {
            bail!("at least one policy required");
        }
        for p in &mut policies {
            if let Some(beta) = flags.beta {
                p.beta = beta;
            }
            if let Some(c) = flags.aoi_threshold_c {
                p.aoi_threshold_c = c;
            }
        }

        Ok(Self {
            instances,
            out_dir: flags.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            horizon: flags.horizon.or(file.horizon).or(base.horizon).unwrap_or(10_000),
            runs: flags.runs.or(file.runs).or(base.runs).unwrap_or(100),
            checkpoints: flags.checkpoints.or(file.checkpoints),
            baseline: flags.baseline.or(file.baseline).unwrap_or_default(),
            plot: flags.plot || file.plot.unwrap_or(false),
            policies,
        })
    }
}
