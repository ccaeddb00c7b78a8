//! Versioned JSON experiment configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use oversmooth::empirics::{RandomGraphSuite, RuleChoice, SplitFractions};
use oversmooth::{ConcentrationConfig, CsbmParams, LogBase, OperatorSpec};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Csbm(CsbmParams),
    Ingest(IngestPaths),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestPaths {
    pub edges: PathBuf,
    pub labels: PathBuf,
    #[serde(default)]
    pub features: Option<PathBuf>,
    /// Input variance used by graph-only checks.
    #[serde(default = "unit")]
    pub sigma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Output {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn unit() -> f64 {
    1.0
}

fn default_ops() -> Vec<OperatorSpec> {
    vec![OperatorSpec::RANDOM_WALK]
}

fn default_n_max() -> usize {
    20
}

fn default_trials() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub model: Model,
    #[serde(default = "default_ops")]
    pub operators: Vec<OperatorSpec>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub split_fractions: SplitFractions,
    #[serde(default)]
    pub concentration: ConcentrationConfig,
    #[serde(default)]
    pub output: Output,
    /// Seed for ingested models; CSBM models carry their own.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub log_base: LogBase,
    /// Depth horizon for `predict-depth`; defaults to `n_max`.
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub rule: RuleChoice,
    #[serde(default)]
    pub graph_suite: RandomGraphSuite,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text).context("invalid config JSON")?;
        if cfg.version != SCHEMA_VERSION {
            bail!("unsupported config version {} (expected {SCHEMA_VERSION})", cfg.version);
        }
        if let Model::Ingest(paths) = &mut cfg.model {
            for p in [&mut paths.edges, &mut paths.labels] {
                *p = base_dir.join(&*p);
            }
            if let Some(f) = &mut paths.features {
                *f = base_dir.join(&*f);
            }
        }
        if let Some(out) = &mut cfg.output.path {
            *out = base_dir.join(&*out);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn apply_overrides(&mut self, seed: Option<u64>, trials: Option<usize>) {
        if let Some(s) = seed {
            self.seed = s;
            if let Model::Csbm(p) = &mut self.model {
                p.seed = s;
            }
        }
        if let Some(t) = trials {
            self.trials = t;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        self.split_fractions.validate()?;
        self.concentration.validate()?;
        for op in &self.operators {
            op.validate()?;
        }
        if let Model::Csbm(p) = &self.model {
            p.validate()?;
        }
        Ok(())
    }

    /// The seed in effect for this run.
    pub fn effective_seed(&self) -> u64 {
        match &self.model {
            Model::Csbm(p) => p.seed,
            Model::Ingest(_) => self.seed,
        }
    }

    pub fn csbm(&self) -> Option<&CsbmParams> {
        match &self.model {
            Model::Csbm(p) => Some(p),
            Model::Ingest(_) => None,
        }
    }

    /// Canonical JSON used for the output header hash. The output
    /// destination is excluded so reruns to different files hash alike.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.output.path = None;
        serde_json::to_string(&c).expect("config serialises")
    }
}
