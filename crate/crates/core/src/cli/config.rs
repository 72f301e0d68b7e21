use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelConfig, SpikeSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Which construction generates the data.
///
/// `Auto` picks the coupled construction `X = W + T Y` unless some spike equals
/// 1, which only the general construction can represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    #[default]
    Auto,
    Coupled,
    General,
}

/// On-disk layout of an experiment file. Every key except `p`, `q`, `n` is optional.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    #[serde(default)]
    pub spikes: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    pub top_m: Option<usize>,
    pub detect_margin: Option<f64>,
    pub outputs: Option<Vec<OutputFormat>>,
    #[serde(default)]
    pub sampler: SamplerChoice,
    #[serde(default)]
    pub center: bool,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub replicates: usize,
    pub top_m: usize,
    pub outputs: Vec<OutputFormat>,
    pub detect_margin: f64,
    pub sampler: SamplerChoice,
    /// Subtract row means before computing canonical correlations.
    pub center: bool,
}

/// `max(0.02, 2 n^{-2/3})`: edge fluctuations are of order `n^{-2/3}`.
pub fn default_detect_margin(n: usize) -> f64 {
    (2.0 * (n as f64).powf(-2.0 / 3.0)).max(0.02)
}

impl ExperimentConfig {
    pub fn new(model: ModelConfig, replicates: usize) -> Result<Self> {
        let top_m = model.min_dim().min(10);
        let detect_margin = default_detect_margin(model.n);
        let cfg = ExperimentConfig {
            model,
            replicates,
            top_m,
            outputs: vec![OutputFormat::Json],
            detect_margin,
            sampler: SamplerChoice::Auto,
            center: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The `figure1` preset, one fifth of the full-scale dimensions:
    /// `p = 100, q = 200, n = 1000`, spikes `0.8, 0.7, 0.6, 0.16, 0.15`, 100 replicates.
    pub fn figure1() -> Self {
        let spikes = SpikeSpectrum::new(vec![0.8, 0.7, 0.6, 0.16, 0.15]).expect("valid spikes");
        let model = ModelConfig::new(100, 200, 1000, spikes, 20240601).expect("valid model");
        ExperimentConfig::new(model, 100).expect("valid preset")
    }

    /// The `figure1-full` preset, `p = 500, q = 1000, n = 5000`.
    pub fn figure1_full() -> Self {
        let spikes = SpikeSpectrum::new(vec![0.8, 0.7, 0.6, 0.16, 0.15]).expect("valid spikes");
        let model = ModelConfig::new(500, 1000, 5000, spikes, 20240601).expect("valid model");
        ExperimentConfig::new(model, 20).expect("valid preset")
    }

    pub fn from_file_struct(file: ExperimentFile) -> Result<Self> {
        let spikes = SpikeSpectrum::new(file.spikes)?;
        let model = ModelConfig::new(file.p, file.q, file.n, spikes, file.seed)?;
        let mut cfg = ExperimentConfig::new(model, file.replicates.max(1))?;
        cfg.replicates = file.replicates;
        if let Some(m) = file.top_m {
            cfg.top_m = m;
        }
        if let Some(d) = file.detect_margin {
            cfg.detect_margin = d;
        }
        if let Some(o) = file.outputs {
            cfg.outputs = o;
        }
        cfg.sampler = file.sampler;
        cfg.center = file.center;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ExperimentFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        Self::from_file_struct(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        let cap = self.model.min_dim();
        if self.top_m == 0 || self.top_m > cap {
            return Err(Error::Config(format!("top_m must lie in 1..={cap}")));
        }
        if !(self.detect_margin > 0.0 && self.detect_margin.is_finite()) {
            return Err(Error::Config("detect_margin must be positive".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Config(
                "outputs must name at least one format".into(),
            ));
        }
        if self.sampler == SamplerChoice::Coupled && self.model.spikes.unit_count() > 0 {
            return Err(Error::Config(
                "the coupled sampler cannot represent a spike equal to 1".into(),
            ));
        }
        Ok(())
    }

    /// The construction actually used.
    pub fn resolved_sampler(&self) -> SamplerChoice {
        match self.sampler {
            SamplerChoice::Auto if self.model.spikes.unit_count() > 0 => SamplerChoice::General,
            SamplerChoice::Auto => SamplerChoice::Coupled,
            s => s,
        }
    }
}
