use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentGrid;
use super::headmode::HeadmodeConfig;
use crate::data::{load_csv, split, CsvSchema, Dataset, Split, SplitFractions, SyntheticSpec};
use crate::error::{Error, Result};
use crate::metrics::BetaPolicy;
use crate::model::{ModelDims, ModelKind, TrainConfig};
use crate::scalar::Scalar;

/// Everything one run needs. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Drives data generation, splitting and training.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub model: ModelKind,
    pub data: DataConfig,
    pub dims: ModelDims,
    pub train: TrainConfig,
    pub metrics: MetricsConfig,
    pub experiment: ExperimentGrid,
    pub headmode: HeadmodeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            model: ModelKind::SQAE_LR,
            data: DataConfig::default(),
            dims: ModelDims::default(),
            train: TrainConfig::default(),
            metrics: MetricsConfig::default(),
            experiment: ExperimentGrid::default(),
            headmode: HeadmodeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub beta: BetaPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub path: PathBuf,
    #[serde(flatten)]
    pub schema: CsvSchema,
}

/// Synthetic data unless `csv` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub synthetic: SyntheticSpec,
    pub csv: Option<CsvSource>,
    pub split: SplitFractions,
    /// Keep this head's class balance in every split part.
    pub stratify_head: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            synthetic: SyntheticSpec::default(),
            csv: None,
            split: SplitFractions::default(),
            stratify_head: None,
        }
    }
}

impl DataConfig {
    /// Generates or loads the full dataset.
    pub fn load<T: Scalar>(&self, seed: u64) -> Result<Dataset<T>> {
        match &self.csv {
            Some(src) => load_csv(&src.path, &src.schema),
            None => SyntheticSpec {
                seed,
                ..self.synthetic.clone()
            }
            .generate(),
        }
    }

    pub fn load_split<T: Scalar>(&self, seed: u64) -> Result<Split<T>> {
        let ds = self.load(seed)?;
        split(&ds, self.split, seed, self.stratify_head)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().replace('\n', " ")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        self.train.validate()?;
        self.metrics.beta.validate()?;
        self.data.split.validate()?;
        if self.data.csv.is_none() {
            self.data.synthetic.validate()?;
        }
        self.experiment.validate()?;
        self.headmode.validate()
    }

    /// Training settings with the run seed applied.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    /// Writes the echoed config into `dir`.
    pub fn echo(&self, dir: &Path) -> Result<()> {
        let path = dir.join("config.toml");
        std::fs::write(&path, self.to_toml()?).map_err(|e| Error::io(&path, e))
    }
}
