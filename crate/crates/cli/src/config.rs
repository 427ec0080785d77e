use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use signgan::classifier::TrainConfig;
use signgan::dataio::ClassId;
use signgan::gan::GanConfig;

use crate::error::CliError;

/// Environment variable naming the output root; overrides the config file.
pub const OUT_ENV: &str = "SIGNGAN_OUT";

/// Every knob of the pipeline, as read from the TOML config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub split: SplitSection,
    pub augment: AugmentSection,
    pub gan: GanSection,
    pub sample: SampleSection,
    pub classifier: ClassifierSection,
    pub toy: ToySection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out: PathBuf,
    /// Class policy override; empty means the built-in table.
    pub policy: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub test_fraction: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    pub multiplier: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GanSection {
    pub latent_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub leaky_alpha: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSection {
    pub per_class: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub pretrain_epochs: usize,
    pub pretrain_learning_rate: f64,
    pub finetune_epochs: usize,
    pub finetune_learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToySection {
    pub per_class: usize,
    pub seed: u64,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            out: PathBuf::from("signgan-out"),
            policy: PathBuf::new(),
        }
    }
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

impl Default for AugmentSection {
    fn default() -> Self {
        Self { multiplier: 2, seed: 0 }
    }
}

impl Default for GanSection {
    fn default() -> Self {
        let g = GanConfig::new(ClassId::new(0).expect("class 0"), 0);
        Self {
            latent_dim: g.latent_dim,
            epochs: g.epochs,
            batch_size: g.batch_size,
            learning_rate: g.learning_rate,
            beta1: g.beta1,
            leaky_alpha: g.leaky_alpha,
            seed: g.seed,
        }
    }
}

impl Default for SampleSection {
    fn default() -> Self {
        Self {
            per_class: 100,
            seed: 0,
        }
    }
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let pre = TrainConfig::pretrain(0);
        let fine = TrainConfig::finetune(0);
        Self {
            pretrain_epochs: pre.epochs,
            pretrain_learning_rate: pre.learning_rate,
            finetune_epochs: fine.epochs,
            finetune_learning_rate: fine.learning_rate,
            batch_size: pre.batch_size,
            seed: pre.seed,
            lambda1: pre.lambda1,
            lambda2: pre.lambda2,
        }
    }
}

impl Default for ToySection {
    fn default() -> Self {
        Self { per_class: 50, seed: 0 }
    }
}

impl PipelineConfig {
    /// Reads `file` (defaults if `None`), then applies the output-root
    /// precedence: `--out` flag, then [`OUT_ENV`], then the file.
    pub fn resolve(file: Option<&Path>, out_flag: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
            }
            None => Self::default(),
        };
        if let Some(out) = out_flag {
            cfg.paths.out = out.to_path_buf();
        } else if let Some(env) = std::env::var_os(OUT_ENV) {
            cfg.paths.out = PathBuf::from(env);
        }
        Ok(cfg)
    }

    pub fn gan_config(&self, class: ClassId) -> GanConfig {
        let g = &self.gan;
        GanConfig {
            latent_dim: g.latent_dim,
            epochs: g.epochs,
            batch_size: g.batch_size,
            learning_rate: g.learning_rate,
            beta1: g.beta1,
            leaky_alpha: g.leaky_alpha,
            seed: signgan::seed::derive_seed(g.seed, &[class.index() as u64]),
            class_id: class,
        }
    }

    pub fn pretrain_config(&self) -> TrainConfig {
        let c = &self.classifier;
        TrainConfig {
            learning_rate: c.pretrain_learning_rate,
            epochs: c.pretrain_epochs,
            batch_size: c.batch_size,
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            ..TrainConfig::pretrain(c.seed)
        }
    }

    pub fn finetune_config(&self) -> TrainConfig {
        let c = &self.classifier;
        TrainConfig {
            learning_rate: c.finetune_learning_rate,
            epochs: c.finetune_epochs,
            batch_size: c.batch_size,
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            ..TrainConfig::finetune(c.seed)
        }
    }
}

/// Resolved config plus the command line that produced it.
#[derive(Serialize)]
struct Snapshot<'a> {
    invocation: Invocation<'a>,
    #[serde(flatten)]
    config: &'a PipelineConfig,
}

#[derive(Serialize)]
struct Invocation<'a> {
    command: &'a str,
    args: &'a [String],
}

/// Writes `<dir>/<command>.config.toml` and its SHA-256 next to it.
/// Returns the hex digest.
pub fn write_snapshot(dir: &Path, command: &str, args: &[String], config: &PipelineConfig) -> Result<String, CliError> {
    let text = toml::to_string(&Snapshot {
        invocation: Invocation { command, args },
        config,
    })
    .map_err(|e| CliError::Data(format!("serializing config: {e}")))?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    crate::commands::write_file(&dir.join(format!("{command}.config.toml")), text.as_bytes())?;
    crate::commands::write_file(
        &dir.join(format!("{command}.config.sha256")),
        format!("{hash}\n").as_bytes(),
    )?;
    Ok(hash)
}
