//! Flat TOML config shared by `train`, `permute` and `compare-hadamard`.
//!
//! ```toml
//! experiment = "mnist"
//! kind = "simplex"
//! classes = 10
//! seed = 1
//! epochs = 15
//! out_dir = "runs"
//! dataset = "idx"
//! train_images = "data/mnist-10k/train-images-idx3-ubyte.gz"
//! train_labels = "data/mnist-10k/train-labels-idx1-ubyte.gz"
//! test_images = "data/mnist-10k/t10k-images-idx3-ubyte.gz"
//! test_labels = "data/mnist-10k/t10k-labels-idx1-ubyte.gz"
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{DatasetSpec, HeadKind, RunConfig};
use crate::nn::AdamConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Train,
    Permute,
    CompareHadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Idx,
    Blobs,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub experiment: Option<String>,
    pub kind: Option<HeadKind>,
    pub classes: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,

    pub hidden: Option<Vec<usize>>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub epsilon: Option<f64>,
    pub trace_every: Option<usize>,
    pub delta_threshold: Option<f64>,
    pub trainable_dim: Option<usize>,

    pub dataset: Option<DatasetSource>,
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    pub limit_per_class: Option<usize>,
    pub blob_train_per_class: Option<usize>,
    pub blob_test_per_class: Option<usize>,
    pub blob_input_dim: Option<usize>,
    pub blob_spread: Option<f64>,
    pub blob_seed: Option<u64>,

    /// Hadamard embedding dimension, for `compare-hadamard` or a hadamard head.
    pub d_had: Option<usize>,
    pub n_perms: Option<usize>,
    pub base_seed: Option<u64>,
    /// Use the identity permutation for every run (spread must then be zero).
    pub fixed_permutation: Option<bool>,
    pub jobs: Option<usize>,

    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn required<T: Clone>(value: &Option<T>, field: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::config(field, "required but missing"))
}

fn forbidden<T>(value: &Option<T>, field: &str, command: &str) -> Result<()> {
    match value {
        Some(_) => Err(Error::config(field, format!("not used by `{command}`"))),
        None => Ok(()),
    }
}

impl CliConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        Ok(self.resolve(&required(&self.out_dir, "out_dir")?))
    }

    /// Output directory of this experiment: `<out_dir>/<experiment>`.
    pub fn experiment_dir(&self) -> Result<PathBuf> {
        Ok(self.out_dir()?.join(required(&self.experiment, "experiment")?))
    }

    fn dataset_spec(&self) -> Result<DatasetSpec> {
        match required(&self.dataset, "dataset")? {
            DatasetSource::Idx => {
                for (v, f) in [
                    (&self.blob_train_per_class, "blob_train_per_class"),
                    (&self.blob_test_per_class, "blob_test_per_class"),
                    (&self.blob_input_dim, "blob_input_dim"),
                ] {
                    forbidden(v, f, "dataset = \"idx\"")?;
                }
                forbidden(&self.blob_spread, "blob_spread", "dataset = \"idx\"")?;
                forbidden(&self.blob_seed, "blob_seed", "dataset = \"idx\"")?;
                if self.limit_per_class == Some(0) {
                    return Err(Error::config("limit_per_class", "must be at least 1"));
                }
                Ok(DatasetSpec::Idx {
                    train_images: self.resolve(&required(&self.train_images, "train_images")?),
                    train_labels: self.resolve(&required(&self.train_labels, "train_labels")?),
                    test_images: self.resolve(&required(&self.test_images, "test_images")?),
                    test_labels: self.resolve(&required(&self.test_labels, "test_labels")?),
                    limit_per_class: self.limit_per_class,
                })
            }
            DatasetSource::Blobs => {
                for (v, f) in [
                    (&self.train_images, "train_images"),
                    (&self.train_labels, "train_labels"),
                    (&self.test_images, "test_images"),
                    (&self.test_labels, "test_labels"),
                ] {
                    forbidden(v, f, "dataset = \"blobs\"")?;
                }
                forbidden(&self.limit_per_class, "limit_per_class", "dataset = \"blobs\"")?;
                Ok(DatasetSpec::Blobs {
                    train_per_class: required(&self.blob_train_per_class, "blob_train_per_class")?,
                    test_per_class: required(&self.blob_test_per_class, "blob_test_per_class")?,
                    input_dim: required(&self.blob_input_dim, "blob_input_dim")?,
                    spread: required(&self.blob_spread, "blob_spread")?,
                    seed: required(&self.blob_seed, "blob_seed")?,
                })
            }
        }
    }

    /// Checks the fields `command` needs and builds the run config.
    ///
    /// For `compare-hadamard` the head kind is set by the command, so `kind`
    /// must be absent; `d_had` is carried in `hadamard_dim`.
    pub fn run_config(&self, command: Command) -> Result<RunConfig> {
        let name = match command {
            Command::Train => "train",
            Command::Permute => "permute",
            Command::CompareHadamard => "compare-hadamard",
        };
        let head = match command {
            Command::CompareHadamard => {
                forbidden(&self.kind, "kind", name)?;
                HeadKind::Hadamard
            }
            _ => required(&self.kind, "kind")?,
        };
        if command != Command::Permute {
            forbidden(&self.n_perms, "n_perms", name)?;
            forbidden(&self.base_seed, "base_seed", name)?;
            forbidden(&self.fixed_permutation, "fixed_permutation", name)?;
            forbidden(&self.jobs, "jobs", name)?;
        }
        if command == Command::CompareHadamard {
            required(&self.d_had, "d_had")?;
        } else if self.d_had.is_some() && head != HeadKind::Hadamard {
            return Err(Error::config("d_had", "only valid with kind = \"hadamard\""));
        }

        let experiment = required(&self.experiment, "experiment")?;
        if experiment.is_empty() || experiment.contains(['/', '\\']) || experiment == ".." {
            return Err(Error::config("experiment", "must be a plain directory name"));
        }
        self.out_dir()?;
        let classes = required(&self.classes, "classes")?;
        let seed = required(&self.seed, "seed")?;

        let mut rc = RunConfig::new(experiment, head, classes, self.dataset_spec()?, seed);
        if let Some(h) = &self.hidden {
            rc.hidden = h.clone();
        }
        rc.epochs = self.epochs.unwrap_or(rc.epochs);
        rc.batch_size = self.batch_size.unwrap_or(rc.batch_size);
        let d = AdamConfig::default();
        rc.optimizer = AdamConfig {
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            beta1: self.beta1.unwrap_or(d.beta1),
            beta2: self.beta2.unwrap_or(d.beta2),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
        };
        rc.trace_every = self.trace_every.unwrap_or(rc.trace_every);
        rc.delta_threshold = self.delta_threshold.unwrap_or(rc.delta_threshold);
        rc.trainable_dim = self.trainable_dim;
        rc.hadamard_dim = self.d_had;
        rc.validate().map_err(|e| match e {
            Error::Config { field, reason } if field == "hadamard_dim" => Error::Config {
                field: "d_had".into(),
                reason,
            },
            other => other,
        })?;

        if command == Command::Permute {
            let n = required(&self.n_perms, "n_perms")?;
            if n < 2 {
                return Err(Error::config("n_perms", "at least 2 permutations are required"));
            }
            required(&self.base_seed, "base_seed")?;
            if self.jobs == Some(0) {
                return Err(Error::config("jobs", "must be at least 1"));
            }
        }
        Ok(rc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLOBS: &str = r#"
experiment = "e"
kind = "cube"
classes = 4
seed = 3
out_dir = "out"
dataset = "blobs"
blob_train_per_class = 5
blob_test_per_class = 2
blob_input_dim = 3
blob_spread = 0.1
blob_seed = 9
"#;

    fn field_of(r: Result<RunConfig>) -> String {
        match r {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn blob_config_builds() {
        let cfg = CliConfig::parse(BLOBS).unwrap();
        let rc = cfg.run_config(Command::Train).unwrap();
        assert_eq!(rc.head, HeadKind::Cube);
        assert_eq!(rc.epochs, 15);
        assert_eq!(rc.seed, 3);
    }

    #[test]
    fn missing_seed_is_rejected() {
        let cfg = CliConfig::parse(&BLOBS.replace("seed = 3\n", "")).unwrap();
        assert_eq!(field_of(cfg.run_config(Command::Train)), "seed");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(CliConfig::parse(&format!("{BLOBS}colour = 1\n")).is_err());
    }

    #[test]
    fn command_specific_fields() {
        let cfg = CliConfig::parse(BLOBS).unwrap();
        assert_eq!(field_of(cfg.run_config(Command::Permute)), "n_perms");
        assert_eq!(field_of(cfg.run_config(Command::CompareHadamard)), "kind");

        let text = BLOBS.replace("kind = \"cube\"\n", "d_had = 6\n");
        let cfg = CliConfig::parse(&text).unwrap();
        assert_eq!(field_of(cfg.run_config(Command::CompareHadamard)), "d_had");

        let cfg = CliConfig::parse(&format!("{BLOBS}train_images = \"x\"\n")).unwrap();
        assert_eq!(field_of(cfg.run_config(Command::Train)), "train_images");
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let mut cfg = CliConfig::parse(BLOBS).unwrap();
        cfg.base_dir = PathBuf::from("/cfg");
        assert_eq!(cfg.experiment_dir().unwrap(), PathBuf::from("/cfg/out/e"));
    }
}
