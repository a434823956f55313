use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{gen_blobs_split, load_idx_dataset, Dataset};
use crate::error::{Error, Result};
use crate::nn::{AdamConfig, HeadInit};
use crate::polytope::{self, PolytopeKind};

/// Classifier head used for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Simplex,
    Cube,
    Orthoplex,
    Hadamard,
    Trainable,
}

impl HeadKind {
    pub fn polytope(self) -> Option<PolytopeKind> {
        match self {
            HeadKind::Simplex => Some(PolytopeKind::Simplex),
            HeadKind::Cube => Some(PolytopeKind::Cube),
            HeadKind::Orthoplex => Some(PolytopeKind::Orthoplex),
            HeadKind::Hadamard => Some(PolytopeKind::Hadamard),
            HeadKind::Trainable => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self.polytope() {
            Some(k) => k.name(),
            None => "trainable",
        }
    }
}

impl From<PolytopeKind> for HeadKind {
    fn from(k: PolytopeKind) -> Self {
        match k {
            PolytopeKind::Simplex => HeadKind::Simplex,
            PolytopeKind::Cube => HeadKind::Cube,
            PolytopeKind::Orthoplex => HeadKind::Orthoplex,
            PolytopeKind::Hadamard => HeadKind::Hadamard,
        }
    }
}

impl fmt::Display for HeadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("trainable") {
            Ok(HeadKind::Trainable)
        } else {
            Ok(s.parse::<PolytopeKind>()?.into())
        }
    }
}

/// Where the train and test splits come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DatasetSpec {
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        limit_per_class: Option<usize>,
    },
    Blobs {
        train_per_class: usize,
        test_per_class: usize,
        input_dim: usize,
        spread: f64,
        seed: u64,
    },
}

impl DatasetSpec {
    /// Loads (train, test) for a problem with `classes` labels.
    pub fn load(&self, classes: usize) -> Result<(Dataset, Dataset)> {
        match self {
            DatasetSpec::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
                limit_per_class,
            } => {
                let train = load_idx_dataset("idx-train", train_images, train_labels, classes, *limit_per_class)?;
                // the cap is a training-set budget; evaluation always uses the full test split
                let test = load_idx_dataset("idx-test", test_images, test_labels, classes, None)?;
                Ok((train, test))
            }
            DatasetSpec::Blobs {
                train_per_class,
                test_per_class,
                input_dim,
                spread,
                seed,
            } => gen_blobs_split(classes, *train_per_class, *test_per_class, *input_dim, *spread, *seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: String,
    pub head: HeadKind,
    pub classes: usize,
    /// Widths of the ReLU hidden layers; a linear feature layer of width d follows.
    pub hidden: Vec<usize>,
    /// Embedding dimension for a Hadamard head; defaults to the next power of two ≥ K.
    pub hadamard_dim: Option<usize>,
    /// Feature dimension for the trainable baseline; defaults to K.
    pub trainable_dim: Option<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    pub seed: u64,
    /// Epochs between stationarity snapshots.
    pub trace_every: usize,
    /// Mean angular deviation (radians) below which a fixed-head run counts as stationary.
    pub delta_threshold: f64,
    pub dataset: DatasetSpec,
}

pub const DEFAULT_BATCH_SIZE: usize = 128;
pub const DEFAULT_DELTA_THRESHOLD: f64 = 0.45;

impl RunConfig {
    /// Desk-scale defaults: 784 → 256 → 64 → d, Adam with standard settings,
    /// batch 128, a snapshot every epoch.
    pub fn new(experiment: impl Into<String>, head: HeadKind, classes: usize, dataset: DatasetSpec, seed: u64) -> Self {
        RunConfig {
            experiment: experiment.into(),
            head,
            classes,
            hidden: vec![256, 64],
            hadamard_dim: None,
            trainable_dim: None,
            epochs: 15,
            batch_size: DEFAULT_BATCH_SIZE,
            optimizer: AdamConfig::default(),
            seed,
            trace_every: 1,
            delta_threshold: DEFAULT_DELTA_THRESHOLD,
            dataset,
        }
    }

    pub fn feature_dim(&self) -> Result<usize> {
        match self.head {
            HeadKind::Trainable => Ok(self.trainable_dim.unwrap_or(self.classes)),
            HeadKind::Hadamard => match self.hadamard_dim {
                Some(d) => Ok(d),
                None => polytope::embedding_dim(PolytopeKind::Hadamard, self.classes),
            },
            kind => polytope::embedding_dim(kind.polytope().expect("fixed kind"), self.classes),
        }
    }

    pub fn head_init(&self) -> Result<HeadInit> {
        let d = self.feature_dim()?;
        Ok(match self.head {
            HeadKind::Trainable => HeadInit::Trainable {
                classes: self.classes,
                feature_dim: d,
            },
            HeadKind::Hadamard => HeadInit::Fixed(polytope::build_hadamard_with_dim(self.classes, d)?),
            kind => HeadInit::Fixed(polytope::build(kind.polytope().expect("fixed kind"), self.classes)?),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::config("classes", "at least 2 classes are required"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("hidden", "layer widths must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if self.trace_every == 0 {
            return Err(Error::config("trace_every", "must be at least 1"));
        }
        let o = &self.optimizer;
        if !(o.learning_rate > 0.0 && o.epsilon > 0.0) {
            return Err(Error::config("learning_rate", "learning rate and epsilon must be positive"));
        }
        if !((0.0..1.0).contains(&o.beta1) && (0.0..1.0).contains(&o.beta2)) {
            return Err(Error::config("beta1", "Adam betas must lie in [0, 1)"));
        }
        if self.delta_threshold.is_nan() || self.delta_threshold <= 0.0 {
            return Err(Error::config("delta_threshold", "must be positive"));
        }
        if let Some(d) = self.hadamard_dim {
            if self.head != HeadKind::Hadamard {
                return Err(Error::config("hadamard_dim", "only valid with a hadamard head"));
            }
            if d == 0 || !d.is_power_of_two() {
                return Err(Error::config(
                    "hadamard_dim",
                    format!("{d} is not a power of two"),
                ));
            }
        }
        if self.trainable_dim == Some(0) {
            return Err(Error::config("trainable_dim", "must be at least 1"));
        }
        if let DatasetSpec::Blobs {
            train_per_class,
            input_dim,
            spread,
            ..
        } = &self.dataset
        {
            if *train_per_class == 0 || *input_dim == 0 {
                return Err(Error::config("dataset", "blob counts must be at least 1"));
            }
            if spread.is_nan() || *spread <= 0.0 {
                return Err(Error::config("blob_spread", "must be positive"));
            }
        }
        self.feature_dim()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> DatasetSpec {
        DatasetSpec::Blobs {
            train_per_class: 4,
            test_per_class: 2,
            input_dim: 3,
            spread: 0.1,
            seed: 0,
        }
    }

    #[test]
    fn feature_dims_follow_head() {
        let mut c = RunConfig::new("t", HeadKind::Cube, 10, blobs(), 1);
        assert_eq!(c.feature_dim().unwrap(), 4);
        c.head = HeadKind::Simplex;
        assert_eq!(c.feature_dim().unwrap(), 9);
        c.head = HeadKind::Orthoplex;
        assert_eq!(c.feature_dim().unwrap(), 5);
        c.head = HeadKind::Hadamard;
        assert_eq!(c.feature_dim().unwrap(), 16);
        c.hadamard_dim = Some(8);
        assert_eq!(c.feature_dim().unwrap(), 8);
        c.head = HeadKind::Trainable;
        c.hadamard_dim = None;
        assert_eq!(c.feature_dim().unwrap(), 10);
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = RunConfig::new("t", HeadKind::Hadamard, 10, blobs(), 1);
        c.hadamard_dim = Some(6);
        match c.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "hadamard_dim"),
            other => panic!("{other:?}"),
        }
        let mut c = RunConfig::new("t", HeadKind::Cube, 1, blobs(), 1);
        assert!(c.validate().is_err());
        c.classes = 4;
        c.batch_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn head_kind_parsing() {
        assert_eq!("trainable".parse::<HeadKind>().unwrap(), HeadKind::Trainable);
        assert_eq!("Orthoplex".parse::<HeadKind>().unwrap(), HeadKind::Orthoplex);
        assert!("square".parse::<HeadKind>().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let c = RunConfig::new("t", HeadKind::Simplex, 3, blobs(), 5);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
