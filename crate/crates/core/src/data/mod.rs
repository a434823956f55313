//! Datasets: IDX ingestion, synthetic Gaussian blobs, label permutations and
//! seeded mini-batch orders.

mod idx;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Tensor2;

pub use idx::{
    encode_idx_images, encode_idx_labels, load_idx_images, load_idx_labels, parse_idx_images,
    parse_idx_labels, IMAGES_MAGIC, LABELS_MAGIC,
};

/// Inputs in [0, 1] with integer labels below `classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub inputs: Tensor2,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn new(name: impl Into<String>, inputs: Tensor2, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if inputs.rows() != labels.len() {
            return Err(Error::shape(format!(
                "{} input rows but {} labels",
                inputs.rows(),
                labels.len()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidLabel { label, classes });
        }
        if inputs.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::format("dataset inputs must lie in [0, 1]"));
        }
        Ok(Dataset {
            name: name.into(),
            inputs,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows and labels at the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            inputs: self.inputs.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// Keeps at most `limit` samples of each class, preserving file order.
    pub fn limit_per_class(&self, limit: usize) -> Dataset {
        let mut seen = vec![0; self.classes];
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let c = &mut seen[self.labels[i]];
                *c += 1;
                *c <= limit
            })
            .collect();
        self.subset(&keep)
    }
}

/// Loads an IDX image/label pair, optionally capped per class.
pub fn load_idx_dataset(
    name: &str,
    images: &Path,
    labels: &Path,
    classes: usize,
    limit_per_class: Option<usize>,
) -> Result<Dataset> {
    let inputs = load_idx_images(images)?;
    let labels = load_idx_labels(labels)?;
    let ds = Dataset::new(name, inputs, labels, classes)?;
    Ok(match limit_per_class {
        Some(limit) => ds.limit_per_class(limit),
        None => ds,
    })
}

/// K Gaussian clusters around seeded unit-norm centers.
///
/// Samples are generated class by class. Raw coordinates are mapped into
/// [0, 1] by the fixed affine map x ↦ 1/2 + x / (2(1 + 5·spread)); anything
/// beyond five standard deviations is clamped.
pub fn gen_blobs(
    classes: usize,
    per_class: usize,
    input_dim: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if classes == 0 || per_class == 0 || input_dim == 0 {
        return Err(Error::shape("blob counts and dimension must be at least 1"));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::format(format!("blob spread must be positive, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            let mut c: Vec<f64> = (0..input_dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            c.iter_mut().for_each(|v| *v /= n);
            c
        })
        .collect();

    let half_width = 2.0 * (1.0 + 5.0 * spread);
    let mut data = Vec::with_capacity(classes * per_class * input_dim);
    let mut labels = Vec::with_capacity(classes * per_class);
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            for &c in center {
                let z: f64 = StandardNormal.sample(&mut rng);
                let x = c + spread * z;
                data.push((0.5 + x / half_width).clamp(0.0, 1.0));
            }
            labels.push(class);
        }
    }
    let inputs = Tensor2::new(classes * per_class, input_dim, data)?;
    Dataset::new(format!("blobs-k{classes}-seed{seed}"), inputs, labels, classes)
}

/// Blobs split into train and test sets drawn from the same clusters: the
/// first `train_per_class` samples of each class go to train, the rest to test.
pub fn gen_blobs_split(
    classes: usize,
    train_per_class: usize,
    test_per_class: usize,
    input_dim: usize,
    spread: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let per_class = train_per_class + test_per_class;
    let all = gen_blobs(classes, per_class, input_dim, spread, seed)?;
    let (mut train_ix, mut test_ix) = (Vec::new(), Vec::new());
    for i in 0..all.len() {
        if i % per_class < train_per_class {
            train_ix.push(i);
        } else {
            test_ix.push(i);
        }
    }
    let mut train = all.subset(&train_ix);
    let mut test = all.subset(&test_ix);
    train.name = format!("{}-train", all.name);
    test.name = format!("{}-test", all.name);
    Ok((train, test))
}

/// Bijection on {0, …, K−1}; class `c` is relabelled `mapping[c]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LabelPermutation {
    mapping: Vec<usize>,
}

impl LabelPermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || seen[m] {
                return Err(Error::InvalidPermutation(format!(
                    "{mapping:?} is not a bijection"
                )));
            }
            seen[m] = true;
        }
        Ok(LabelPermutation { mapping })
    }

    pub fn identity(classes: usize) -> Self {
        LabelPermutation {
            mapping: (0..classes).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, label: usize) -> usize {
        self.mapping[label]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }
}

impl TryFrom<Vec<usize>> for LabelPermutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        LabelPermutation::new(v)
    }
}

impl From<LabelPermutation> for Vec<usize> {
    fn from(p: LabelPermutation) -> Self {
        p.mapping
    }
}

/// Uniformly random permutation of K labels (Fisher–Yates on a seeded stream).
pub fn random_permutation(classes: usize, seed: u64) -> LabelPermutation {
    let mut mapping: Vec<usize> = (0..classes).collect();
    mapping.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    LabelPermutation { mapping }
}

/// Copy of `ds` with every label `y` replaced by `p[y]`.
pub fn permute_labels(ds: &Dataset, p: &LabelPermutation) -> Result<Dataset> {
    if p.len() != ds.classes {
        return Err(Error::InvalidPermutation(format!(
            "permutation of {} labels applied to {} classes",
            p.len(),
            ds.classes
        )));
    }
    Ok(Dataset {
        name: ds.name.clone(),
        inputs: ds.inputs.clone(),
        labels: ds.labels.iter().map(|&l| p.apply(l)).collect(),
        classes: ds.classes,
    })
}

/// Shuffled mini-batches of `0..n`, keyed by (seed, epoch). The last batch
/// keeps the remainder.
pub fn batches(n: usize, batch_size: usize, seed: u64, epoch: u64) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::shape("batch size must be at least 1"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch);
    order.shuffle(&mut rng);
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}
