//! Angular deviation of class feature means from their fixed weights.
//!
//! For class c with fixed unit weight ŵ_c, the deviation is
//! δ_c = arccos(ŵ_c · μ̂_c), where μ̂_c is the normalized mean of the features
//! of class-c samples. Small δ_c means the class features sit around their
//! weight direction on the hypersphere.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{ClassifierHead, Network, Tensor2};
use crate::polytope::WeightMatrix;

const EVAL_CHUNK: usize = 1024;

/// Mean feature direction of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMean {
    pub count: usize,
    /// Unit mean direction; all zeros when `degenerate`.
    pub direction: Vec<f64>,
    /// Norm of the un-normalized mean vector.
    pub mean_norm: f64,
    /// Average of ‖f‖ over the class samples.
    pub feature_norm: f64,
    /// The mean vector has zero length, so no direction exists.
    pub degenerate: bool,
}

/// Per-class mean directions. Classes without samples map to `None`.
pub fn class_feature_means(features: &Tensor2, labels: &[usize], classes: usize) -> Result<Vec<Option<ClassMean>>> {
    if features.rows() != labels.len() {
        return Err(Error::shape(format!(
            "{} feature rows but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidLabel { label, classes });
    }
    let d = features.cols();
    let mut sums = vec![vec![0.0; d]; classes];
    let mut norms = vec![0.0; classes];
    let mut counts = vec![0usize; classes];
    for (row, &y) in features.iter_rows().zip(labels) {
        sums[y].iter_mut().zip(row).for_each(|(s, v)| *s += v);
        norms[y] += row.iter().map(|v| v * v).sum::<f64>().sqrt();
        counts[y] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(norms)
        .zip(counts)
        .map(|((sum, norm_sum), count)| {
            if count == 0 {
                return None;
            }
            let n = count as f64;
            let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
            let mean_norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
            let degenerate = mean_norm.is_nan() || mean_norm <= 0.0;
            let direction = if degenerate {
                vec![0.0; d]
            } else {
                mean.iter().map(|v| v / mean_norm).collect()
            };
            Some(ClassMean {
                count,
                direction,
                mean_norm,
                feature_norm: norm_sum / n,
                degenerate,
            })
        })
        .collect())
}

/// δ between a unit weight and a unit mean direction, with the dot clamped to [-1, 1].
pub fn angular_deviation(weight: &[f64], direction: &[f64]) -> f64 {
    let dot: f64 = weight.iter().zip(direction).map(|(a, b)| a * b).sum();
    dot.clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub epoch: usize,
    /// δ_c in radians; `None` for classes absent from the evaluation set or
    /// with a degenerate mean.
    pub delta: Vec<Option<f64>>,
    /// Mean ‖f‖ per class, the empirical concentration proxy.
    pub class_feature_norm: Vec<Option<f64>>,
    pub mean_feature_norm: f64,
    /// Classifier rows at snapshot time. For a fixed head these never change.
    pub reference: Vec<Vec<f64>>,
}

impl Snapshot {
    /// Mean δ over the classes that have one.
    pub fn mean_delta(&self) -> Option<f64> {
        let vals: Vec<f64> = self.delta.iter().flatten().copied().collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StationarityTrace {
    pub snapshots: Vec<Snapshot>,
}

impl StationarityTrace {
    pub fn push(&mut self, s: Snapshot) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if s.epoch <= last.epoch {
                return Err(Error::shape(format!(
                    "snapshot epoch {} does not follow {}",
                    s.epoch, last.epoch
                )));
            }
        }
        self.snapshots.push(s);
        Ok(())
    }

    pub fn at_epoch(&self, epoch: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.epoch == epoch)
    }

    pub fn final_mean_delta(&self) -> Option<f64> {
        self.snapshots.last().and_then(Snapshot::mean_delta)
    }

    /// Mean δ averaged over the first and last tenth (at least one) of the
    /// training snapshots; the epoch-0 snapshot is excluded.
    pub fn early_late_mean_delta(&self) -> Option<(f64, f64)> {
        let vals: Vec<f64> = self
            .snapshots
            .iter()
            .filter(|s| s.epoch > 0)
            .filter_map(Snapshot::mean_delta)
            .collect();
        if vals.is_empty() {
            return None;
        }
        let k = vals.len().div_ceil(10).max(1);
        let early = vals[..k].iter().sum::<f64>() / k as f64;
        let late = vals[vals.len() - k..].iter().sum::<f64>() / k as f64;
        Some((early, late))
    }

    pub fn references_constant(&self) -> bool {
        self.snapshots.windows(2).all(|w| w[0].reference == w[1].reference)
    }
}

/// Features and logits of the whole evaluation set, computed in chunks.
pub(crate) struct Evaluation {
    pub features: Tensor2,
    pub predictions: Vec<usize>,
}

impl Evaluation {
    pub fn accuracy(&self, labels: &[usize]) -> f64 {
        if labels.is_empty() {
            return 0.0;
        }
        let hits = self.predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
        hits as f64 / labels.len() as f64
    }

    pub fn mean_feature_norm(&self) -> f64 {
        let n = self.features.rows();
        if n == 0 {
            return 0.0;
        }
        self.features
            .iter_rows()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum::<f64>()
            / n as f64
    }
}

pub(crate) fn evaluate(net: &Network, ds: &Dataset) -> Result<Evaluation> {
    let d = net.feature_dim();
    let mut features = Vec::with_capacity(ds.len() * d);
    let mut predictions = Vec::with_capacity(ds.len());
    let indices: Vec<usize> = (0..ds.len()).collect();
    for chunk in indices.chunks(EVAL_CHUNK) {
        let out = net.forward(&ds.inputs.select_rows(chunk))?;
        features.extend_from_slice(out.features.as_slice());
        predictions.extend(crate::nn::argmax_rows(&out.logits));
    }
    Ok(Evaluation {
        features: Tensor2::new(ds.len(), d, features)?,
        predictions,
    })
}

pub(crate) fn snapshot_from_features(
    weights: &WeightMatrix,
    features: &Tensor2,
    labels: &[usize],
    epoch: usize,
) -> Result<Snapshot> {
    let means = class_feature_means(features, labels, weights.classes())?;
    let delta = means
        .iter()
        .enumerate()
        .map(|(c, m)| match m {
            Some(m) if !m.degenerate => Some(angular_deviation(weights.row(c), &m.direction)),
            _ => None,
        })
        .collect();
    let class_feature_norm = means.iter().map(|m| m.as_ref().map(|m| m.feature_norm)).collect();
    let n = features.rows();
    let mean_feature_norm = if n == 0 {
        0.0
    } else {
        features
            .iter_rows()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum::<f64>()
            / n as f64
    };
    Ok(Snapshot {
        epoch,
        delta,
        class_feature_norm,
        mean_feature_norm,
        reference: weights.rows().map(<[f64]>::to_vec).collect(),
    })
}

/// δ_c for every class of `eval_set` against the network's fixed weights.
pub fn stationarity_snapshot(net: &Network, eval_set: &Dataset, epoch: usize) -> Result<Snapshot> {
    let weights = match net.head() {
        ClassifierHead::Fixed(w) => w,
        ClassifierHead::Trainable { .. } => {
            return Err(Error::Unsupported(
                "stationarity snapshots need a fixed classifier head".into(),
            ))
        }
    };
    let eval = evaluate(net, eval_set)?;
    snapshot_from_features(weights, &eval.features, &eval_set.labels, epoch)
}
