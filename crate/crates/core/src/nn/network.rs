use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layer::{he_init_with, Activation, DenseLayer};
use super::loss::{logits_gradient, softmax_cross_entropy};
use super::Tensor2;
use crate::error::{Error, Result};
use crate::polytope::WeightMatrix;

/// Final linear map from features to logits.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierHead {
    /// Unit-norm polytope (or Hadamard) rows, no bias, never updated.
    Fixed(WeightMatrix),
    /// Conventional learnable classifier: unnormalized weights (K x d) plus bias.
    Trainable { weights: Tensor2, bias: Vec<f64> },
}

impl ClassifierHead {
    pub fn classes(&self) -> usize {
        match self {
            ClassifierHead::Fixed(w) => w.classes(),
            ClassifierHead::Trainable { weights, .. } => weights.rows(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            ClassifierHead::Fixed(w) => w.dim(),
            ClassifierHead::Trainable { weights, .. } => weights.cols(),
        }
    }

    pub fn is_trainable(&self) -> bool {
        matches!(self, ClassifierHead::Trainable { .. })
    }

    pub fn fixed_weights(&self) -> Option<&WeightMatrix> {
        match self {
            ClassifierHead::Fixed(w) => Some(w),
            ClassifierHead::Trainable { .. } => None,
        }
    }

    fn logits(&self, features: &Tensor2) -> Result<Tensor2> {
        match self {
            ClassifierHead::Fixed(w) => {
                let w = Tensor2::new(w.classes(), w.dim(), w.as_slice().to_vec())?;
                features.matmul_t(&w)
            }
            ClassifierHead::Trainable { weights, bias } => {
                let mut z = features.matmul_t(weights)?;
                z.add_row_vector(bias);
                Ok(z)
            }
        }
    }

    fn weight_tensor(&self) -> Tensor2 {
        match self {
            ClassifierHead::Fixed(w) => Tensor2::new(w.classes(), w.dim(), w.as_slice().to_vec())
                .expect("weight matrices are finite"),
            ClassifierHead::Trainable { weights, .. } => weights.clone(),
        }
    }
}

/// How to create the classifier head when building a network.
#[derive(Debug, Clone, PartialEq)]
pub enum HeadInit {
    Fixed(WeightMatrix),
    Trainable { classes: usize, feature_dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    /// Penultimate activations f, one row per sample.
    pub features: Tensor2,
    pub logits: Tensor2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad {
    pub weights: Tensor2,
    pub bias: Vec<f64>,
}

/// Gradients for every trainable parameter. `head` is `None` for fixed heads.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<ParamGrad>,
    pub head: Option<ParamGrad>,
}

impl Gradients {
    /// Flat views in the same order as [`Network::params_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 2);
        for g in self.layers.iter().chain(&self.head) {
            out.push(g.weights.as_slice());
            out.push(g.bias.as_slice());
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) struct Cache {
    /// Input to each layer; `inputs[0]` is the batch.
    inputs: Vec<Tensor2>,
    pre: Vec<Tensor2>,
    pub(crate) features: Tensor2,
    pub(crate) logits: Tensor2,
}

impl Cache {
    /// Sign pattern of every ReLU pre-activation, used to detect kinks.
    pub(crate) fn relu_pattern(&self, layers: &[DenseLayer]) -> Vec<bool> {
        layers
            .iter()
            .zip(&self.pre)
            .filter(|(l, _)| l.activation == Activation::Relu)
            .flat_map(|(_, z)| z.as_slice().iter().map(|&v| v > 0.0))
            .collect()
    }
}

/// Dense feature extractor followed by a classifier head.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
    head: ClassifierHead,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>, head: ClassifierHead) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::shape("network needs at least one dense layer"));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::shape(format!(
                    "layer with {} outputs feeds a layer with {} inputs",
                    pair[0].outputs(),
                    pair[1].inputs()
                )));
            }
        }
        let last = layers.last().expect("non-empty").outputs();
        if last != head.input_dim() {
            return Err(Error::shape(format!(
                "feature layer emits {last} values, head expects {}",
                head.input_dim()
            )));
        }
        if let ClassifierHead::Trainable { weights, bias } = &head {
            if bias.len() != weights.rows() {
                return Err(Error::shape("head bias does not match class count"));
            }
        }
        Ok(Network { layers, head })
    }

    /// `input → hidden… (ReLU) → d (identity) → head`, He-initialized from `seed`.
    ///
    /// The feature layer is linear so features can point anywhere on the
    /// sphere, including directions with negative coordinates.
    pub fn mlp(input_dim: usize, hidden: &[usize], head: HeadInit, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden.contains(&0) {
            return Err(Error::shape("layer extents must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feature_dim = match &head {
            HeadInit::Fixed(w) => w.dim(),
            HeadInit::Trainable { feature_dim, .. } => *feature_dim,
        };
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = input_dim;
        for &h in hidden {
            layers.push(DenseLayer::he(width, h, Activation::Relu, &mut rng));
            width = h;
        }
        layers.push(DenseLayer::he(width, feature_dim, Activation::Identity, &mut rng));

        let head = match head {
            HeadInit::Fixed(w) => ClassifierHead::Fixed(w),
            HeadInit::Trainable { classes, feature_dim } => ClassifierHead::Trainable {
                weights: he_init_with(classes, feature_dim, &mut rng),
                bias: vec![0.0; classes],
            },
        };
        Network::new(layers, head)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn head(&self) -> &ClassifierHead {
        &self.head
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn feature_dim(&self) -> usize {
        self.head.input_dim()
    }

    pub fn classes(&self) -> usize {
        self.head.classes()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub(crate) fn forward_cached(&self, batch: &Tensor2) -> Result<Cache> {
        if batch.cols() != self.input_dim() {
            return Err(Error::shape(format!(
                "network expects {} inputs, batch has {}",
                self.input_dim(),
                batch.cols()
            )));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let (z, a) = layer.forward(&x)?;
            inputs.push(x);
            pre.push(z);
            x = a;
        }
        let logits = self.head.logits(&x)?;
        Ok(Cache {
            inputs,
            pre,
            features: x,
            logits,
        })
    }

    pub fn forward(&self, batch: &Tensor2) -> Result<Forward> {
        let cache = self.forward_cached(batch)?;
        Ok(Forward {
            features: cache.features,
            logits: cache.logits,
        })
    }

    pub fn loss(&self, batch: &Tensor2, labels: &[usize]) -> Result<f64> {
        let out = self.forward(batch)?;
        Ok(softmax_cross_entropy(&out.logits, labels)?.loss)
    }

    /// Argmax of the logits per row; ties go to the lowest class index.
    pub fn predict(&self, batch: &Tensor2) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.forward(batch)?.logits))
    }

    /// Mean cross-entropy and its gradient for every trainable parameter.
    pub fn backward(&self, batch: &Tensor2, labels: &[usize]) -> Result<(f64, Gradients)> {
        let cache = self.forward_cached(batch)?;
        let out = softmax_cross_entropy(&cache.logits, labels)?;
        let dlogits = logits_gradient(&out.probs, labels);

        let head = match &self.head {
            ClassifierHead::Fixed(_) => None,
            ClassifierHead::Trainable { .. } => Some(ParamGrad {
                weights: dlogits.t_matmul(&cache.features)?,
                bias: dlogits.column_sums(),
            }),
        };
        let mut grad = dlogits.matmul(&self.head.weight_tensor())?;

        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            layer.activation.backprop(&cache.pre[i], &mut grad);
            let weights = grad.t_matmul(&cache.inputs[i])?;
            let bias = grad.column_sums();
            if i > 0 {
                grad = grad.matmul(&layer.weights)?;
            }
            layers.push(ParamGrad { weights, bias });
        }
        layers.reverse();
        Ok((out.loss, Gradients { layers, head }))
    }

    fn params(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &self.layers {
            out.push(l.weights.as_slice());
            out.push(l.bias.as_slice());
        }
        if let ClassifierHead::Trainable { weights, bias } = &self.head {
            out.push(weights.as_slice());
            out.push(bias.as_slice());
        }
        out
    }

    /// Mutable views of every trainable parameter; a fixed head contributes none.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 2);
        for l in &mut self.layers {
            out.push(l.weights.as_mut_slice());
            out.push(l.bias.as_mut_slice());
        }
        if let ClassifierHead::Trainable { weights, bias } = &mut self.head {
            out.push(weights.as_mut_slice());
            out.push(bias.as_mut_slice());
        }
        out
    }

    pub fn param_sizes(&self) -> Vec<usize> {
        self.params().iter().map(|p| p.len()).collect()
    }
}

pub fn argmax_rows(t: &Tensor2) -> Vec<usize> {
    t.iter_rows()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
