use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Tensor2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: &Tensor2) -> Tensor2 {
        match self {
            Activation::Identity => z.clone(),
            Activation::Relu => {
                let mut a = z.clone();
                a.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
                a
            }
        }
    }

    /// Multiplies `grad` in place by the derivative at pre-activation `z`.
    pub(crate) fn backprop(self, z: &Tensor2, grad: &mut Tensor2) {
        if self == Activation::Relu {
            for (g, &v) in grad.as_mut_slice().iter_mut().zip(z.as_slice()) {
                if v <= 0.0 {
                    *g = 0.0;
                }
            }
        }
    }
}

/// Fully connected layer computing `act(x · Wᵀ + b)` with `W` stored out x in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Tensor2,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Tensor2, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::shape(format!(
                "bias has {} entries for {} outputs",
                bias.len(),
                weights.rows()
            )));
        }
        if bias.iter().any(|b| !b.is_finite()) || !weights.is_finite() {
            return Err(Error::shape("layer parameters must be finite"));
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    /// He-initialized weights drawn from `rng`, zero bias.
    pub fn he<R: Rng>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        DenseLayer {
            weights: he_init_with(outputs, inputs, rng),
            bias: vec![0.0; outputs],
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    /// Returns (pre-activation, activation).
    pub fn forward(&self, x: &Tensor2) -> Result<(Tensor2, Tensor2)> {
        if x.cols() != self.inputs() {
            return Err(Error::shape(format!(
                "layer expects {} inputs, batch has {}",
                self.inputs(),
                x.cols()
            )));
        }
        let mut z = x.matmul_t(&self.weights)?;
        z.add_row_vector(&self.bias);
        let a = self.activation.apply(&z);
        Ok((z, a))
    }
}

/// `out x in` tensor with entries from N(0, 2/in), seeded.
pub fn he_init(outputs: usize, inputs: usize, seed: u64) -> Tensor2 {
    he_init_with(outputs, inputs, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn he_init_with<R: Rng>(outputs: usize, inputs: usize, rng: &mut R) -> Tensor2 {
    let std = (2.0 / inputs.max(1) as f64).sqrt();
    let normal = Normal::new(0.0, std).expect("positive standard deviation");
    let data = (0..outputs * inputs).map(|_| normal.sample(rng)).collect();
    Tensor2::new(outputs, inputs, data).expect("gaussian samples are finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn he_init_is_deterministic() {
        let a = he_init(64, 784, 1);
        let b = he_init(64, 784, 1);
        assert_eq!(a.as_slice(), b.as_slice());
        assert_ne!(a.as_slice(), he_init(64, 784, 2).as_slice());
    }

    #[test]
    fn he_init_variance() {
        let t = he_init(1000, 100, 3);
        let n = t.as_slice().len() as f64;
        let mean = t.as_slice().iter().sum::<f64>() / n;
        let var = t.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var / 0.02 - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn he_init_single_entry() {
        let t = he_init(1, 1, 7);
        assert_eq!(t.shape(), (1, 1));
        assert!(t.get(0, 0).is_finite());
    }

    #[test]
    fn relu_forward_and_mask() {
        let w = Tensor2::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let layer = DenseLayer::new(w, vec![0.0, 0.5], Activation::Relu).unwrap();
        let x = Tensor2::from_rows(&[vec![-2.0, 1.0]]).unwrap();
        let (z, a) = layer.forward(&x).unwrap();
        assert_eq!(z.as_slice(), &[-2.0, -0.5]);
        assert_eq!(a.as_slice(), &[0.0, 0.0]);

        let mut g = Tensor2::from_rows(&[vec![1.0, 1.0]]).unwrap();
        Activation::Relu.backprop(&z, &mut g);
        assert_eq!(g.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn rejects_mismatched_bias_and_input() {
        assert!(DenseLayer::new(Tensor2::zeros(2, 3), vec![0.0], Activation::Relu).is_err());
        let layer = DenseLayer::new(Tensor2::zeros(2, 3), vec![0.0; 2], Activation::Relu).unwrap();
        assert!(layer.forward(&Tensor2::zeros(1, 2)).is_err());
    }
}
