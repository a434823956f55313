//! Dense networks with a fixed or trainable classifier head.

mod adam;
mod checkpoint;
pub mod gradcheck;
mod layer;
mod loss;
mod network;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, HeadRecord, LayerRecord};
pub use layer::{he_init, he_init_with, Activation, DenseLayer};
pub use loss::{softmax_cross_entropy, SoftmaxOutput};
pub use network::{argmax_rows, ClassifierHead, Forward, Gradients, HeadInit, Network, ParamGrad};
pub use tensor::Tensor2;
