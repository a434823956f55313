//! JSON checkpoints of a network and the run that produced it.
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so a save/load cycle reproduces every parameter bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, ClassifierHead, DenseLayer, Network, Tensor2};
use crate::error::Result;
use crate::polytope::{PolytopeKind, WeightMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HeadRecord {
    Fixed {
        kind: PolytopeKind,
        #[serde(rename = "K")]
        classes: usize,
        d: usize,
        rows: Vec<Vec<f64>>,
    },
    Trainable {
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: serde_json::Value,
    pub seed: u64,
    pub epoch: usize,
    pub layers: Vec<LayerRecord>,
    pub head: HeadRecord,
}

impl Checkpoint {
    pub fn capture(net: &Network, config: serde_json::Value, seed: u64, epoch: usize) -> Self {
        let layers = net
            .layers()
            .iter()
            .map(|l| LayerRecord {
                weights: l.weights.to_rows(),
                bias: l.bias.clone(),
                activation: l.activation,
            })
            .collect();
        let head = match net.head() {
            ClassifierHead::Fixed(w) => HeadRecord::Fixed {
                kind: w.kind(),
                classes: w.classes(),
                d: w.dim(),
                rows: w.rows().map(<[f64]>::to_vec).collect(),
            },
            ClassifierHead::Trainable { weights, bias } => HeadRecord::Trainable {
                weights: weights.to_rows(),
                bias: bias.clone(),
            },
        };
        Checkpoint {
            config,
            seed,
            epoch,
            layers,
            head,
        }
    }

    pub fn network(&self) -> Result<Network> {
        let layers = self
            .layers
            .iter()
            .map(|l| DenseLayer::new(Tensor2::from_rows(&l.weights)?, l.bias.clone(), l.activation))
            .collect::<Result<Vec<_>>>()?;
        let head = match &self.head {
            HeadRecord::Fixed {
                kind,
                classes,
                d,
                rows,
            } => ClassifierHead::Fixed(WeightMatrix::from_rows(*kind, *classes, *d, rows.concat())?),
            HeadRecord::Trainable { weights, bias } => ClassifierHead::Trainable {
                weights: Tensor2::from_rows(weights)?,
                bias: bias.clone(),
            },
        };
        Network::new(layers, head)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::HeadInit;
    use crate::polytope::build_orthoplex;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for head in [
            HeadInit::Fixed(build_orthoplex(5).unwrap()),
            HeadInit::Trainable {
                classes: 5,
                feature_dim: 4,
            },
        ] {
            let net = Network::mlp(7, &[6], head, 21).unwrap();
            let ckpt = Checkpoint::capture(&net, serde_json::json!({"note": "x"}), 21, 3);
            let path = dir.path().join("ckpt.json");
            ckpt.save(&path).unwrap();
            let loaded = Checkpoint::load(&path).unwrap();
            assert_eq!(loaded, ckpt);
            assert_eq!(loaded.network().unwrap(), net);
        }
    }

    #[test]
    fn head_record_is_tagged() {
        let net = Network::mlp(3, &[], HeadInit::Fixed(build_orthoplex(4).unwrap()), 0).unwrap();
        let v = serde_json::to_value(Checkpoint::capture(&net, serde_json::Value::Null, 0, 0)).unwrap();
        assert_eq!(v["head"]["mode"], "fixed");
        assert_eq!(v["head"]["kind"], "orthoplex");
        assert_eq!(v["head"]["K"], 4);
    }
}
