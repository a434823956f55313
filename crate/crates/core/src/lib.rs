//! Fixed neural-network classifiers built from regular polytope vertices.
//!
//! * [`polytope`] builds and checks the weight matrices (d-simplex, d-cube,
//!   d-orthoplex and the Sylvester-Hadamard baseline).
//! * [`nn`] is a small dense network with softmax cross-entropy, analytic
//!   backpropagation and Adam, able to train against a fixed head.
//! * [`data`] reads IDX files and generates synthetic blobs.
//! * [`experiments`] runs training and measures feature stationarity,
//!   label-permutation sensitivity and the Hadamard comparison.
//! * [`cli`] wires config files to the above for the `polyhead` binary.

pub mod cli;
pub mod data;
pub mod error;
pub mod experiments;
pub mod nn;
pub mod polytope;

pub use error::{Error, Result};
