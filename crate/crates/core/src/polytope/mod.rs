//! Classifier weight matrices taken from regular polytope vertices.
//!
//! Three families exist in every dimension: the d-simplex (K = d + 1
//! equiangular vertices), the d-orthoplex (K = 2d signed basis vectors) and
//! the d-cube (K = 2^d sign patterns). A Sylvester-Hadamard matrix is provided
//! as the orthogonal baseline. Every builder returns unit-norm rows in a fixed
//! enumeration order, so two calls with the same arguments are bit-identical.

mod geometry;
mod io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use geometry::{
    adjacency, expected_neighbor_angle, pairwise_angles, verify, AdjacencyGraph, VerifyReport,
};
pub use io::{read_weights, write_weights, WeightFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolytopeKind {
    Simplex,
    Cube,
    Orthoplex,
    Hadamard,
}

impl PolytopeKind {
    pub const ALL: [PolytopeKind; 4] = [
        PolytopeKind::Simplex,
        PolytopeKind::Cube,
        PolytopeKind::Orthoplex,
        PolytopeKind::Hadamard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolytopeKind::Simplex => "simplex",
            PolytopeKind::Cube => "cube",
            PolytopeKind::Orthoplex => "orthoplex",
            PolytopeKind::Hadamard => "hadamard",
        }
    }
}

impl fmt::Display for PolytopeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolytopeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simplex" => Ok(PolytopeKind::Simplex),
            "cube" => Ok(PolytopeKind::Cube),
            "orthoplex" => Ok(PolytopeKind::Orthoplex),
            "hadamard" => Ok(PolytopeKind::Hadamard),
            other => Err(Error::format(format!("unknown polytope kind `{other}`"))),
        }
    }
}

/// K unit row vectors in R^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    kind: PolytopeKind,
    classes: usize,
    dim: usize,
    data: Vec<f64>,
    orthogonal: bool,
}

impl WeightMatrix {
    /// Wraps raw rows without checking the polytope invariants; use [`verify`]
    /// for that. Only the shape and finiteness are enforced here.
    pub fn from_rows(kind: PolytopeKind, classes: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if classes == 0 || dim == 0 {
            return Err(Error::shape(format!("empty weight matrix {classes}x{dim}")));
        }
        if data.len() != classes * dim {
            return Err(Error::shape(format!(
                "weight data has {} values, expected {classes}x{dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::format("weight matrix contains non-finite values"));
        }
        let mut w = WeightMatrix {
            kind,
            classes,
            dim,
            data,
            orthogonal: false,
        };
        w.orthogonal = w.rows_mutually_orthogonal();
        Ok(w)
    }

    pub fn kind(&self) -> PolytopeKind {
        self.kind
    }

    /// Number of classes K.
    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Embedding dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Whether all rows are mutually orthogonal. A Hadamard matrix with more
    /// classes than dimensions reports `false`.
    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn dot(&self, i: usize, j: usize) -> f64 {
        dot(self.row(i), self.row(j))
    }

    /// Full K x K matrix of row inner products, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let k = self.classes;
        let mut g = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let v = self.dot(i, j);
                g[i * k + j] = v;
                g[j * k + i] = v;
            }
        }
        g
    }

    fn rows_mutually_orthogonal(&self) -> bool {
        (0..self.classes)
            .all(|i| (i + 1..self.classes).all(|j| self.dot(i, j).abs() <= 1e-12))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_classes(classes: usize) -> Result<()> {
    if classes < 2 {
        Err(Error::InvalidClassCount(classes))
    } else {
        Ok(())
    }
}

/// Embedding dimension needed to host `classes` vertices of the given kind.
pub fn embedding_dim(kind: PolytopeKind, classes: usize) -> Result<usize> {
    check_classes(classes)?;
    Ok(match kind {
        PolytopeKind::Simplex => classes - 1,
        PolytopeKind::Cube => ceil_log2(classes),
        PolytopeKind::Orthoplex => classes.div_ceil(2),
        PolytopeKind::Hadamard => classes.next_power_of_two(),
    })
}

fn ceil_log2(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros() as usize
}

/// Builds the weights for `kind` at its natural embedding dimension.
pub fn build(kind: PolytopeKind, classes: usize) -> Result<WeightMatrix> {
    match kind {
        PolytopeKind::Simplex => build_simplex(classes),
        PolytopeKind::Cube => build_cube(classes),
        PolytopeKind::Orthoplex => build_orthoplex(classes),
        PolytopeKind::Hadamard => build_hadamard(classes),
    }
}

/// Regular simplex with K = d + 1 vertices in R^d.
///
/// Starts from the basis vectors e_1..e_d plus the extra vertex
/// α·(e_1 + … + e_d) with α = (1 − √(d+1)) / d, which is equidistant from all
/// basis vectors. The vertices are then centered on their centroid and scaled
/// to unit length, giving pairwise inner products of −1/d.
pub fn build_simplex(classes: usize) -> Result<WeightMatrix> {
    check_classes(classes)?;
    let d = classes - 1;
    let df = d as f64;
    let alpha = (1.0 - (df + 1.0).sqrt()) / df;

    let mut data = vec![0.0; classes * d];
    for i in 0..d {
        data[i * d + i] = 1.0;
    }
    data[d * d..].fill(alpha);

    // every coordinate sums to 1 + α over the K vertices
    let centroid = (1.0 + alpha) / classes as f64;
    for row in data.chunks_exact_mut(d) {
        row.iter_mut().for_each(|v| *v -= centroid);
        normalize(row);
    }
    WeightMatrix::from_rows(PolytopeKind::Simplex, classes, d, data)
}

/// Signed basis vectors +e_1, −e_1, +e_2, −e_2, … truncated to K rows.
pub fn build_orthoplex(classes: usize) -> Result<WeightMatrix> {
    check_classes(classes)?;
    let d = classes.div_ceil(2);
    let mut data = vec![0.0; classes * d];
    for k in 0..classes {
        data[k * d + k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
    }
    WeightMatrix::from_rows(PolytopeKind::Orthoplex, classes, d, data)
}

/// Hypercube vertices (±1/√d)^d in binary counting order, truncated to K rows.
///
/// Row k is the d-bit binary code of k, most significant bit first, with bit 0
/// mapped to −1/√d and bit 1 to +1/√d.
pub fn build_cube(classes: usize) -> Result<WeightMatrix> {
    check_classes(classes)?;
    let d = ceil_log2(classes);
    let s = 1.0 / (d as f64).sqrt();
    let mut data = Vec::with_capacity(classes * d);
    for k in 0..classes {
        for bit in (0..d).rev() {
            data.push(if (k >> bit) & 1 == 1 { s } else { -s });
        }
    }
    WeightMatrix::from_rows(PolytopeKind::Cube, classes, d, data)
}

/// Sylvester-Hadamard weights at the smallest power-of-two order ≥ K.
pub fn build_hadamard(classes: usize) -> Result<WeightMatrix> {
    check_classes(classes)?;
    build_hadamard_with_dim(classes, classes.next_power_of_two())
}

/// Sylvester-Hadamard weights with an explicit embedding dimension `dim`.
///
/// Rows are taken from a Sylvester matrix of order max(dim, K), truncated to
/// the first `dim` columns and scaled by 1/√dim. With K ≤ dim the rows are
/// mutually orthogonal. With K > dim the rows beyond `dim` repeat earlier
/// directions and the matrix is flagged as not orthogonal.
pub fn build_hadamard_with_dim(classes: usize, dim: usize) -> Result<WeightMatrix> {
    check_classes(classes)?;
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidHadamardOrder(dim));
    }
    let s = 1.0 / (dim as f64).sqrt();
    let mut data = Vec::with_capacity(classes * dim);
    for i in 0..classes {
        for j in 0..dim {
            // H[i][j] = (-1)^popcount(i & j) for the Sylvester construction
            let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            data.push(sign * s);
        }
    }
    WeightMatrix::from_rows(PolytopeKind::Hadamard, classes, dim, data)
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}
