use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{dot, PolytopeKind, WeightMatrix};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const ANGLE_TOL: f64 = 1e-9;

/// Symmetric K x K matrix of angles between weight rows, in radians.
///
/// Dot products are clamped to [-1, 1] before `acos` so exactly antipodal or
/// identical rows never produce NaN.
pub fn pairwise_angles(w: &WeightMatrix) -> Vec<f64> {
    let k = w.classes();
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let a = w.dot(i, j).clamp(-1.0, 1.0).acos();
            out[i * k + j] = a;
            out[j * k + i] = a;
        }
    }
    out
}

/// Closed-form angle between a vertex and each of its connected vertices.
pub fn expected_neighbor_angle(kind: PolytopeKind, dim: usize) -> Result<f64> {
    let d = dim as f64;
    match kind {
        PolytopeKind::Simplex if dim >= 1 => Ok((-1.0 / d).acos()),
        PolytopeKind::Orthoplex if dim >= 2 => Ok(FRAC_PI_2),
        PolytopeKind::Cube if dim >= 2 => Ok(((d - 2.0) / d).acos()),
        PolytopeKind::Hadamard => Err(Error::UnsupportedKind("hadamard")),
        _ => Err(Error::InvalidDimension {
            kind: kind.name(),
            dim,
        }),
    }
}

/// Vertex connectivity of a polytope classifier: `neighbors(i)` is C(i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    pub fn vertex_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Each undirected edge once, as (i, j) with i < j.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.neighbors
            .iter()
            .enumerate()
            .all(|(i, ns)| ns.iter().all(|&j| self.neighbors[j].contains(&i)))
    }
}

/// Edge structure implied by the builder's vertex enumeration order.
///
/// Simplex: complete graph. Cube: codes at Hamming distance one. Orthoplex:
/// every vertex except its antipode (rows 2a and 2a+1 share axis a).
pub fn adjacency(w: &WeightMatrix) -> Result<AdjacencyGraph> {
    let k = w.classes();
    let connected: fn(usize, usize) -> bool = match w.kind() {
        PolytopeKind::Simplex => |_, _| true,
        PolytopeKind::Cube => |i, j| (i ^ j).count_ones() == 1,
        PolytopeKind::Orthoplex => |i, j| i / 2 != j / 2,
        PolytopeKind::Hadamard => return Err(Error::UnsupportedKind("hadamard")),
    };
    let neighbors = (0..k)
        .map(|i| (0..k).filter(|&j| j != i && connected(i, j)).collect())
        .collect();
    Ok(AdjacencyGraph { neighbors })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kind: PolytopeKind,
    pub classes: usize,
    pub dim: usize,
    pub norm_ok: bool,
    pub angle_ok: bool,
    pub capacity_ok: bool,
    pub distinct_ok: bool,
    pub max_norm_error: f64,
    pub max_angle_error: f64,
    /// Closed-form neighbor angle the rows were checked against, if one applies.
    pub expected_angle: Option<f64>,
}

impl VerifyReport {
    pub fn all_ok(&self) -> bool {
        self.norm_ok && self.angle_ok && self.capacity_ok && self.distinct_ok
    }
}

/// Checks unit norms, vertex capacity, row distinctness and neighbor angles.
///
/// Hadamard rows are checked for mutual orthogonality instead of a neighbor
/// angle; with K > d that check and the capacity check both fail.
pub fn verify(w: &WeightMatrix) -> VerifyReport {
    let (k, d) = (w.classes(), w.dim());

    let max_norm_error = w
        .rows()
        .map(|r| (dot(r, r).sqrt() - 1.0).abs())
        .fold(0.0, f64::max);

    let capacity_ok = match w.kind() {
        PolytopeKind::Simplex => k == d + 1,
        PolytopeKind::Orthoplex => k <= 2 * d,
        PolytopeKind::Cube => d >= usize::BITS as usize || k <= 1 << d,
        PolytopeKind::Hadamard => d.is_power_of_two() && k <= d,
    };

    let distinct_ok = (0..k).all(|i| {
        (i + 1..k).all(|j| {
            w.row(i)
                .iter()
                .zip(w.row(j))
                .any(|(a, b)| (a - b).abs() > NORM_TOL)
        })
    });

    let angles = pairwise_angles(w);
    let (expected_angle, max_angle_error) = match w.kind() {
        PolytopeKind::Hadamard => {
            let err = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .map(|(i, j)| (angles[i * k + j] - FRAC_PI_2).abs())
                .fold(0.0, f64::max);
            (Some(FRAC_PI_2), err)
        }
        kind => match (expected_neighbor_angle(kind, d), adjacency(w)) {
            (Ok(expect), Ok(graph)) => {
                let err = graph
                    .edges()
                    .map(|(i, j)| (angles[i * k + j] - expect).abs())
                    .fold(0.0, f64::max);
                (Some(expect), err)
            }
            // no closed form below the minimum dimension; nothing to compare
            _ => (None, 0.0),
        },
    };

    VerifyReport {
        kind: w.kind(),
        classes: k,
        dim: d,
        norm_ok: max_norm_error <= NORM_TOL,
        angle_ok: max_angle_error <= ANGLE_TOL,
        capacity_ok,
        distinct_ok,
        max_norm_error,
        max_angle_error,
        expected_angle,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::polytope::{
        build_cube, build_hadamard_with_dim, build_orthoplex, build_simplex, WeightMatrix,
    };

    #[test]
    fn simplex_three_angles() {
        let a = pairwise_angles(&build_simplex(3).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 2.0 * PI / 3.0 };
                assert!((a[i * 3 + j] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthoplex_four_angles_are_right_or_straight() {
        let a = pairwise_angles(&build_orthoplex(4).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let v = a[i * 4 + j];
                    assert!(v == FRAC_PI_2 || v == PI, "{v}");
                }
            }
        }
    }

    #[test]
    fn cube_neighbor_angle() {
        let w = build_cube(8).unwrap();
        let a = pairwise_angles(&w);
        let g = adjacency(&w).unwrap();
        for (i, j) in g.edges() {
            assert!((a[i * 8 + j] - (1.0f64 / 3.0).acos()).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_angles() {
        let simplex = expected_neighbor_angle(PolytopeKind::Simplex, 2).unwrap();
        assert!((simplex - 2.0944).abs() < 1e-4);
        assert_eq!(
            expected_neighbor_angle(PolytopeKind::Orthoplex, 17).unwrap(),
            FRAC_PI_2
        );
        let cube = expected_neighbor_angle(PolytopeKind::Cube, 3).unwrap();
        assert!((cube - 1.2310).abs() < 1e-4);
        assert!((cube.to_degrees() - 70.53).abs() < 1e-2);
        assert!(matches!(
            expected_neighbor_angle(PolytopeKind::Hadamard, 8),
            Err(Error::UnsupportedKind(_))
        ));
        assert!(expected_neighbor_angle(PolytopeKind::Cube, 1).is_err());
        assert!(expected_neighbor_angle(PolytopeKind::Simplex, 0).is_err());
    }

    #[test]
    fn neighbor_angles_are_monotone_in_dimension() {
        let mut prev_s = f64::INFINITY;
        let mut prev_c = f64::INFINITY;
        for d in 2..2000 {
            let s = expected_neighbor_angle(PolytopeKind::Simplex, d).unwrap();
            let c = expected_neighbor_angle(PolytopeKind::Cube, d).unwrap();
            assert!(s < prev_s && s > FRAC_PI_2);
            assert!(c < prev_c && c > 0.0);
            prev_s = s;
            prev_c = c;
        }
        assert!(prev_s - FRAC_PI_2 < 1e-3);
        assert!(prev_c < 0.05);
    }

    #[test]
    fn adjacency_degrees() {
        let g = adjacency(&build_simplex(4).unwrap()).unwrap();
        assert!((0..4).all(|i| g.degree(i) == 3));

        let g = adjacency(&build_cube(8).unwrap()).unwrap();
        assert!((0..8).all(|i| g.degree(i) == 3));
        assert_eq!(g.edges().count(), 12);

        let g = adjacency(&build_orthoplex(6).unwrap()).unwrap();
        assert!((0..6).all(|i| g.degree(i) == 4));
        assert!(!g.neighbors(0).contains(&1));

        for g in [
            adjacency(&build_cube(11).unwrap()).unwrap(),
            adjacency(&build_orthoplex(7).unwrap()).unwrap(),
        ] {
            assert!(g.is_symmetric());
        }

        assert!(adjacency(&build_hadamard_with_dim(4, 4).unwrap()).is_err());
    }

    #[test]
    fn verify_accepts_constructions() {
        let r = verify(&build_simplex(10).unwrap());
        assert!(r.all_ok(), "{r:?}");
        assert!(r.max_angle_error < 1e-9);

        let r = verify(&build_cube(16).unwrap());
        assert!(r.all_ok(), "{r:?}");

        let r = verify(&build_orthoplex(10).unwrap());
        assert!(r.all_ok());
        assert!(r.max_angle_error < 1e-12);

        // one-dimensional cube has no closed-form neighbor angle
        let r = verify(&build_cube(2).unwrap());
        assert!(r.all_ok());
        assert_eq!(r.expected_angle, None);
    }

    #[test]
    fn verify_flags_scaled_row() {
        let w = build_simplex(6).unwrap();
        let mut data = w.as_slice().to_vec();
        data[..5].iter_mut().for_each(|v| *v *= 2.0);
        let bad = WeightMatrix::from_rows(PolytopeKind::Simplex, 6, 5, data).unwrap();
        let r = verify(&bad);
        assert!(!r.norm_ok);
        assert!((r.max_norm_error - 1.0).abs() < 1e-12);
        assert!(!r.all_ok());
    }

    #[test]
    fn verify_flags_overfull_hadamard() {
        let r = verify(&build_hadamard_with_dim(10, 8).unwrap());
        assert!(r.norm_ok);
        assert!(!r.capacity_ok);
        assert!(!r.distinct_ok);
        assert!(!r.angle_ok);

        let r = verify(&build_hadamard_with_dim(8, 8).unwrap());
        assert!(r.all_ok(), "{r:?}");
    }
}
