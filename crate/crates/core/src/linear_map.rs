//! Coupling operators `K` with forward and adjoint application.

use std::fmt::Debug;

use crate::linalg::{DenseMatrix, Vector};

pub trait LinearMap: Debug + Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &Vector) -> Vector;
    fn apply_adjoint(&self, y: &Vector) -> Vector;
    fn to_dense(&self) -> DenseMatrix;
}

impl LinearMap for DenseMatrix {
    fn rows(&self) -> usize {
        self.nrows()
    }

    fn cols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &Vector) -> Vector {
        self * x
    }

    fn apply_adjoint(&self, y: &Vector) -> Vector {
        self.tr_mul(y)
    }

    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }
}

/// Forward differences `(Dx)_i = x_{i+1} − x_i`, an `(n − 1) × n` map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForwardDifference {
    n: usize,
}

impl ForwardDifference {
    /// # Panics
    /// If `n < 2`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "forward differences need at least two samples");
        Self { n }
    }
}

impl LinearMap for ForwardDifference {
    fn rows(&self) -> usize {
        self.n - 1
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.n - 1, |i, _| x[i + 1] - x[i])
    }

    fn apply_adjoint(&self, y: &Vector) -> Vector {
        let m = self.n - 1;
        Vector::from_fn(self.n, |j, _| {
            let incoming = if j >= 1 { y[j - 1] } else { 0.0 };
            let outgoing = if j < m { y[j] } else { 0.0 };
            incoming - outgoing
        })
    }

    fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n - 1, self.n);
        for i in 0..self.n - 1 {
            d[(i, i)] = -1.0;
            d[(i, i + 1)] = 1.0;
        }
        d
    }
}

/// Largest `|⟨Kx, y⟩ − ⟨x, Kᵀy⟩|` relative to `‖x‖‖y‖‖K‖` over the given
/// probes.
pub fn adjoint_mismatch(k: &dyn LinearMap, probes: &[(Vector, Vector)]) -> f64 {
    let scale = k.to_dense().norm().max(1.0);
    probes
        .iter()
        .map(|(x, y)| {
            let lhs = k.apply(x).dot(y);
            let rhs = x.dot(&k.apply_adjoint(y));
            (lhs - rhs).abs() / (x.norm() * y.norm() * scale).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}
