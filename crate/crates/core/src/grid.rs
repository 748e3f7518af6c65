//! Rectangular periodic grids on flat tori.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on the flat torus `[0, l1) x [0, l2)`.
///
/// Grid point `(i, j)` sits at `(i * l1 / n1, j * l2 / n2)`. Scalar fields are
/// stored with `i` varying fastest, so the flat index is `i + n1 * j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    n1: usize,
    n2: usize,
    l1: f64,
    l2: f64,
}

impl PeriodicGrid {
    pub fn new(n1: usize, n2: usize, l1: f64, l2: f64) -> Result<Self> {
        for (name, n) in [("n1", n1), ("n2", n2)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("{name} must be even and >= 8, got {n}")));
            }
        }
        for (name, l) in [("l1", l1), ("l2", l2)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} must be a positive length, got {l}")));
            }
        }
        Ok(Self { n1, n2, l1, l2 })
    }

    /// Square `n x n` grid on the `2*pi`-periodic torus.
    pub fn square_2pi(n: usize) -> Result<Self> {
        Self::new(n, n, std::f64::consts::TAU, std::f64::consts::TAU)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.l1 / self.n1 as f64, self.l2 / self.n2 as f64)
    }

    pub fn h_min(&self) -> f64 {
        let (h1, h2) = self.spacing();
        h1.min(h2)
    }

    /// Quadrature weight of a single grid cell.
    pub fn cell_area(&self) -> f64 {
        self.l1 * self.l2 / self.len() as f64
    }

    pub fn is_square(&self) -> bool {
        self.l1 == self.l2
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.n1 * j
    }

    #[inline]
    pub fn point(&self, idx: usize) -> (usize, usize) {
        (idx % self.n1, idx / self.n1)
    }

    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> [f64; 2] {
        let (h1, h2) = self.spacing();
        [i as f64 * h1, j as f64 * h2]
    }

    /// Evaluates `f` at every grid point, in storage order.
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                let [x, y] = self.coords(i, j);
                out.push(f(x, y));
            }
        }
        out
    }
}
