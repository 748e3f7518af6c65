//! Maps between flat tori: an affine part plus a periodic perturbation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::linalg::{singular_values, Mat2};
use crate::spectral::Spectral;

/// Codimension of the graph: `f: T^2 -> R` or `f: T^2 -> R^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "usize", try_from = "usize")]
pub enum Codim {
    One,
    Two,
}

impl Codim {
    pub fn dim(self) -> usize {
        match self {
            Codim::One => 1,
            Codim::Two => 2,
        }
    }
}

impl From<Codim> for usize {
    fn from(c: Codim) -> usize {
        c.dim()
    }
}

impl TryFrom<usize> for Codim {
    type Error = String;

    fn try_from(m: usize) -> std::result::Result<Self, String> {
        match m {
            1 => Ok(Codim::One),
            2 => Ok(Codim::Two),
            other => Err(format!("codimension must be 1 or 2, got {other}")),
        }
    }
}

/// Fourier term `amp * cos(theta)` or `amp * sin(theta)` with
/// `theta = 2*pi*(k1*x/l1 + k2*y/l2)`; `amp` has one entry per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub k1: i32,
    pub k2: i32,
    pub kind: Wave,
    pub amp: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wave {
    Cos,
    Sin,
}

impl FourierTerm {
    pub fn phase(&self, grid: &PeriodicGrid, x: f64, y: f64) -> f64 {
        std::f64::consts::TAU * (self.k1 as f64 * x / grid.l1() + self.k2 as f64 * y / grid.l2())
    }

    pub fn wave(&self, grid: &PeriodicGrid, x: f64, y: f64) -> f64 {
        let th = self.phase(grid, x, y);
        match self.kind {
            Wave::Cos => th.cos(),
            Wave::Sin => th.sin(),
        }
    }
}

/// Sums Fourier terms into one grid field per component.
pub fn synthesize(grid: &PeriodicGrid, components: usize, terms: &[FourierTerm]) -> Vec<Vec<f64>> {
    (0..components)
        .map(|c| {
            grid.sample(|x, y| {
                terms.iter().map(|t| t.amp.get(c).copied().unwrap_or(0.0) * t.wave(grid, x, y)).sum()
            })
        })
        .collect()
}

/// `f(x) = affine * x + offset + u(x)` with `u` periodic.
///
/// The affine part carries the winding of the map and never changes under the
/// flow. Jacobian rows are target components; for codimension one the second
/// row of `affine` and the second offset entry are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MapField {
    grid: PeriodicGrid,
    codim: Codim,
    affine: Mat2,
    offset: [f64; 2],
    perturbation: Vec<Vec<f64>>,
}

impl MapField {
    pub fn new(
        grid: PeriodicGrid,
        codim: Codim,
        affine: Mat2,
        offset: [f64; 2],
        perturbation: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = codim.dim();
        if perturbation.len() != m {
            return Err(Error::InvalidInput(format!(
                "expected {m} perturbation components, got {}",
                perturbation.len()
            )));
        }
        if let Some(c) = perturbation.iter().position(|u| u.len() != grid.len()) {
            return Err(Error::InvalidInput(format!(
                "perturbation component {c} has {} values, grid has {}",
                perturbation[c].len(),
                grid.len()
            )));
        }
        if codim == Codim::One && (affine[1] != [0.0, 0.0] || offset[1] != 0.0) {
            return Err(Error::InvalidInput("codimension-one map must have a zero second affine row".into()));
        }
        Ok(Self { grid, codim, affine, offset, perturbation })
    }

    pub fn affine(grid: PeriodicGrid, codim: Codim, affine: Mat2, offset: [f64; 2]) -> Result<Self> {
        let zeros = vec![vec![0.0; grid.len()]; codim.dim()];
        Self::new(grid, codim, affine, offset, zeros)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn codim(&self) -> Codim {
        self.codim
    }

    pub fn affine_part(&self) -> &Mat2 {
        &self.affine
    }

    pub fn offset(&self) -> [f64; 2] {
        self.offset
    }

    pub fn perturbation(&self) -> &[Vec<f64>] {
        &self.perturbation
    }

    pub fn perturbation_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.perturbation
    }

    pub fn with_perturbation(&self, perturbation: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.grid, self.codim, self.affine, self.offset, perturbation)
    }

    /// Value of component `c` at grid point `(i, j)`.
    pub fn value(&self, c: usize, i: usize, j: usize) -> f64 {
        let [x, y] = self.grid.coords(i, j);
        self.affine[c][0] * x + self.affine[c][1] * y + self.offset[c] + self.perturbation[c][self.grid.index(i, j)]
    }

    /// Largest absolute perturbation value.
    pub fn sup_perturbation(&self) -> f64 {
        self.perturbation.iter().flatten().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn check_finite(&self) -> Result<()> {
        for (c, u) in self.perturbation.iter().enumerate() {
            if let Some(idx) = u.iter().position(|v| !v.is_finite()) {
                let (i, j) = self.grid.point(idx);
                return Err(Error::InvalidField { component: c, i, j });
            }
        }
        Ok(())
    }

    /// Multiplies the whole map (affine part, offset, perturbation) by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for row in out.affine.iter_mut() {
            row[0] *= s;
            row[1] *= s;
        }
        out.offset = [self.offset[0] * s, self.offset[1] * s];
        for u in out.perturbation.iter_mut() {
            u.iter_mut().for_each(|v| *v *= s);
        }
        out
    }
}

/// Per-point first and second derivatives of a map.
#[derive(Debug, Clone)]
pub struct JacobianField {
    pub codim: Codim,
    /// `df[p][c][k] = d_k f^c`.
    pub df: Vec<Mat2>,
    /// `d2f[p][c][k][l] = d_k d_l f^c`.
    pub d2f: Vec<[Mat2; 2]>,
}

impl JacobianField {
    pub fn len(&self) -> usize {
        self.df.len()
    }

    pub fn is_empty(&self) -> bool {
        self.df.is_empty()
    }
}

/// Spectral Jacobian and Hessian of `field`.
pub fn jacobian(sp: &Spectral, field: &MapField) -> Result<JacobianField> {
    field.check_finite()?;
    Ok(jacobian_of(sp, field.codim, &field.affine, &field.perturbation))
}

pub(crate) fn jacobian_of(sp: &Spectral, codim: Codim, affine: &Mat2, pert: &[Vec<f64>]) -> JacobianField {
    let n = sp.grid().len();
    let derivs = match codim {
        Codim::One => vec![sp.derivatives(&pert[0])],
        Codim::Two => {
            let (a, b) = sp.derivatives_pair(&pert[0], &pert[1]);
            vec![a, b]
        }
    };
    let mut df = vec![[[0.0; 2]; 2]; n];
    let mut d2f = vec![[[[0.0; 2]; 2]; 2]; n];
    for p in 0..n {
        for (c, d) in derivs.iter().enumerate() {
            df[p][c] = [affine[c][0] + d.d1[p], affine[c][1] + d.d2[p]];
            d2f[p][c] = [[d.d11[p], d.d12[p]], [d.d12[p], d.d22[p]]];
        }
    }
    JacobianField { codim, df, d2f }
}

/// Rescales the target metric so that the map becomes area decreasing.
///
/// Returns the scaled field `f / c` and `c >= 1` with
/// `sup lambda1 * lambda2 <= 1 - margin` after scaling. Fields that already
/// satisfy the bound are returned unchanged with `c = 1`.
pub fn normalize_to_area_decreasing(sp: &Spectral, field: &MapField, margin: f64) -> Result<(MapField, f64)> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidInput(format!("margin must lie in (0, 1), got {margin}")));
    }
    let sup = sup_area_product(&jacobian(sp, field)?);
    let target = 1.0 - margin;
    if sup <= target {
        return Ok((field.clone(), 1.0));
    }
    let mut c = (sup / target).sqrt();
    // lambda1 * lambda2 scales by 1/c^2; nudge against rounding
    while sup / (c * c) > target {
        c *= 1.0 + 4.0 * f64::EPSILON;
    }
    Ok((field.scaled(1.0 / c), c))
}

/// `sup lambda1 * lambda2` over the grid.
pub fn sup_area_product(jac: &JacobianField) -> f64 {
    jac.df
        .iter()
        .map(|j| {
            let (l1, l2) = singular_values(j);
            l1 * l2
        })
        .fold(0.0, f64::max)
}
