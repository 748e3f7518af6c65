//! Pointwise geometry of a graph: metric, second fundamental form, curvature
//! norms and the parallel tensor `S = <pi1 X, pi1 Y> - <pi2 X, pi2 Y>`.

use crate::error::Result;
use crate::field::{jacobian, Codim, JacobianField, MapField};
use crate::frame::{adapted_frames, AdaptedFrame, DEGENERACY_TOL};
use crate::grid::PeriodicGrid;
use crate::linalg::{det, dot, gram, mat_vec, norm2, Mat2, Vec2};
use crate::spectral::Spectral;

/// Induced metric of the graph embedding `x -> (x, f(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedMetric {
    pub g: Mat2,
    pub g_inv: Mat2,
    /// `sqrt(det g) = sqrt((1 + lambda1^2)(1 + lambda2^2))`.
    pub area_element: f64,
}

pub fn induced_metric(j: &Mat2) -> InducedMetric {
    let jj = gram(j);
    let g = [[1.0 + jj[0][0], jj[0][1]], [jj[1][0], 1.0 + jj[1][1]]];
    // 1 + |J|^2 + det(J)^2 avoids cancellation in g00 g11 - g01^2
    let dj = det(j);
    let det_g = 1.0 + norm2(j) + dj * dj;
    let g_inv = [[g[1][1] / det_g, -g[0][1] / det_g], [-g[1][0] / det_g, g[0][0] / det_g]];
    InducedMetric { g, g_inv, area_element: det_g.sqrt() }
}

/// `h[p][i][j] = h_{2+p, i, j}`, the second fundamental form in an adapted frame.
pub type SecondFundamentalForm = [Mat2; 2];

/// `h_{2+p,ij} = <D^2 f(b_i, b_j), pi2(e_{2+p})>` with `b_i = pi1(e_i)`.
///
/// The embedding's Hessian is `(0, D^2 f)`, so only the target part of each
/// normal contributes. Unused normal slots (codimension one) are zero.
pub fn second_fundamental_form(d2f: &[Mat2; 2], frame: &AdaptedFrame) -> SecondFundamentalForm {
    let m = frame.codim.dim();
    let b = [frame.pi1_tangent(0), frame.pi1_tangent(1)];
    // hessian of each target component evaluated on the tangent pairs
    let mut hess = [[[0.0; 2]; 2]; 2];
    for (c, hc) in hess.iter_mut().enumerate().take(m) {
        for i in 0..2 {
            let hb = mat_vec(&d2f[c], b[i]);
            for k in 0..2 {
                hc[i][k] = dot(b[k], hb);
            }
        }
    }
    let mut h = [[[0.0; 2]; 2]; 2];
    for (p, hp) in h.iter_mut().enumerate().take(m) {
        let nu = frame.pi2_normal(p);
        for i in 0..2 {
            for k in 0..2 {
                hp[i][k] = (0..m).map(|c| nu[c] * hess[c][i][k]).sum();
            }
        }
    }
    h
}

/// `(|A|^2, |H|^2, [H_3, H_4])`.
pub fn curvature_norms(h: &SecondFundamentalForm) -> (f64, f64, [f64; 2]) {
    let mut a2 = 0.0;
    let mut mean = [0.0; 2];
    for (p, hp) in h.iter().enumerate() {
        for i in 0..2 {
            for k in 0..2 {
                a2 += hp[i][k] * hp[i][k];
            }
        }
        mean[p] = hp[0][0] + hp[1][1];
    }
    (a2, mean[0] * mean[0] + mean[1] * mean[1], mean)
}

/// Components of `S` in the adapted frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorSValues {
    /// Tangent block `B = diag(S_11, S_22)`, `S_ii = (1 - lambda_i^2)/(1 + lambda_i^2)`.
    pub s_tt: Mat2,
    /// Tangent-normal block `D`, `D_ii = -2 lambda_i/(1 + lambda_i^2)`.
    pub s_tn: Mat2,
    /// Normal block, `-B`.
    pub s_nn: Mat2,
    pub tr_s: f64,
    /// `T_ii = 2 lambda_i/(1 + lambda_i^2)`.
    pub t: [f64; 2],
}

impl TensorSValues {
    pub fn s11(&self) -> f64 {
        self.s_tt[0][0]
    }

    pub fn s22(&self) -> f64 {
        self.s_tt[1][1]
    }

    /// `max_i |S_ii^2 + T_ii^2 - 1|`.
    pub fn pythagoras_residual(&self) -> f64 {
        (0..2)
            .map(|i| (self.s_tt[i][i] * self.s_tt[i][i] + self.t[i] * self.t[i] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `S` restricted to the adapted frames, for singular values `lambda1 >= lambda2 >= 0`.
pub fn tensor_s(l1: f64, l2: f64) -> TensorSValues {
    let s = |l: f64| (1.0 - l * l) / (1.0 + l * l);
    let t = |l: f64| 2.0 * l / (1.0 + l * l);
    let (s1, s2) = (s(l1), s(l2));
    let (t1, t2) = (t(l1), t(l2));
    TensorSValues {
        s_tt: [[s1, 0.0], [0.0, s2]],
        s_tn: [[-t1, 0.0], [0.0, -t2]],
        s_nn: [[-s1, 0.0], [0.0, -s2]],
        tr_s: s1 + s2,
        t: [t1, t2],
    }
}

/// `2 (1 - lambda1^2 lambda2^2) / ((1 + lambda1^2)(1 + lambda2^2))`.
pub fn trace_s_closed_form(l1: f64, l2: f64) -> f64 {
    2.0 * (1.0 - l1 * l1 * l2 * l2) / ((1.0 + l1 * l1) * (1.0 + l2 * l2))
}

/// `Tr S` straight from a Jacobian, without frames.
#[inline]
pub fn trace_s_of_jacobian(j: &Mat2) -> f64 {
    let d = det(j);
    2.0 * (1.0 - d * d) / (1.0 + norm2(j) + d * d)
}

/// Geometry at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    pub metric: InducedMetric,
    pub frame: AdaptedFrame,
    pub h: SecondFundamentalForm,
    pub mean_curvature: [f64; 2],
    pub norm_a2: f64,
    pub norm_h2: f64,
    /// `sqrt(1 + |Df|^2)`; codimension one only.
    pub v: Option<f64>,
}

impl PointGeometry {
    pub fn compute(df: &Mat2, d2f: &[Mat2; 2], codim: Codim) -> Self {
        let frame = adapted_frames(df, DEGENERACY_TOL, codim);
        Self::with_frame(df, d2f, frame)
    }

    pub fn with_frame(df: &Mat2, d2f: &[Mat2; 2], frame: AdaptedFrame) -> Self {
        let metric = induced_metric(df);
        let h = second_fundamental_form(d2f, &frame);
        let (norm_a2, norm_h2, mean_curvature) = curvature_norms(&h);
        let v = (frame.codim == Codim::One).then(|| (1.0 + norm2(df)).sqrt());
        Self { metric, frame, h, mean_curvature, norm_a2, norm_h2, v }
    }

    pub fn tensor_s(&self) -> TensorSValues {
        tensor_s(self.frame.lambda[0], self.frame.lambda[1])
    }
}

/// Geometry of a whole map at one time.
#[derive(Debug, Clone)]
pub struct GeometrySnapshot {
    pub grid: PeriodicGrid,
    pub codim: Codim,
    pub points: Vec<PointGeometry>,
}

/// Location and value of a grid extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub point: (usize, usize),
}

impl GeometrySnapshot {
    pub fn compute(sp: &Spectral, field: &MapField) -> Result<Self> {
        let jac = jacobian(sp, field)?;
        Ok(Self::from_jacobian(*field.grid(), &jac))
    }

    pub fn from_jacobian(grid: PeriodicGrid, jac: &JacobianField) -> Self {
        let points = jac
            .df
            .iter()
            .zip(&jac.d2f)
            .map(|(df, d2f)| PointGeometry::compute(df, d2f, jac.codim))
            .collect();
        Self { grid, codim: jac.codim, points }
    }

    pub fn tensor_s(&self) -> Vec<TensorSValues> {
        self.points.iter().map(PointGeometry::tensor_s).collect()
    }

    pub fn field(&self, f: impl Fn(&PointGeometry) -> f64) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }

    pub fn trace_s(&self) -> Vec<f64> {
        self.field(|p| p.tensor_s().tr_s)
    }

    fn extremum(&self, f: impl Fn(&PointGeometry) -> f64, max: bool) -> Extremum {
        let mut best = Extremum { value: if max { f64::NEG_INFINITY } else { f64::INFINITY }, point: (0, 0) };
        for (idx, p) in self.points.iter().enumerate() {
            let v = f(p);
            if (max && v > best.value) || (!max && v < best.value) {
                best = Extremum { value: v, point: self.grid.point(idx) };
            }
        }
        best
    }

    pub fn sup(&self, f: impl Fn(&PointGeometry) -> f64) -> Extremum {
        self.extremum(f, true)
    }

    pub fn inf(&self, f: impl Fn(&PointGeometry) -> f64) -> Extremum {
        self.extremum(f, false)
    }

    pub fn sup_h2(&self) -> f64 {
        self.sup(|p| p.norm_h2).value
    }

    pub fn sup_a2(&self) -> f64 {
        self.sup(|p| p.norm_a2).value
    }

    pub fn inf_trace_s(&self) -> Extremum {
        self.inf(|p| p.tensor_s().tr_s)
    }

    pub fn sup_v(&self) -> Option<f64> {
        (self.codim == Codim::One).then(|| self.sup(|p| p.v.unwrap_or(1.0)).value)
    }

    pub fn degenerate_count(&self) -> usize {
        self.points.iter().filter(|p| p.frame.degenerate).count()
    }

    /// Grid quadrature of `w` against the area element.
    pub fn integrate(&self, w: impl Fn(&PointGeometry) -> f64) -> f64 {
        self.grid.cell_area() * self.points.iter().map(|p| w(p) * p.metric.area_element).sum::<f64>()
    }

    pub fn metric_inverse(&self) -> Vec<Mat2> {
        self.points.iter().map(|p| p.metric.g_inv).collect()
    }

    pub fn area_elements(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.metric.area_element).collect()
    }
}

/// `|grad w|^2 = g^{ij} d_i w d_j w` from precomputed coordinate derivatives.
pub fn surface_gradient_norm(g_inv: &[Mat2], dw: &[Vec<f64>; 2]) -> Vec<f64> {
    g_inv
        .iter()
        .enumerate()
        .map(|(p, gi)| {
            let d: Vec2 = [dw[0][p], dw[1][p]];
            dot(d, mat_vec(gi, d))
        })
        .collect()
}

/// Laplace-Beltrami operator `(1/sqrt g) d_i (sqrt g g^{ij} d_j w)`, all derivatives spectral.
pub fn laplace_beltrami(sp: &Spectral, w: &[f64], g_inv: &[Mat2], area: &[f64]) -> Vec<f64> {
    let [d1, d2] = sp.gradient(w);
    let n = w.len();
    let mut f1 = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    for p in 0..n {
        let flux = mat_vec(&g_inv[p], [d1[p], d2[p]]);
        f1.push(area[p] * flux[0]);
        f2.push(area[p] * flux[1]);
    }
    sp.divergence(&f1, &f2).iter().zip(area).map(|(d, a)| d / a).collect()
}
