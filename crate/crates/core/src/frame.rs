//! Orthonormal frames of a graph adapted to the singular value decomposition of `df`.
//!
//! With `df(a_i) = lambda_i a_{2+i}` the tangent and normal frames are
//!
//! ```text
//! e_i     = (a_i + lambda_i a_{2+i}) / sqrt(1 + lambda_i^2)
//! e_{2+p} = (a_{2+p} - lambda_p a_p) / sqrt(1 + lambda_p^2)
//! ```
//!
//! written as vectors of `R^2 + R^m` (base components first).

use crate::field::Codim;
use crate::linalg::{canonical_sign, det, dot, gram, mat_vec, rot90, singular_values, Mat2, Vec2};

/// Points with `lambda1 - lambda2` below this are flagged frame-degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Singular values below this count as rank deficiency.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptedFrame {
    pub codim: Codim,
    /// Nonnegative, ordered `lambda[0] >= lambda[1]`; codimension one stores `(lambda1, 0)`.
    pub lambda: [f64; 2],
    /// Signed values paired with the frame, `df(a_i) = signed[i] * a_{2+i}`.
    /// Equal to `lambda` for singular value frames; Lagrangian frames carry
    /// the signed eigenvalues of the self-adjoint map.
    pub signed: [f64; 2],
    pub rank: usize,
    pub degenerate: bool,
    pub a_tangent: [Vec2; 2],
    pub a_normal: [Vec2; 2],
    /// Tangent frame as `R^4` vectors (last entry unused for codimension one).
    pub e_tangent: [[f64; 4]; 2],
    pub e_normal: [[f64; 4]; 2],
}

impl AdaptedFrame {
    /// Builds `e_i`, `e_{2+p}` from bases satisfying `df(a_i) = signed[i] a_{2+i}`.
    pub fn from_bases(codim: Codim, signed: [f64; 2], a_tangent: [Vec2; 2], a_normal: [Vec2; 2], tol_degenerate: f64) -> Self {
        let lambda = [signed[0].abs(), signed[1].abs()];
        let rank = lambda.iter().filter(|&&l| l >= RANK_TOL).count();
        let mut e_tangent = [[0.0; 4]; 2];
        let mut e_normal = [[0.0; 4]; 2];
        for i in 0..2 {
            let s = signed[i];
            let w = 1.0 / (1.0 + s * s).sqrt();
            let (a, b) = (a_tangent[i], a_normal[i]);
            e_tangent[i] = [w * a[0], w * a[1], w * s * b[0], w * s * b[1]];
            e_normal[i] = [-w * s * a[0], -w * s * a[1], w * b[0], w * b[1]];
        }
        if codim == Codim::One {
            // the target is R: only the first normal exists
            e_normal[1] = [0.0; 4];
        }
        Self {
            codim,
            lambda,
            signed,
            rank,
            degenerate: (lambda[0] - lambda[1]).abs() < tol_degenerate,
            a_tangent,
            a_normal,
            e_tangent,
            e_normal,
        }
    }

    /// Ambient dimension `2 + m`.
    pub fn ambient_dim(&self) -> usize {
        2 + self.codim.dim()
    }

    pub fn tangent(&self, i: usize) -> &[f64] {
        &self.e_tangent[i][..self.ambient_dim()]
    }

    pub fn normal(&self, p: usize) -> &[f64] {
        assert!(p < self.codim.dim(), "normal index {p} out of range");
        &self.e_normal[p][..self.ambient_dim()]
    }

    /// Base projection `pi1(e_i)`.
    pub fn pi1_tangent(&self, i: usize) -> Vec2 {
        [self.e_tangent[i][0], self.e_tangent[i][1]]
    }

    /// Target projection `pi2(e_i)`.
    pub fn pi2_tangent(&self, i: usize) -> Vec2 {
        [self.e_tangent[i][2], self.e_tangent[i][3]]
    }

    pub fn pi1_normal(&self, p: usize) -> Vec2 {
        [self.e_normal[p][0], self.e_normal[p][1]]
    }

    pub fn pi2_normal(&self, p: usize) -> Vec2 {
        [self.e_normal[p][2], self.e_normal[p][3]]
    }

    /// All frame vectors, tangent first.
    pub fn vectors(&self) -> Vec<&[f64]> {
        let mut out = vec![self.tangent(0), self.tangent(1)];
        for p in 0..self.codim.dim() {
            out.push(self.normal(p));
        }
        out
    }

    /// `max |<e_a, e_b> - delta_ab|` over the whole frame.
    pub fn orthonormality_residual(&self) -> f64 {
        let v = self.vectors();
        let mut worst: f64 = 0.0;
        for (a, x) in v.iter().enumerate() {
            for (b, y) in v.iter().enumerate() {
                let g: f64 = x.iter().zip(y.iter()).map(|(p, q)| p * q).sum();
                worst = worst.max((g - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// `max_i |df(a_i) - signed_i a_{2+i}|`.
    pub fn svd_residual(&self, j: &Mat2) -> f64 {
        (0..2)
            .map(|i| {
                let lhs = mat_vec(j, self.a_tangent[i]);
                let rhs = [self.signed[i] * self.a_normal[i][0], self.signed[i] * self.a_normal[i][1]];
                let rhs = if self.codim == Codim::One { [rhs[0], 0.0] } else { rhs };
                (lhs[0] - rhs[0]).hypot(lhs[1] - rhs[1])
            })
            .fold(0.0, f64::max)
    }
}

/// Singular value frames of a Jacobian (rows are target components).
///
/// `a_1` is the top right-singular vector, `a_2 = rot90(a_1)`, each with its
/// first nonzero component made positive. Normal directions are
/// `a_{2+i} = J a_i / lambda_i` for the top direction; the second one is
/// completed as an oriented perpendicular, which is exact for rank two and
/// stable when `lambda2` is tiny. Rank-deficient directions fall back to the
/// standard basis of the target.
pub fn adapted_frames(j: &Mat2, tol_degenerate: f64, codim: Codim) -> AdaptedFrame {
    let (l1, l2) = singular_values(j);
    let g = gram(j);
    let theta = 0.5 * (2.0 * g[0][1]).atan2(g[0][0] - g[1][1]);
    let a1 = canonical_sign([theta.cos(), theta.sin()]);
    let a2 = canonical_sign(rot90(a1));

    let a3 = match codim {
        Codim::One => [1.0, 0.0],
        Codim::Two if l1 >= RANK_TOL => {
            let v = mat_vec(j, a1);
            [v[0] / l1, v[1] / l1]
        }
        Codim::Two => [1.0, 0.0],
    };
    let a4 = match codim {
        Codim::One => [0.0, 1.0],
        Codim::Two => {
            // J a2 = lambda2 a4 and det J = lambda1 lambda2 det[a3 a4] / det[a1 a2]
            let orient = det(&[[a1[0], a2[0]], [a1[1], a2[1]]]);
            let dj = det(j);
            let sign = if dj < 0.0 { -orient } else { orient };
            let r = rot90(a3);
            let s = if l2 >= RANK_TOL { sign.signum() } else { 1.0 };
            let v = [s * r[0], s * r[1]];
            if l2 >= RANK_TOL {
                v
            } else {
                // free completion; keep it continuous with the rank-two branch
                let guess = mat_vec(j, a2);
                if dot(guess, v) < 0.0 {
                    [-v[0], -v[1]]
                } else {
                    v
                }
            }
        }
    };
    AdaptedFrame::from_bases(codim, [l1, l2], [a1, a2], [a3, a4], tol_degenerate)
}
