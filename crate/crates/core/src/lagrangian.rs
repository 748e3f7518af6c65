//! Lagrangian graphs for `dx1 ^ dy1 + dx2 ^ dy2`: potential-generated maps,
//! frames with `a_{2+i} = J a_i`, and the symmetries of `h` they imply.
//!
//! A graph is Lagrangian iff `Df` is symmetric. Here `J(v, w) = (-w, v)` on
//! `R^2 x R^2`, which is an isometry of the product only on square tori.

use crate::error::{Error, Result};
use crate::field::{jacobian, Codim, MapField};
use crate::frame::{AdaptedFrame, DEGENERACY_TOL};
use crate::geometry::{GeometrySnapshot, PointGeometry, SecondFundamentalForm};
use crate::grid::PeriodicGrid;
use crate::linalg::{canonical_sign, rot90, sym_eigen, Mat2};
use crate::spectral::Spectral;

/// `f = grad(x^T Q x / 2 + phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianData {
    pub q: Mat2,
    pub phi: Vec<f64>,
}

impl LagrangianData {
    pub fn new(q: Mat2, phi: Vec<f64>) -> Result<Self> {
        let asym = (q[0][1] - q[1][0]).abs();
        if asym > 1e-14 * (1.0 + q[0][1].abs().max(q[1][0].abs())) {
            return Err(Error::InvalidInput(format!("quadratic part must be symmetric, |Q12 - Q21| = {asym:e}")));
        }
        Ok(Self { q, phi })
    }

    pub fn to_field(&self, sp: &Spectral) -> Result<MapField> {
        from_potential(sp, self.q, &self.phi)
    }
}

/// Map with affine part `Q` and perturbation `grad phi`.
pub fn from_potential(sp: &Spectral, q: Mat2, phi: &[f64]) -> Result<MapField> {
    let grid = *sp.grid();
    if phi.len() != grid.len() {
        return Err(Error::InvalidInput(format!("potential has {} values, grid has {}", phi.len(), grid.len())));
    }
    if let Some(p) = phi.iter().position(|v| !v.is_finite()) {
        let (i, j) = grid.point(p);
        return Err(Error::InvalidField { component: 0, i, j });
    }
    let data = LagrangianData::new(q, Vec::new())?;
    let [g1, g2] = sp.gradient(phi);
    MapField::new(grid, Codim::Two, data.q, [0.0; 2], vec![g1, g2])
}

/// `sup |d1 f^2 - d2 f^1|`.
pub fn lagrangian_residual(sp: &Spectral, field: &MapField) -> Result<f64> {
    if field.codim() != Codim::Two {
        return Err(Error::InvalidInput("the Lagrangian condition needs codimension two".into()));
    }
    let jac = jacobian(sp, field)?;
    Ok(jac.df.iter().map(|j| (j[1][0] - j[0][1]).abs()).fold(0.0, f64::max))
}

/// `J(v, w) = (-w, v)` on `R^2 x R^2`.
pub fn complex_structure(e: &[f64; 4]) -> [f64; 4] {
    [-e[2], -e[3], e[0], e[1]]
}

/// Frames from the eigen-decomposition of the self-adjoint `Df`.
///
/// The eigenvalues are ordered by decreasing modulus and carried with their
/// sign in `AdaptedFrame::signed`; `a_{2+i} = a_i` as target vectors, so
/// `e_{2+i} = J e_i`.
pub fn lagrangian_frames(j: &Mat2, id_tol: f64) -> Result<AdaptedFrame> {
    let residual = (j[1][0] - j[0][1]).abs();
    if residual > id_tol {
        return Err(Error::NotLagrangian { residual, tol: id_tol });
    }
    let (mu1, mu2, v1) = sym_eigen(j);
    let v2 = rot90(v1);
    let ((s1, a1), (s2, a2)) = if mu2.abs() > mu1.abs() { ((mu2, v2), (mu1, v1)) } else { ((mu1, v1), (mu2, v2)) };
    let a1 = canonical_sign(a1);
    let a2 = canonical_sign(a2);
    Ok(AdaptedFrame::from_bases(Codim::Two, [s1, s2], [a1, a2], [a1, a2], DEGENERACY_TOL))
}

/// `max_i |J e_i - e_{2+i}|`.
pub fn frame_identity_residual(frame: &AdaptedFrame) -> f64 {
    (0..2)
        .map(|i| {
            let je = complex_structure(&frame.e_tangent[i]);
            je.iter().zip(&frame.e_normal[i]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Geometry of a Lagrangian map evaluated in `J`-adapted frames.
pub fn lagrangian_snapshot(sp: &Spectral, field: &MapField, id_tol: f64) -> Result<GeometrySnapshot> {
    if field.codim() != Codim::Two {
        return Err(Error::InvalidInput("the Lagrangian condition needs codimension two".into()));
    }
    let jac = jacobian(sp, field)?;
    let mut points = Vec::with_capacity(jac.len());
    for (df, d2f) in jac.df.iter().zip(&jac.d2f) {
        let frame = lagrangian_frames(df, id_tol)?;
        points.push(PointGeometry::with_frame(df, d2f, frame));
    }
    Ok(GeometrySnapshot { grid: *field.grid(), codim: Codim::Two, points })
}

/// `max_c |h_{3c2} - h_{4c1}|`.
pub fn h_symmetry_residual(h: &SecondFundamentalForm) -> f64 {
    (0..2).map(|c| (h[0][c][1] - h[1][c][0]).abs()).fold(0.0, f64::max)
}

/// Largest deviation of `h_{(2+i)jk}` from total symmetry in `(i, j, k)`.
pub fn cubic_symmetry_residual(h: &SecondFundamentalForm) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let v = h[i][j][k];
                for w in [h[i][k][j], h[j][i][k], h[j][k][i], h[k][i][j], h[k][j][i]] {
                    worst = worst.max((v - w).abs());
                }
            }
        }
    }
    worst
}

/// `|sum_c (h_{3c1}^2 - h_{4c2}^2)|`, the quantity bounded by `2 sqrt 2 |A||H|`.
pub fn mixed_square_difference(h: &SecondFundamentalForm) -> f64 {
    (0..2).map(|c| h[0][c][0] * h[0][c][0] - h[1][c][1] * h[1][c][1]).sum::<f64>().abs()
}

/// Requires a square torus, where `J` is an isometry.
pub fn require_square(grid: &PeriodicGrid) -> Result<()> {
    if grid.is_square() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "Lagrangian data need a square torus, got {} x {}",
            grid.l1(),
            grid.l2()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize) -> (PeriodicGrid, Spectral) {
        let g = PeriodicGrid::square_2pi(n).unwrap();
        (g, Spectral::new(g))
    }

    #[test]
    fn constant_and_quadratic_potentials() {
        let (g, sp) = setup(16);
        let f = from_potential(&sp, [[0.0; 2]; 2], &vec![0.0; g.len()]).unwrap();
        assert_eq!(f.sup_perturbation(), 0.0);
        let f = from_potential(&sp, [[0.5, 0.0], [0.0, -0.3]], &vec![0.0; g.len()]).unwrap();
        let jac = jacobian(&sp, &f).unwrap();
        let frame = lagrangian_frames(&jac.df[0], 1e-12).unwrap();
        assert!((frame.signed[0] - 0.5).abs() < 1e-15 && (frame.signed[1] + 0.3).abs() < 1e-15);
        assert!((frame.lambda[1] - 0.3).abs() < 1e-15);
        assert_eq!(frame.a_tangent, [[1.0, 0.0], [0.0, 1.0]]);
        assert!(frame_identity_residual(&frame) < 1e-15);
    }

    #[test]
    fn non_symmetric_q_is_rejected() {
        let (g, sp) = setup(16);
        let err = from_potential(&sp, [[0.0, 0.5], [0.0, 0.0]], &vec![0.0; g.len()]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn potential_field_is_symmetric() {
        let (g, sp) = setup(32);
        let phi = g.sample(|x, y| 0.2 * (x + y).cos() + 0.05 * (2.0 * x - y).sin());
        let f = from_potential(&sp, [[0.3, 0.1], [0.1, -0.2]], &phi).unwrap();
        assert!(lagrangian_residual(&sp, &f).unwrap() < 1e-13);
        let snap = lagrangian_snapshot(&sp, &f, 1e-12).unwrap();
        for p in &snap.points {
            assert!(frame_identity_residual(&p.frame) < 1e-12);
            assert!(p.frame.orthonormality_residual() < 1e-12);
            assert!(h_symmetry_residual(&p.h) < 1e-12);
            assert!(cubic_symmetry_residual(&p.h) < 1e-12);
            let bound = 2.0 * 2f64.sqrt() * (p.norm_a2 * p.norm_h2).sqrt();
            assert!(mixed_square_difference(&p.h) <= bound + 1e-14);
        }
    }

    #[test]
    fn shear_is_not_lagrangian() {
        let (g, sp) = setup(16);
        let f = MapField::affine(g, Codim::Two, [[0.0, 0.0], [0.5, 0.0]], [0.0; 2]).unwrap();
        assert_eq!(lagrangian_residual(&sp, &f).unwrap(), 0.5);
        let err = lagrangian_frames(&[[0.0, 0.0], [0.5, 0.0]], 1e-8).unwrap_err();
        assert!(matches!(err, Error::NotLagrangian { .. }));
        assert!(lagrangian_snapshot(&sp, &f, 1e-8).is_err());
    }

    #[test]
    fn symmetry_checks_detect_violations() {
        let zero = [[[0.0; 2]; 2]; 2];
        assert_eq!(h_symmetry_residual(&zero), 0.0);
        let mut h = zero;
        h[0][0][1] = 0.3;
        h[0][1][0] = 0.3;
        assert!((h_symmetry_residual(&h) - 0.3).abs() < 1e-15);
        assert!(cubic_symmetry_residual(&h) > 0.29);
    }

    #[test]
    fn square_torus_requirement() {
        assert!(require_square(&PeriodicGrid::square_2pi(8).unwrap()).is_ok());
        assert!(require_square(&PeriodicGrid::new(8, 8, 1.0, 2.0).unwrap()).is_err());
    }
}
