//! Closed-form 2x2 linear algebra used at every grid point.

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[inline]
pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[inline]
pub fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// Counter-clockwise rotation by a right angle.
#[inline]
pub fn rot90(v: Vec2) -> Vec2 {
    [-v[1], v[0]]
}

/// Frobenius norm squared.
#[inline]
pub fn norm2(m: &Mat2) -> f64 {
    m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]
}

/// `J^T J` for a Jacobian whose rows are target components.
#[inline]
pub fn gram(j: &Mat2) -> Mat2 {
    let p = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let q = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let s = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    [[p, q], [q, s]]
}

/// Flips `v` so that its first nonzero component is positive.
#[inline]
pub fn canonical_sign(v: Vec2) -> Vec2 {
    let lead = if v[0] != 0.0 { v[0] } else { v[1] };
    if lead < 0.0 {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// Eigen-decomposition of a symmetric 2x2 matrix.
///
/// Returns eigenvalues `(mu1, mu2)` with `mu1 >= mu2` and the unit
/// eigenvector of `mu1`; the second eigenvector is its `rot90`.
pub fn sym_eigen(m: &Mat2) -> (f64, f64, Vec2) {
    let (p, q, s) = (m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
    let mean = 0.5 * (p + s);
    let radius = (0.5 * (p - s)).hypot(q);
    let theta = 0.5 * (2.0 * q).atan2(p - s);
    (mean + radius, mean - radius, [theta.cos(), theta.sin()])
}

/// Singular values `(lambda1, lambda2)`, `lambda1 >= lambda2 >= 0`, of a Jacobian.
///
/// `lambda1^2` is the large eigenvalue of `J^T J`; `lambda2` is recovered as
/// `|det J| / lambda1`, which avoids the cancellation in `mean - radius`.
/// A codimension-one Jacobian is stored with a zero second row, giving
/// `lambda2 = 0`.
pub fn singular_values(j: &Mat2) -> (f64, f64) {
    let g = gram(j);
    let mean = 0.5 * (g[0][0] + g[1][1]);
    let radius = (0.5 * (g[0][0] - g[1][1])).hypot(g[0][1]);
    let l1 = (mean + radius).sqrt();
    let l2 = if l1 > 0.0 { (det(j).abs() / l1).min(l1) } else { 0.0 };
    (l1, l2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_diagonal_and_zero() {
        assert_eq!(singular_values(&[[0.5, 0.0], [0.0, 0.3]]), (0.5, 0.3));
        assert_eq!(singular_values(&[[0.0, 0.0], [0.0, 0.0]]), (0.0, 0.0));
        let (l1, l2) = singular_values(&[[0.0, -2.0], [3.0, 0.0]]);
        assert!((l1 - 3.0).abs() < 1e-15 && (l2 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn codim_one_row_vector() {
        let (l1, l2) = singular_values(&[[3.0, 4.0], [0.0, 0.0]]);
        assert!((l1 - 5.0).abs() < 1e-15);
        assert_eq!(l2, 0.0);
    }

    #[test]
    fn sym_eigen_reconstructs() {
        let m = [[2.0, -0.7], [-0.7, 0.5]];
        let (a, b, v) = sym_eigen(&m);
        let w = rot90(v);
        let mv = mat_vec(&m, v);
        let mw = mat_vec(&m, w);
        assert!((mv[0] - a * v[0]).abs() < 1e-14 && (mv[1] - a * v[1]).abs() < 1e-14);
        assert!((mw[0] - b * w[0]).abs() < 1e-14 && (mw[1] - b * w[1]).abs() < 1e-14);
    }

    #[test]
    fn canonical_sign_rule() {
        assert_eq!(canonical_sign([-1.0, 2.0]), [1.0, -2.0]);
        assert_eq!(canonical_sign([0.0, -2.0]), [0.0, 2.0]);
        assert_eq!(canonical_sign([0.5, -2.0]), [0.5, -2.0]);
    }
}
