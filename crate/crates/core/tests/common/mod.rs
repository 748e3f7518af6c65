//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use gmcf::field::Codim;
use gmcf::linalg::Mat2;
use rand::Rng;

/// Frame-invariant quantities at one point of a graph.
#[derive(Debug, Clone, Copy)]
pub struct OracleValues {
    pub norm_a2: f64,
    pub norm_h2: f64,
    pub trace_s: f64,
}

fn dotn(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds an orthonormal tangent frame by Gram-Schmidt on the coordinate
/// vectors `(e_k, df e_k)`, completes it with Gram-Schmidt on the ambient
/// standard basis, and projects the embedding Hessian `(0, D^2 f)`.
pub fn gram_schmidt_oracle(df: &Mat2, d2f: &[Mat2; 2], codim: Codim) -> OracleValues {
    let m = codim.dim();
    let n = 2 + m;
    let coord: Vec<Vec<f64>> = (0..2)
        .map(|k| {
            let mut x = vec![0.0; n];
            x[k] = 1.0;
            for c in 0..m {
                x[2 + c] = df[c][k];
            }
            x
        })
        .collect();

    // tangent vectors u_a = sum_k coef[a][k] X_k
    let n0 = dotn(&coord[0], &coord[0]).sqrt();
    let u0: Vec<f64> = coord[0].iter().map(|x| x / n0).collect();
    let p = dotn(&coord[1], &u0);
    let w: Vec<f64> = coord[1].iter().zip(&u0).map(|(x, u)| x - p * u).collect();
    let nw = dotn(&w, &w).sqrt();
    let u1: Vec<f64> = w.iter().map(|x| x / nw).collect();
    let coef = [[1.0 / n0, 0.0], [-p / (n0 * nw), 1.0 / nw]];
    let tangent = [u0, u1];

    let mut basis: Vec<Vec<f64>> = tangent.to_vec();
    let mut normals = Vec::new();
    while normals.len() < m {
        // pick the standard vector with the largest remaining component
        let mut best: Option<Vec<f64>> = None;
        let mut best_norm = 0.0;
        for s in 0..n {
            let mut v = vec![0.0; n];
            v[s] = 1.0;
            for b in &basis {
                let c = dotn(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let nv = dotn(&v, &v).sqrt();
            if nv > best_norm {
                best_norm = nv;
                best = Some(v.iter().map(|x| x / nv).collect());
            }
        }
        let v = best.expect("ambient space has room for a normal");
        basis.push(v.clone());
        normals.push(v);
    }

    // h_{p,ab} = <(0, D^2 f(b_a, b_b)), nu_p> with b_a = sum_k coef[a][k] e_k
    let mut h = vec![[[0.0; 2]; 2]; m];
    for (pi, nu) in normals.iter().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        let y: f64 = (0..m).map(|c| d2f[c][k][l] * nu[2 + c]).sum();
                        s += coef[a][k] * coef[b][l] * y;
                    }
                }
                h[pi][a][b] = s;
            }
        }
    }
    let norm_a2 = h.iter().flat_map(|hp| hp.iter().flatten()).map(|x| x * x).sum();
    let norm_h2 = h.iter().map(|hp| (hp[0][0] + hp[1][1]).powi(2)).sum();
    let trace_s = tangent
        .iter()
        .map(|u| u[0] * u[0] + u[1] * u[1] - u[2..].iter().map(|x| x * x).sum::<f64>())
        .sum();
    OracleValues { norm_a2, norm_h2, trace_s }
}

pub fn random_symmetric(rng: &mut impl Rng, scale: f64) -> Mat2 {
    let a = rng.gen_range(-scale..scale);
    let b = rng.gen_range(-scale..scale);
    let c = rng.gen_range(-scale..scale);
    [[a, b], [b, c]]
}

/// Random first and second derivatives of a map at one point. About one
/// draw in eight is a scaled rotation, where `lambda1 = lambda2`.
pub fn random_point(rng: &mut impl Rng, codim: Codim) -> (Mat2, [Mat2; 2]) {
    let mut df: Mat2 = [[0.0; 2]; 2];
    if codim == Codim::Two && rng.gen_range(0..8) == 0 {
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let s = rng.gen_range(0.0..2.0);
        let flip = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        df = [[s * th.cos(), -s * th.sin() * flip], [s * th.sin(), s * th.cos() * flip]];
    } else {
        for c in 0..codim.dim() {
            df[c] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        }
    }
    let mut d2f = [[[0.0; 2]; 2]; 2];
    for c in 0..codim.dim() {
        d2f[c] = random_symmetric(rng, 3.0);
    }
    (df, d2f)
}

/// 8th-order central difference along axis 0 (`i`) or 1 (`j`) of a periodic grid field.
pub fn fd8(u: &[f64], n1: usize, n2: usize, h: f64, axis: usize) -> Vec<f64> {
    const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    central(u, n1, n2, h, axis, &C)
}

/// 4th-order central difference.
pub fn fd4(u: &[f64], n1: usize, n2: usize, h: f64, axis: usize) -> Vec<f64> {
    const C: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];
    central(u, n1, n2, h, axis, &C)
}

fn central(u: &[f64], n1: usize, n2: usize, h: f64, axis: usize, c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n1 * n2];
    for j in 0..n2 {
        for i in 0..n1 {
            let at = |s: isize| {
                let (ii, jj) = if axis == 0 {
                    ((i as isize + s).rem_euclid(n1 as isize) as usize, j)
                } else {
                    (i, (j as isize + s).rem_euclid(n2 as isize) as usize)
                };
                u[ii + n1 * jj]
            };
            out[i + n1 * j] = c.iter().enumerate().map(|(k, ck)| ck * (at(k as isize + 1) - at(-(k as isize) - 1))).sum::<f64>() / h;
        }
    }
    out
}
