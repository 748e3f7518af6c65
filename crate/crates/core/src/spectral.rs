//! Fourier-spectral differentiation on a periodic grid.
//!
//! Odd-order multipliers drop the Nyquist mode so that derivatives of real
//! data stay real. Two real fields are routinely packed into one complex
//! transform (`u + i w`); every multiplier used here is Hermitian, so the
//! real and imaginary parts of the inverse transform separate exactly.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::PeriodicGrid;

thread_local! {
    // FFT scratch and the transposed column buffer, reused across transforms
    static WORK: RefCell<(Vec<Complex64>, Vec<Complex64>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

/// Spectral derivative operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    D1,
    D2,
    D11,
    D12,
    D22,
}

/// All first and second derivatives of a scalar field.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d11: Vec<f64>,
    pub d12: Vec<f64>,
    pub d22: Vec<f64>,
}

pub struct Spectral {
    grid: PeriodicGrid,
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
    // symbol tables indexed by `Deriv as usize`; odd-order symbols have the
    // Nyquist wavenumber zeroed
    symbols: [Vec<Complex64>; 5],
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

fn wavenumbers(n: usize, l: f64) -> (Vec<f64>, Vec<f64>) {
    let scale = std::f64::consts::TAU / l;
    let full: Vec<f64> = (0..n)
        .map(|i| {
            let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            k * scale
        })
        .collect();
    let mut odd = full.clone();
    odd[n / 2] = 0.0;
    (full, odd)
}

impl Spectral {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let (k1, k1_odd) = wavenumbers(grid.n1(), grid.l1());
        let (k2, k2_odd) = wavenumbers(grid.n2(), grid.l2());
        let table = |op: Deriv| {
            let mut t = Vec::with_capacity(grid.len());
            for j in 0..grid.n2() {
                for i in 0..grid.n1() {
                    t.push(symbol(&k1, &k2, &k1_odd, &k2_odd, i, j, op));
                }
            }
            t
        };
        let symbols = [table(Deriv::D1), table(Deriv::D2), table(Deriv::D11), table(Deriv::D12), table(Deriv::D22)];
        Self {
            grid,
            fwd1: planner.plan_fft_forward(grid.n1()),
            inv1: planner.plan_fft_inverse(grid.n1()),
            fwd2: planner.plan_fft_forward(grid.n2()),
            inv2: planner.plan_fft_inverse(grid.n2()),
            symbols,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let (row, col) = if inverse { (&self.inv1, &self.inv2) } else { (&self.fwd1, &self.fwd2) };
        let zero = Complex64::new(0.0, 0.0);
        let scratch_len = row.get_inplace_scratch_len().max(col.get_inplace_scratch_len());
        WORK.with(|work| {
            let (scratch, cols) = &mut *work.borrow_mut();
            scratch.resize(scratch_len, zero);
            cols.resize(n1 * n2, zero);
            // all rows in one batch, then all columns through a transposed copy
            row.process_with_scratch(data, scratch);
            transpose(data, cols, n1, n2);
            col.process_with_scratch(cols, scratch);
            transpose(cols, data, n2, n1);
        });
    }

    /// Forward transform of a real field (unnormalized).
    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    #[inline]
    fn mirror(&self, idx: usize) -> usize {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let (i, j) = (idx % n1, idx / n1);
        (n1 - i) % n1 + n1 * ((n2 - j) % n2)
    }

    /// Forward transforms of two real fields using a single complex transform.
    pub fn forward_pair(&self, u: &[f64], w: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let z = self.forward_packed(u, w);
        let mut uh = vec![Complex64::new(0.0, 0.0); z.len()];
        let mut wh = vec![Complex64::new(0.0, 0.0); z.len()];
        for idx in 0..z.len() {
            let zc = z[self.mirror(idx)].conj();
            uh[idx] = (z[idx] + zc) * 0.5;
            // (z - conj(z(-k))) / 2i
            let d = z[idx] - zc;
            wh[idx] = Complex64::new(d.im * 0.5, -d.re * 0.5);
        }
        (uh, wh)
    }

    /// Transform of `u + i w`.
    fn forward_packed(&self, u: &[f64], w: &[f64]) -> Vec<Complex64> {
        let mut z: Vec<Complex64> = u.iter().zip(w).map(|(&a, &b)| Complex64::new(a, b)).collect();
        self.transform(&mut z, false);
        z
    }

    /// Normalized inverse transform split into real and imaginary parts.
    fn inverse_split(&self, mut z: Vec<Complex64>) -> (Vec<f64>, Vec<f64>) {
        let norm = 1.0 / self.grid.len() as f64;
        self.transform(&mut z, true);
        let re = z.iter().map(|c| c.re * norm).collect();
        let im = z.iter().map(|c| c.im * norm).collect();
        (re, im)
    }

    fn inverse(&self, a: &[Complex64]) -> Vec<f64> {
        let norm = 1.0 / self.grid.len() as f64;
        let mut z = a.to_vec();
        self.transform(&mut z, true);
        z.iter().map(|c| c.re * norm).collect()
    }

    /// `spec * (symbol(a) + i symbol(b))`. For the spectrum of a real field
    /// the inverse transform is `a(u) + i b(u)`, since both operators are real.
    fn multiplied(&self, spec: &[Complex64], a: Deriv, b: Option<Deriv>) -> Vec<Complex64> {
        let ta = &self.symbols[a as usize];
        match b {
            None => spec.iter().zip(ta).map(|(c, m)| c * m).collect(),
            Some(b) => {
                let tb = &self.symbols[b as usize];
                spec.iter()
                    .zip(ta.iter().zip(tb))
                    .map(|(c, (ma, mb))| c * (ma + Complex64::new(-mb.im, mb.re)))
                    .collect()
            }
        }
    }

    /// Multiplies a spectrum by the symbol of `op`.
    pub fn apply(&self, spec: &[Complex64], op: Deriv) -> Vec<Complex64> {
        self.multiplied(spec, op, None)
    }

    pub fn derivative(&self, u: &[f64], op: Deriv) -> Vec<f64> {
        self.inverse(&self.apply(&self.forward(u), op))
    }

    /// `(d1 u, d2 u)`.
    pub fn gradient(&self, u: &[f64]) -> [Vec<f64>; 2] {
        let s = self.forward(u);
        let (d1, d2) = self.inverse_split(self.multiplied(&s, Deriv::D1, Some(Deriv::D2)));
        [d1, d2]
    }

    /// `d1 f1 + d2 f2`.
    pub fn divergence(&self, f1: &[f64], f2: &[f64]) -> Vec<f64> {
        let (s1, s2) = self.forward_pair(f1, f2);
        let a = self.apply(&s1, Deriv::D1);
        let b = self.apply(&s2, Deriv::D2);
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        self.inverse(&sum)
    }

    /// First and second derivatives of one field (four transforms).
    pub fn derivatives(&self, u: &[f64]) -> Derivatives {
        let s = self.forward(u);
        let (d1, d2) = self.inverse_split(self.multiplied(&s, Deriv::D1, Some(Deriv::D2)));
        let (d11, d22) = self.inverse_split(self.multiplied(&s, Deriv::D11, Some(Deriv::D22)));
        let (d12, _) = self.inverse_split(self.multiplied(&s, Deriv::D12, None));
        Derivatives { d1, d2, d11, d12, d22 }
    }

    /// First and second derivatives of two fields (six transforms).
    ///
    /// Every operator is real, so applying it to the transform of `u + i w`
    /// yields `D u + i D w` without separating the two spectra.
    pub fn derivatives_pair(&self, u: &[f64], w: &[f64]) -> (Derivatives, Derivatives) {
        let z = self.forward_packed(u, w);
        let mut re = Vec::with_capacity(5);
        let mut im = Vec::with_capacity(5);
        for op in [Deriv::D1, Deriv::D2, Deriv::D11, Deriv::D12, Deriv::D22] {
            let (a, b) = self.inverse_split(self.multiplied(&z, op, None));
            re.push(a);
            im.push(b);
        }
        (collect(re), collect(im))
    }
}

fn symbol(k1: &[f64], k2: &[f64], k1_odd: &[f64], k2_odd: &[f64], i: usize, j: usize, op: Deriv) -> Complex64 {
    match op {
        Deriv::D1 => Complex64::new(0.0, k1_odd[i]),
        Deriv::D2 => Complex64::new(0.0, k2_odd[j]),
        Deriv::D11 => Complex64::new(-k1[i] * k1[i], 0.0),
        Deriv::D22 => Complex64::new(-k2[j] * k2[j], 0.0),
        Deriv::D12 => Complex64::new(-k1_odd[i] * k2_odd[j], 0.0),
    }
}

/// `dst[y + h x] = src[x + w y]` for a `w x h` row-major block, tiled for cache reuse.
fn transpose(src: &[Complex64], dst: &mut [Complex64], w: usize, h: usize) {
    const TILE: usize = 16;
    for y0 in (0..h).step_by(TILE) {
        for x0 in (0..w).step_by(TILE) {
            for y in y0..(y0 + TILE).min(h) {
                for x in x0..(x0 + TILE).min(w) {
                    dst[y + h * x] = src[x + w * y];
                }
            }
        }
    }
}

fn collect(mut v: Vec<Vec<f64>>) -> Derivatives {
    let d22 = v.pop().unwrap();
    let d12 = v.pop().unwrap();
    let d11 = v.pop().unwrap();
    let d2 = v.pop().unwrap();
    let d1 = v.pop().unwrap();
    Derivatives { d1, d2, d11, d12, d22 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn resolved_mode_is_differentiated_exactly() {
        let grid = PeriodicGrid::new(16, 32, 3.0, 5.0).unwrap();
        let sp = Spectral::new(grid);
        let (a, b) = (TAU / 3.0, 2.0 * TAU / 5.0);
        let u = grid.sample(|x, y| (a * x).sin() * (b * y).cos());
        let d = sp.derivatives(&u);
        assert!(max_err(&d.d1, &grid.sample(|x, y| a * (a * x).cos() * (b * y).cos())) < 1e-13);
        assert!(max_err(&d.d2, &grid.sample(|x, y| -b * (a * x).sin() * (b * y).sin())) < 1e-13);
        assert!(max_err(&d.d11, &grid.sample(|x, y| -a * a * (a * x).sin() * (b * y).cos())) < 1e-12);
        assert!(max_err(&d.d12, &grid.sample(|x, y| -a * b * (a * x).cos() * (b * y).sin())) < 1e-12);
        assert!(max_err(&d.d22, &grid.sample(|x, y| -b * b * (a * x).sin() * (b * y).cos())) < 1e-12);
    }

    #[test]
    fn paired_transforms_match_single_transforms() {
        let grid = PeriodicGrid::new(16, 16, TAU, TAU).unwrap();
        let sp = Spectral::new(grid);
        let u = grid.sample(|x, y| (x + 2.0 * y).sin() + 0.3 * (3.0 * x).cos());
        let w = grid.sample(|x, y| (2.0 * x - y).cos() * (y).sin());
        let (du, dw) = sp.derivatives_pair(&u, &w);
        let su = sp.derivatives(&u);
        let sw = sp.derivatives(&w);
        assert!(max_err(&du.d12, &su.d12) < 1e-12);
        assert!(max_err(&dw.d11, &sw.d11) < 1e-12);
        assert!(max_err(&dw.d2, &sw.d2) < 1e-12);
    }

    #[test]
    fn nyquist_mode_has_no_odd_derivative() {
        let grid = PeriodicGrid::new(8, 8, TAU, TAU).unwrap();
        let sp = Spectral::new(grid);
        let (h, _) = grid.spacing();
        let u = grid.sample(|x, _| (x / h * std::f64::consts::PI).cos());
        let d1 = sp.derivative(&u, Deriv::D1);
        assert!(d1.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let grid = PeriodicGrid::new(32, 32, TAU, TAU).unwrap();
        let sp = Spectral::new(grid);
        let u = grid.sample(|x, y| (x.sin() * y.cos()).exp());
        let [g1, g2] = sp.gradient(&u);
        let div = sp.divergence(&g1, &g2);
        let d = sp.derivatives(&u);
        let lap: Vec<f64> = d.d11.iter().zip(&d.d22).map(|(a, b)| a + b).collect();
        assert!(max_err(&div, &lap) < 1e-9);
    }
}
