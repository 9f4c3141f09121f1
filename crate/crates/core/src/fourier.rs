//! Grid/coefficient transforms for 2π-periodic functions.
//!
//! Real even profiles are stored as cosine coefficients `w(z) = Σ w_n cos(nz)`.
//! Complex periodic functions are stored on the symmetric mode range
//! `-N..=N`, slot `n + N` holding the coefficient of `e^{inz}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `m` equispaced points `2πj/m` on `[0, 2π)`.
pub fn uniform_grid(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

/// `d^order/dz^order` of `cos(nz)` evaluated at `z`.
#[inline]
fn cos_derivative(n: f64, z: f64, order: u32) -> f64 {
    let s = n * z;
    let scale = n.powi(order as i32);
    match order % 4 {
        0 => scale * s.cos(),
        1 => -scale * s.sin(),
        2 => -scale * s.cos(),
        _ => scale * s.sin(),
    }
}

/// Evaluates the `order`-th derivative of a cosine series at `z`.
pub fn cosine_eval(coeffs: &[f64], z: f64, order: u32) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, &w)| w * cos_derivative(n as f64, z, order))
        .sum()
}

/// Samples the `order`-th derivative of a cosine series on a uniform grid of `m` points.
pub fn cosine_sample(coeffs: &[f64], m: usize, order: u32) -> Vec<f64> {
    uniform_grid(m)
        .into_iter()
        .map(|z| cosine_eval(coeffs, z, order))
        .collect()
}

/// Discrete cosine projection of grid values onto modes `0..=n_max`.
///
/// Exact for cosine polynomials of degree below `m - n_max`.
pub fn cosine_project(values: &[f64], n_max: usize) -> Vec<f64> {
    let m = values.len();
    let grid = uniform_grid(m);
    (0..=n_max)
        .map(|n| {
            let weight = if n == 0 { 1.0 } else { 2.0 } / m as f64;
            weight
                * values
                    .iter()
                    .zip(&grid)
                    .map(|(v, z)| v * (n as f64 * z).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Complex Fourier coefficients `f̂_n = (1/m) Σ_j f(z_j) e^{-inz_j}`, in FFT order.
pub fn fourier_coefficients(values: &[f64]) -> Vec<Complex64> {
    let m = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Looks up mode `n` (possibly negative) in an FFT-ordered coefficient vector.
#[inline]
pub fn fft_mode(coeffs: &[Complex64], n: i64) -> Complex64 {
    let m = coeffs.len() as i64;
    coeffs[n.rem_euclid(m) as usize]
}

/// A real 2π-periodic function given by cosine and sine coefficients.
///
/// `cos[n]` multiplies `cos(nz)` and `sin[n]` multiplies `sin(nz)`; `sin[0]` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigSeries {
    pub fn zeros(len: usize) -> Self {
        Self {
            cos: vec![0.0; len],
            sin: vec![0.0; len],
        }
    }

    pub fn from_cos(cos: Vec<f64>) -> Self {
        let len = cos.len();
        Self {
            cos,
            sin: vec![0.0; len],
        }
    }

    pub fn from_sin(sin: Vec<f64>) -> Self {
        let len = sin.len();
        Self {
            cos: vec![0.0; len],
            sin,
        }
    }

    pub fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len()).saturating_sub(1)
    }

    pub fn eval(&self, z: f64) -> f64 {
        let c: f64 = self
            .cos
            .iter()
            .enumerate()
            .map(|(n, w)| w * (n as f64 * z).cos())
            .sum();
        let s: f64 = self
            .sin
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, w)| w * (n as f64 * z).sin())
            .sum();
        c + s
    }

    /// Coefficients on modes `-n..=n`; modes beyond the series degree are zero,
    /// and modes above `n` are dropped.
    pub fn to_modes(&self, n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, 0.5);
        for (m, &c) in self.cos.iter().enumerate().take(n + 1) {
            if m == 0 {
                out[n] += c;
            } else {
                out[n + m] += half * c;
                out[n - m] += half * c;
            }
        }
        for (m, &s) in self.sin.iter().enumerate().take(n + 1).skip(1) {
            // sin(mz) = (e^{imz} - e^{-imz}) / 2i
            out[n + m] -= half_i * s;
            out[n - m] += half_i * s;
        }
        out
    }
}
