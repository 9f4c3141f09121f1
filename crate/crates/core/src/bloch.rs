//! Hill truncations of the linearized and Bloch operators.
//!
//! Perturbations `v(z) = e^{iξz} Σ_n v_n e^{inz}` are represented by their
//! modes `n = -N..=N`; row and column `j` carry mode `n = j - N`. With the
//! symbol `D = i(n + ξ)` the linearization about a profile `w` reads
//!
//! ```text
//! L_ξ = cD - ck²D³ + M[f0] + M[f1]D + M[f2]D² + M[f3]D³
//! f0 = -8ww' + 3k²w'w'' + 2k²ww'''      f1 = -4w² + 3k²ww''
//! f2 = 3k²ww'                           f3 = k²w²
//! ```
//!
//! where `M[f]` is the Toeplitz matrix `f̂(n_i - n_j)`, and the Bloch operator
//! is `A_ξ = k(1 - k²(∂+iξ)²)⁻¹ L_ξ`.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{fft_mode, fourier_coefficients};
use crate::linalg::{eigenvalues_imaginary_aware, CMatrix};
use crate::waveform::{equilibrium, PeriodicProfile};

/// Default Hill truncation.
pub const DEFAULT_HILL_TRUNCATION: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct BlochMatrix {
    pub xi: f64,
    pub n: usize,
    pub entries: CMatrix,
}

impl BlochMatrix {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Fourier mode carried by row/column `j`.
    pub fn mode(&self, j: usize) -> i64 {
        j as i64 - self.n as i64
    }

    /// Row/column index of mode `m`, if it is inside the truncation.
    pub fn index(&self, m: i64) -> Option<usize> {
        let j = m + self.n as i64;
        (0..self.dim() as i64).contains(&j).then_some(j as usize)
    }
}

/// Diagonal of `k(1 - k²(∂+iξ)²)⁻¹` on mode `n`.
pub fn inverse_symbol(n: i64, xi: f64, k: f64) -> f64 {
    let mu = n as f64 + xi;
    k / (1.0 + k * k * mu * mu)
}

fn symbol(n: i64, xi: f64) -> Complex64 {
    Complex64::new(0.0, n as f64 + xi)
}

/// Coefficient fields `f0..f3` of the linearization, as FFT-ordered spectra.
///
/// The transform grid is at least three times the combined band so that
/// every product of profile factors is alias-free on the modes that are read.
fn coefficient_spectra(p: &PeriodicProfile, n: usize) -> [Vec<Complex64>; 4] {
    let k2 = p.params.k * p.params.k;
    let m = (3 * (n + p.truncation())).next_power_of_two().max(16);
    let w = p.sample(m, 0);
    let wz = p.sample(m, 1);
    let wzz = p.sample(m, 2);
    let wzzz = p.sample(m, 3);
    let mut f = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    for j in 0..m {
        f[0][j] = -8.0 * w[j] * wz[j] + 3.0 * k2 * wz[j] * wzz[j] + 2.0 * k2 * w[j] * wzzz[j];
        f[1][j] = -4.0 * w[j] * w[j] + 3.0 * k2 * w[j] * wzz[j];
        f[2][j] = 3.0 * k2 * w[j] * wz[j];
        f[3][j] = k2 * w[j] * w[j];
    }
    f.map(|field| fourier_coefficients(&field))
}

/// Fourier-space matrix of `L_ξ[w]` on modes `-n..=n`.
pub fn build_l_matrix(p: &PeriodicProfile, xi: f64, n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::Dimension("Hill truncation must be positive".into()));
    }
    if p.coeffs.is_empty() {
        return Err(Error::Dimension("profile has no Fourier coefficients".into()));
    }
    if !xi.is_finite() {
        return Err(Error::domain(format!("Bloch frequency must be finite, got {xi}")));
    }
    let k2 = p.params.k * p.params.k;
    let c = p.c;
    let spectra = coefficient_spectra(p, n);
    let dim = 2 * n + 1;
    let offset = n as i64;
    let mut l = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let nj = j as i64 - offset;
        let d = symbol(nj, xi);
        let powers = [Complex64::new(1.0, 0.0), d, d * d, d * d * d];
        for i in 0..dim {
            let diff = i as i64 - nj - offset;
            let mut entry = Complex64::new(0.0, 0.0);
            for (spec, pw) in spectra.iter().zip(&powers) {
                entry += fft_mode(spec, diff) * pw;
            }
            l[(i, j)] = entry;
        }
        l[(j, j)] += c * d - c * k2 * powers[3];
    }
    Ok(l)
}

pub fn build_bloch_matrix(p: &PeriodicProfile, xi: f64, n: usize) -> Result<BlochMatrix> {
    let mut entries = build_l_matrix(p, xi, n)?;
    let k = p.params.k;
    for i in 0..entries.nrows() {
        let scale = inverse_symbol(i as i64 - n as i64, xi, k);
        entries.row_mut(i).scale_mut(scale);
    }
    Ok(BlochMatrix { xi, n, entries })
}

/// `Ω_{n,ξ}` of the constant state: `(n+ξ)((n+ξ)²-1)k³(c0-w0²)/(1+k²(n+ξ)²)`.
pub fn constant_state_omega(n: i64, xi: f64, b: f64, k: f64) -> Result<f64> {
    let eq = equilibrium(b, k)?;
    let mu = n as f64 + xi;
    Ok(mu * (mu * mu - 1.0) * k.powi(3) * (eq.c0 - eq.w0 * eq.w0) / (1.0 + k * k * mu * mu))
}

/// `iΩ_{n,ξ}`, the Bloch eigenvalue of the constant state on mode `n`.
pub fn constant_state_eigenvalue(n: i64, xi: f64, b: f64, k: f64) -> Result<Complex64> {
    Ok(Complex64::new(0.0, constant_state_omega(n, xi, b, k)?))
}

/// Half the modulus of the fourth-smallest constant-state eigenvalue at `ξ`.
pub fn origin_ball_radius(b: f64, k: f64, xi: f64, n: usize) -> Result<f64> {
    let mut moduli = Vec::with_capacity(2 * n + 1);
    for m in -(n as i64)..=n as i64 {
        moduli.push(constant_state_omega(m, xi, b, k)?.abs());
    }
    moduli.sort_by(f64::total_cmp);
    Ok(0.5 * moduli.get(3).copied().unwrap_or(f64::INFINITY))
}

fn lexicographic(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub xi: f64,
    /// sorted by imaginary part, then real part
    pub eigenvalues: Vec<Complex64>,
}

impl SpectrumSlice {
    pub fn new(xi: f64, mut eigenvalues: Vec<Complex64>) -> Self {
        eigenvalues.sort_by(lexicographic);
        Self { xi, eigenvalues }
    }

    /// The `count` eigenvalues of smallest modulus, closest first.
    pub fn nearest_origin(&self, count: usize) -> Vec<Complex64> {
        let mut ev = self.eigenvalues.clone();
        ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(lexicographic(a, b)));
        ev.truncate(count);
        ev
    }

    pub fn within(&self, radius: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|z| z.norm() <= radius)
            .collect()
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// All eigenvalues of the Hill truncation of `A_ξ` at `n` modes per side.
///
/// For an even profile every entry of `A_ξ` is purely imaginary, so the
/// eigensolve runs on the real matrix `-iA_ξ`.
pub fn spectrum_slice(p: &PeriodicProfile, xi: f64, n: usize) -> Result<SpectrumSlice> {
    let a = build_bloch_matrix(p, xi, n)?;
    Ok(SpectrumSlice::new(xi, eigenvalues_imaginary_aware(&a.entries)?))
}

/// Slices over a grid of Bloch frequencies, computed in parallel, returned in grid order.
pub fn spectrum_sweep(p: &PeriodicProfile, xi_grid: &[f64], n: usize) -> Result<Vec<SpectrumSlice>> {
    if let Some(xi) = xi_grid.iter().find(|xi| !(-0.5..0.5).contains(*xi)) {
        return Err(Error::domain(format!("Bloch frequency {xi} is outside [-1/2, 1/2)")));
    }
    xi_grid
        .par_iter()
        .map(|&xi| spectrum_slice(p, xi, n))
        .collect()
}

/// Ordered constant-state frequencies and violations of the collision-free chain
/// `Ω_{-4} < Ω_{-3} < Ω_{-2} < Ω_0 < 0 < Ω_{-1} < Ω_1 < Ω_2 < Ω_3 < Ω_4`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport {
    pub xi: f64,
    /// `(n, Ω_{n,ξ})` in chain order
    pub chain: Vec<(i64, f64)>,
    /// adjacent chain links that fail to be strict, as `(n_left, n_right)`;
    /// `None` stands for the zero in the middle of the chain
    pub violations: Vec<(Option<i64>, Option<i64>)>,
    /// set when `k² ≥ 3`, where the ordering is not guaranteed
    pub advisory: bool,
}

impl CollisionReport {
    pub fn is_strict(&self) -> bool {
        self.violations.is_empty()
    }
}

const CHAIN: [Option<i64>; 10] = [
    Some(-4),
    Some(-3),
    Some(-2),
    Some(0),
    None,
    Some(-1),
    Some(1),
    Some(2),
    Some(3),
    Some(4),
];

pub fn collision_check(b: f64, k: f64, xi: f64) -> Result<CollisionReport> {
    if !(xi > 0.0 && xi <= 0.5) {
        return Err(Error::domain(format!("collision check needs xi in (0, 1/2], got {xi}")));
    }
    let value = |slot: Option<i64>| -> Result<f64> {
        slot.map_or(Ok(0.0), |n| constant_state_omega(n, xi, b, k))
    };
    let mut chain = Vec::new();
    let mut violations = Vec::new();
    for pair in CHAIN.windows(2) {
        if !(value(pair[0])? < value(pair[1])?) {
            violations.push((pair[0], pair[1]));
        }
    }
    for n in CHAIN.iter().flatten() {
        chain.push((*n, value(Some(*n))?));
    }
    Ok(CollisionReport {
        xi,
        chain,
        violations,
        advisory: k * k >= 3.0,
    })
}

fn min_gap(points: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            gap = gap.min((points[i] - points[j]).norm());
        }
    }
    gap
}

/// Branch labels by nearest-neighbour continuation across consecutive slices.
///
/// Each branch is extrapolated linearly from its last two points and matched
/// greedily, shortest distance first. The step is rejected for any
/// eigenvalue whose nearest neighbour in the new slice is closer than half the
/// smallest gap of the earlier slice; such eigenvalues start new branches.
pub fn trace_branches(slices: &[SpectrumSlice]) -> Vec<Vec<usize>> {
    let mut labels: Vec<Vec<usize>> = Vec::with_capacity(slices.len());
    let mut next_label = 0;
    for (s, slice) in slices.iter().enumerate() {
        let cur = &slice.eigenvalues;
        if s == 0 {
            labels.push((0..cur.len()).collect());
            next_label = cur.len();
            continue;
        }
        let prev = &slices[s - 1].eigenvalues;
        let floor = 0.5 * min_gap(prev);
        let crowded: Vec<bool> = (0..cur.len())
            .map(|j| (0..cur.len()).any(|i| i != j && (cur[i] - cur[j]).norm() < floor))
            .collect();
        // secant prediction where the branch already spans two slices
        let predicted: Vec<Complex64> = prev
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let older = s
                    .checked_sub(2)
                    .and_then(|t| labels[t].iter().position(|&l| l == labels[s - 1][i]))
                    .map(|pos| slices[s - 2].eigenvalues[pos]);
                older.map_or(*x, |o| 2.0 * x - o)
            })
            .collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(prev.len() * cur.len());
        for (i, x) in predicted.iter().enumerate() {
            for (j, y) in cur.iter().enumerate() {
                if !crowded[j] {
                    pairs.push(((x - y).norm(), i, j));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut taken_prev = vec![false; prev.len()];
        let mut row = vec![usize::MAX; cur.len()];
        for (_, i, j) in pairs {
            if taken_prev[i] || row[j] != usize::MAX {
                continue;
            }
            taken_prev[i] = true;
            row[j] = labels[s - 1][i];
        }
        for label in row.iter_mut().filter(|l| **l == usize::MAX) {
            *label = next_label;
            next_label += 1;
        }
        labels.push(row);
    }
    labels
}

/// CSV with header `xi,re,im,branch_hint`, one row per eigenvalue, slices in order.
pub fn write_spectrum_csv<W: Write>(slices: &[SpectrumSlice], mut out: W) -> std::io::Result<()> {
    let labels = trace_branches(slices);
    out.write_all(b"xi,re,im,branch_hint\n")?;
    for (slice, row) in slices.iter().zip(&labels) {
        for (z, label) in slice.eigenvalues.iter().zip(row) {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{}", slice.xi, z.re, z.im, label)?;
        }
    }
    Ok(())
}

pub fn export_spectrum_csv(slices: &[SpectrumSlice], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_spectrum_csv(slices, &mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
