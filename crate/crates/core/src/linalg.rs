//! Small dense complex linear algebra on top of nalgebra storage, with
//! faer doing the nonsymmetric eigensolves.

use faer::Mat;
use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CMatrix3 = Matrix3<Complex64>;

pub fn max_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// All eigenvalues of a general square complex matrix, in solver order.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let fail = || Error::Eigen {
        size: n,
        max_entry: max_entry(m),
    };
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(fail());
    }
    let f = Mat::<Complex64>::from_fn(n, n, |i, j| m[(i, j)]);
    let ev = f.eigenvalues().map_err(|_| fail())?;
    if ev.len() != n || ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(fail());
    }
    Ok(ev)
}

/// Eigenvalues of a general square real matrix; complex ones come in exact conjugate pairs.
pub fn real_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let fail = || Error::Eigen {
        size: n,
        max_entry: m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())),
    };
    if m.iter().any(|x| !x.is_finite()) {
        return Err(fail());
    }
    let f = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let ev = f.eigenvalues().map_err(|_| fail())?;
    if ev.len() != n || ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(fail());
    }
    Ok(ev)
}

/// Eigenvalues of `m`, taking the real-arithmetic route `m = iB` when the real
/// part of `m` is pure rounding (below `1e-13` of the largest entry). The
/// returned spectrum is then exactly symmetric under `λ -> -conj(λ)`.
pub fn eigenvalues_imaginary_aware(m: &CMatrix) -> Result<Vec<Complex64>> {
    let scale = max_entry(m);
    let re = m.iter().fold(0.0f64, |acc, z| acc.max(z.re.abs()));
    if scale > 0.0 && re <= 1e-13 * scale {
        let b = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im);
        let mu = real_eigenvalues(&b)?;
        // `+ 0.0` turns the -0.0 of on-axis eigenvalues into +0.0
        return Ok(mu.into_iter().map(|z| Complex64::new(-z.im + 0.0, z.re)).collect());
    }
    eigenvalues(m)
}

/// Coefficients `c_m` of `det(S - λG) = Σ_{m=0}^{3} c_m λ^m`.
///
/// Expands multilinearly in the columns: the λ^m term collects every
/// determinant that takes `m` columns from `G` and the rest from `S`.
pub fn pencil_determinant_coefficients(s: &CMatrix3, g: &CMatrix3) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for mask in 0u8..8 {
        let mut m = *s;
        for j in 0..3 {
            if mask & (1 << j) != 0 {
                m.set_column(j, &g.column(j));
            }
        }
        let taken = mask.count_ones() as usize;
        let sign = if taken.is_multiple_of(2) { 1.0 } else { -1.0 };
        out[taken] += m.determinant() * sign;
    }
    out
}

/// Generalized eigenvalues of the 3×3 pencil `S - λG` (eigenvalues of `G⁻¹S`).
pub fn pencil_eigenvalues(s: &CMatrix3, g: &CMatrix3) -> Result<Vec<Complex64>> {
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::Singular("Gram matrix of the reduced pencil".into()))?;
    let prod = ginv * s;
    eigenvalues(&CMatrix::from_fn(3, 3, |i, j| prod[(i, j)]))
}

/// Roots of `Σ_{m=0}^{deg} c_m x^m` from the eigenvalues of the companion matrix.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs
        .iter()
        .rposition(|c| *c != Complex64::new(0.0, 0.0))
        .ok_or(Error::DegenerateCubic)?;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    eigenvalues(&comp)
}

/// Greedy matching of two equally sized point sets; returns the worst pair distance.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let mut best = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            used[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}
