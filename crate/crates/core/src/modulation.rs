//! Three-mode reduction of the Bloch eigenproblem near the origin.
//!
//! At `a = ξ = 0` zero is a triple eigenvalue with eigenfunctions
//! `cos z, sin z, 1`. For small `(a, ξ)` the three eigenvalues near the origin
//! are the roots of `det(S - λG) = 0`, where `S` and `G` are the action and
//! Gram matrices of `A_ξ` on a basis continuing those three functions.
//! Writing `λ = iξX` turns the determinant into a real cubic
//!
//! ```text
//! Q(X) = q3 X³ - q2 X² - q1 X + q0,
//! ```
//!
//! whose roots are all real (spectrum on the imaginary axis) when the
//! discriminant is positive.

use std::fmt;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::build_bloch_matrix;
use crate::error::{Error, Result};
use crate::fourier::TrigSeries;
use crate::linalg::{pencil_determinant_coefficients, pencil_eigenvalues, polynomial_roots, CMatrix3};
use crate::waveform::{
    equilibrium, expansion_coefficients, parameter_derivatives, PeriodicProfile, WaveParams,
};

/// Largest `|a|` accepted by [`classify`].
pub const MAX_TRUSTED_AMPLITUDE: f64 = 0.1;

/// Relative width of the band around `Δ = 0` reported as [`Verdict::Critical`].
pub const CRITICAL_BAND: f64 = 1e-12;

/// Tolerance on the imaginary residue of the cubic coefficients.
pub const REALITY_TOL: f64 = 1e-6;

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Basis of the spectral subspace continuing `{cos z, sin z, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalBasis {
    pub phi1: TrigSeries,
    pub phi2: TrigSeries,
    pub phi3: TrigSeries,
}

impl CriticalBasis {
    pub fn as_array(&self) -> [&TrigSeries; 3] {
        [&self.phi1, &self.phi2, &self.phi3]
    }

    /// First-order basis `cos z + a(d3 + 2d2 cos 2z)`, `sin z + 2a d2 sin 2z`, `1`.
    pub fn asymptotic(params: WaveParams) -> Result<Self> {
        let ex = expansion_coefficients(params.b, params.k)?;
        let a = params.a;
        Ok(Self {
            phi1: TrigSeries::from_cos(vec![a * ex.d3, 1.0, 2.0 * a * ex.d2]),
            phi2: TrigSeries::from_sin(vec![0.0, 1.0, 2.0 * a * ex.d2]),
            phi3: TrigSeries::from_cos(vec![1.0]),
        })
    }

    /// Basis built from a solved profile and its parameter derivatives:
    ///
    /// - `φ1 ∝ c_a w_b - c_b w_a`, scaled so its `cos z` coefficient is 1
    /// - `φ2 = -w_z / a`
    /// - `φ3 = w_b / ∂_b w0`
    ///
    /// `φ1` and `φ2` span the kernel of `L_0` and `φ3` completes the
    /// generalized kernel. At `a = 0` this is exactly `{cos z, sin z, 1}`.
    pub fn numeric(p: &PeriodicProfile) -> Result<Self> {
        let WaveParams { k, b, a } = p.params;
        let d = parameter_derivatives(p)?;
        let len = p.coeffs.len();
        let eq = equilibrium(b, k)?;

        let phi1 = if a == 0.0 {
            let mut cos = vec![0.0; len];
            cos[1] = 1.0;
            cos
        } else {
            let raw: Vec<f64> = (0..len).map(|n| d.c_a * d.w_b[n] - d.c_b * d.w_a[n]).collect();
            let lead = raw[1];
            if lead == 0.0 {
                return Err(Error::Singular("first basis function has no cos z component".into()));
            }
            raw.into_iter().map(|x| x / lead).collect()
        };
        let phi2 = if a == 0.0 {
            let mut sin = vec![0.0; len];
            sin[1] = 1.0;
            sin
        } else {
            p.coeffs
                .iter()
                .enumerate()
                .map(|(n, w)| n as f64 * w / a)
                .collect()
        };
        let w0_b = eq.w0 / (4.0 * b);
        let phi3 = d.w_b.iter().map(|x| x / w0_b).collect();
        Ok(Self {
            phi1: TrigSeries::from_cos(phi1),
            phi2: TrigSeries::from_sin(phi2),
            phi3: TrigSeries::from_cos(phi3),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Asymptotic,
    Numeric,
}

/// The pencil `M(λ) = S - λG`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    pub s: CMatrix3,
    pub g: CMatrix3,
    pub xi: f64,
    pub provenance: Provenance,
}

impl ReducedMatrix {
    /// The three roots of `det(S - λG) = 0`.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        pencil_eigenvalues(&self.s, &self.g)
    }
}

/// Scalars entering the closed-form reduced matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedScalars {
    /// `c0 - 4w0²`
    pub alpha: f64,
    /// `-2k²/(k²+1)²`
    pub y1: f64,
    /// `1/(k²+1)`
    pub m1: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

pub fn reduced_scalars(b: f64, k: f64) -> Result<ReducedScalars> {
    let eq = equilibrium(b, k)?;
    let ex = expansion_coefficients(b, k)?;
    let k2 = k * k;
    let w0 = eq.w0;
    let alpha = eq.c0 - 4.0 * w0 * w0;
    let m1 = 1.0 / (k2 + 1.0);
    let y1 = -2.0 * k2 / ((k2 + 1.0) * (k2 + 1.0));
    let gamma1 = 2.0 * k * alpha * ex.d3 + k * y1 * w0 * (2.0 * k2 + 8.0)
        - k * w0 * m1 * (3.0 * k2 + 8.0);
    let gamma2 = k * ex.d3 * alpha - k * w0 * (3.0 * k2 + 8.0) / 2.0;
    Ok(ReducedScalars {
        alpha,
        y1,
        m1,
        gamma1,
        gamma2,
    })
}

/// Closed-form leading-order reduced matrix, with `G = I`.
///
/// ```text
/// S = iξ diag(-2kαm1, -2kαm1, kα)
///   + a kw0m1(2k²+8) e2e3ᵀ
///   + aiξ (γ1 e1e3ᵀ + γ2 e3e1ᵀ)
///   + ξ² kα(3m1 - 2y1)(e2e1ᵀ - e1e2ᵀ)
/// ```
pub fn reduced_matrix_asymptotic(params: WaveParams, xi: f64) -> Result<ReducedMatrix> {
    let WaveParams { k, b, a } = params;
    let eq = equilibrium(b, k)?;
    let r = reduced_scalars(b, k)?;
    let k2 = k * k;
    let mut s = CMatrix3::zeros();
    s[(0, 0)] = cz(0.0, xi * (-2.0 * k * r.alpha * r.m1));
    s[(1, 1)] = s[(0, 0)];
    s[(2, 2)] = cz(0.0, xi * k * r.alpha);
    s[(1, 2)] = cz(a * k * eq.w0 * r.m1 * (2.0 * k2 + 8.0), 0.0);
    s[(0, 2)] = cz(0.0, a * xi * r.gamma1);
    s[(2, 0)] = cz(0.0, a * xi * r.gamma2);
    let skew = xi * xi * k * r.alpha * (3.0 * r.m1 - 2.0 * r.y1);
    s[(0, 1)] = cz(-skew, 0.0);
    s[(1, 0)] = cz(skew, 0.0);
    Ok(ReducedMatrix {
        s,
        g: CMatrix3::identity(),
        xi,
        provenance: Provenance::Asymptotic,
    })
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(x, y)| x * y.conj()).sum()
}

/// Galerkin projection of the Hill truncation of `A_ξ` onto [`CriticalBasis::numeric`]:
/// `S_ij = ⟨A_ξ φ_j, φ_i⟩/⟨φ_i, φ_i⟩` and `G_ij = ⟨φ_j, φ_i⟩/⟨φ_i, φ_i⟩`.
pub fn reduced_matrix_numeric(p: &PeriodicProfile, xi: f64, n: usize) -> Result<ReducedMatrix> {
    let basis = CriticalBasis::numeric(p)?;
    reduced_matrix_galerkin(p, &basis, xi, n)
}

/// Galerkin projection onto an arbitrary three-function basis.
pub fn reduced_matrix_galerkin(
    p: &PeriodicProfile,
    basis: &CriticalBasis,
    xi: f64,
    n: usize,
) -> Result<ReducedMatrix> {
    if n < 2 {
        return Err(Error::Dimension(format!(
            "reduced matrix needs at least 2 Hill modes, got {n}"
        )));
    }
    let a = build_bloch_matrix(p, xi, n)?;
    let modes: Vec<Vec<Complex64>> = basis.as_array().iter().map(|phi| phi.to_modes(n)).collect();
    let images: Vec<Vec<Complex64>> = modes
        .iter()
        .map(|v| {
            let col = &a.entries * nalgebra::DVector::from_column_slice(v);
            col.iter().copied().collect()
        })
        .collect();
    let mut s = CMatrix3::zeros();
    let mut g = CMatrix3::zeros();
    for i in 0..3 {
        let norm = inner(&modes[i], &modes[i]);
        for j in 0..3 {
            s[(i, j)] = inner(&images[j], &modes[i]) / norm;
            g[(i, j)] = inner(&modes[j], &modes[i]) / norm;
        }
    }
    Ok(ReducedMatrix {
        s,
        g,
        xi,
        provenance: Provenance::Numeric,
    })
}

/// Real coefficients of `Q(X) = q3 X³ - q2 X² - q1 X + q0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl CubicCoefficients {
    pub fn scale(&self) -> f64 {
        [self.q0, self.q1, self.q2, self.q3]
            .iter()
            .fold(0.0f64, |m, q| m.max(q.abs()))
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        x * x * x * self.q3 - x * x * self.q2 - x * self.q1 + self.q0
    }

    /// Coefficients of the cubic whose roots are `r1, r2, r3`, scaled by `lead`.
    pub fn from_roots(lead: f64, r1: f64, r2: f64, r3: f64) -> Self {
        Self {
            q3: lead,
            q2: lead * (r1 + r2 + r3),
            q1: -lead * (r1 * r2 + r2 * r3 + r1 * r3),
            q0: -lead * r1 * r2 * r3,
        }
    }
}

/// Coefficients of `Q` from `det(S - λG) = Σ c_m λ^m`.
///
/// For `ξ ≠ 0` this is `det(S - iξXG) / (iξ³)`. At `ξ = 0` the scaling is
/// singular and the unscaled cubic `-det(S - λG)` in `λ` is returned instead.
/// Any imaginary part above [`REALITY_TOL`] times the coefficient scale is a
/// [`Error::Consistency`] failure.
pub fn cubic_coefficients(m: &ReducedMatrix) -> Result<CubicCoefficients> {
    let c = pencil_determinant_coefficients(&m.s, &m.g);
    let xi = m.xi;
    let raw: [Complex64; 4] = if xi == 0.0 {
        [-c[0], c[1], c[2], -c[3]]
    } else {
        let ixi = cz(0.0, xi);
        [
            c[0] / (ixi * xi * xi),
            -c[1] / (xi * xi),
            c[2] / ixi,
            -c[3],
        ]
    };
    let scale = raw.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    for (index, z) in raw.iter().enumerate() {
        if z.im.abs() > REALITY_TOL * scale {
            return Err(Error::Consistency {
                index,
                residue: z.im.abs(),
                scale,
            });
        }
    }
    Ok(CubicCoefficients {
        q0: raw[0].re,
        q1: raw[1].re,
        q2: raw[2].re,
        q3: raw[3].re,
    })
}

/// `Δ = 18q3q2q1q0 + q2²q1² + 4q2³q0 + 4q3q1³ - 27q3²q0²`.
pub fn discriminant(q: &CubicCoefficients) -> Result<f64> {
    let CubicCoefficients { q0, q1, q2, q3 } = *q;
    if q3 == 0.0 {
        return Err(Error::DegenerateCubic);
    }
    Ok(18.0 * q3 * q2 * q1 * q0 + q2 * q2 * q1 * q1 + 4.0 * q2.powi(3) * q0
        + 4.0 * q3 * q1.powi(3)
        - 27.0 * q3 * q3 * q0 * q0)
}

/// Roots of `Q` via the companion matrix.
pub fn cubic_roots(q: &CubicCoefficients) -> Result<Vec<Complex64>> {
    if q.q3 == 0.0 {
        return Err(Error::DegenerateCubic);
    }
    polynomial_roots(&[cz(q.q0, 0.0), cz(-q.q1, 0.0), cz(-q.q2, 0.0), cz(q.q3, 0.0)])
}

/// Closed forms for the expansion `Δ(a, ξ) ≈ Δ0 ξ² + Λ a²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingTerms {
    /// `12√3 b³k¹⁸(k²+3)⁴(7k²+3)² / (k²+1)^{19/2}`
    pub delta0: f64,
    /// `4b^{5/2}k¹⁴(k²+3)³(k²+4)²(7k²+3)(3-k²) / (3^{3/4}(k²+1)^{29/4})`
    pub lambda: f64,
}

pub fn discriminant_leading_terms(b: f64, k: f64) -> Result<LeadingTerms> {
    equilibrium(b, k)?;
    let k2 = k * k;
    let delta0 = 12.0 * 3f64.sqrt() * b.powi(3) * k.powi(18) * (k2 + 3.0).powi(4)
        * (7.0 * k2 + 3.0).powi(2)
        / (k2 + 1.0).powf(9.5);
    let lambda = 4.0 * b.powf(2.5) * k.powi(14) * (k2 + 3.0).powi(3) * (k2 + 4.0).powi(2)
        * (7.0 * k2 + 3.0)
        * (3.0 - k2)
        / (3f64.powf(0.75) * (k2 + 1.0).powf(7.25));
    Ok(LeadingTerms { delta0, lambda })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Critical,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "Stable",
            Verdict::Unstable => "Unstable",
            Verdict::Critical => "Critical",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Stable" => Ok(Verdict::Stable),
            "Unstable" => Ok(Verdict::Unstable),
            "Critical" => Ok(Verdict::Critical),
            other => Err(Error::Parse(format!("unknown verdict {other:?}"))),
        }
    }
}

/// Sign rule with a relative dead band: `Δ` is compared against
/// [`CRITICAL_BAND`] times the fourth power of the coefficient scale.
pub fn verdict(delta: f64, q: &CubicCoefficients) -> Verdict {
    let band = CRITICAL_BAND * q.scale().powi(4);
    if delta > band {
        Verdict::Stable
    } else if delta < -band {
        Verdict::Unstable
    } else {
        Verdict::Critical
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationResult {
    pub params: WaveParams,
    pub xi: f64,
    pub provenance: Provenance,
    pub q: CubicCoefficients,
    pub delta: f64,
    /// roots of `Q` as `[re, im]`
    pub roots: Vec<[f64; 2]>,
    pub verdict: Verdict,
    /// `|β||ξ|` for complex roots `X = α ± iβ`, zero otherwise
    pub growth_rate: f64,
}

impl ModulationResult {
    pub fn roots_complex(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| cz(r[0], r[1])).collect()
    }

    /// Eigenvalues `λ = iξX` predicted by the cubic.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.roots_complex()
            .into_iter()
            .map(|x| cz(0.0, self.xi) * x)
            .collect()
    }
}

fn finish(params: WaveParams, m: &ReducedMatrix) -> Result<ModulationResult> {
    let q = cubic_coefficients(m)?;
    let delta = discriminant(&q)?;
    let roots = cubic_roots(&q)?;
    let verdict = verdict(delta, &q);
    let beta = roots.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    let growth_rate = if verdict == Verdict::Unstable {
        beta * m.xi.abs()
    } else {
        0.0
    };
    Ok(ModulationResult {
        params,
        xi: m.xi,
        provenance: m.provenance,
        q,
        delta,
        roots: roots.iter().map(|z| [z.re, z.im]).collect(),
        verdict,
        growth_rate,
    })
}

fn check_xi(xi: f64) -> Result<()> {
    if xi == 0.0 || !xi.is_finite() || xi.abs() > 0.5 {
        return Err(Error::domain(format!(
            "classification needs 0 < |xi| <= 1/2, got {xi}"
        )));
    }
    Ok(())
}

/// Verdict from the closed-form reduced matrix.
pub fn classify(params: WaveParams, xi: f64) -> Result<ModulationResult> {
    check_xi(xi)?;
    if params.a.abs() > MAX_TRUSTED_AMPLITUDE {
        return Err(Error::domain(format!(
            "|a| = {} is outside the asymptotic range |a| <= {MAX_TRUSTED_AMPLITUDE}",
            params.a.abs()
        )));
    }
    finish(params, &reduced_matrix_asymptotic(params, xi)?)
}

/// Verdict from the Galerkin-projected Hill matrix of a solved profile.
pub fn classify_numeric(p: &PeriodicProfile, xi: f64, n: usize) -> Result<ModulationResult> {
    check_xi(xi)?;
    finish(p.params, &reduced_matrix_numeric(p, xi, n)?)
}

/// `|ξ| <= |a|`, where `Δ0ξ²` does not swamp `Λa²`.
pub fn in_trust_region(params: &WaveParams, xi: f64) -> bool {
    params.a.abs() <= MAX_TRUSTED_AMPLITUDE && xi.abs() <= params.a.abs()
}

pub const CLASSIFICATION_HEADER: &str = "k,b,a,xi,delta,verdict,growth_rate";

pub fn write_classification_csv<W: Write>(rows: &[ModulationResult], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CLASSIFICATION_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            r.params.k, r.params.b, r.params.a, r.xi, r.delta, r.verdict, r.growth_rate
        )?;
    }
    Ok(())
}

pub fn export_classification_csv(rows: &[ModulationResult], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_classification_csv(rows, &mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn export_classification_json(result: &ModulationResult, path: &Path) -> Result<()> {
    let text = crate::json::to_string(result)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::constant_state_omega;
    use crate::linalg::multiset_distance;
    use crate::waveform::{asymptotic_profile, solve_profile, SolverOptions};

    fn params(k: f64, b: f64, a: f64) -> WaveParams {
        WaveParams::new(k, b, a).unwrap()
    }

    #[test]
    fn scalars_at_unit_parameters() {
        let r = reduced_scalars(1.0, 1.0).unwrap();
        let w0 = equilibrium(1.0, 1.0).unwrap().w0;
        assert!((r.alpha + 1.5 * w0 * w0).abs() < 1e-14);
        assert_eq!(r.m1, 0.5);
        assert_eq!(r.y1, -0.5);
    }

    #[test]
    fn alpha_identity() {
        for &(b, k) in &[(1.0, 1.0), (0.3, 2.7), (5.0, 0.4)] {
            let eq = equilibrium(b, k).unwrap();
            let r = reduced_scalars(b, k).unwrap();
            let rhs = -3.0 * k * k * eq.w0 * eq.w0 / (k * k + 1.0);
            assert!((r.alpha - rhs).abs() < 1e-13 * rhs.abs());
        }
    }

    #[test]
    fn basis_at_zero_amplitude() {
        let p = params(1.3, 1.0, 0.0);
        let asym = CriticalBasis::asymptotic(p).unwrap();
        let num = CriticalBasis::numeric(&asymptotic_profile(p).unwrap()).unwrap();
        for z in [0.0, 0.4, 1.9, 4.0] {
            for basis in [&asym, &num] {
                assert!((basis.phi1.eval(z) - z.cos()).abs() < 1e-15);
                assert!((basis.phi2.eval(z) - z.sin()).abs() < 1e-15);
                assert!((basis.phi3.eval(z) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn second_basis_function_is_profile_slope() {
        let p = params(1.0, 1.0, 0.04);
        let basis = CriticalBasis::asymptotic(p).unwrap();
        let prof = asymptotic_profile(p).unwrap();
        for z in [0.3, 1.2, 2.5] {
            let slope = -prof.derivative(z, 1) / p.a;
            assert!((basis.phi2.eval(z) - slope).abs() < 1e-15);
        }
    }

    #[test]
    fn numeric_basis_is_first_order_close_to_asymptotic() {
        let gap = |a: f64| {
            let p = params(1.0, 1.0, a);
            let prof = solve_profile(p, &SolverOptions::default()).unwrap();
            let num = CriticalBasis::numeric(&prof).unwrap();
            let asym = CriticalBasis::asymptotic(p).unwrap();
            (0..64)
                .map(|j| j as f64 * 0.1)
                .map(|z| {
                    (num.phi1.eval(z) - asym.phi1.eval(z)).abs()
                        + (num.phi2.eval(z) - asym.phi2.eval(z)).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let ratio = gap(0.04) / gap(0.02);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn parity_orthogonality() {
        let basis = CriticalBasis::asymptotic(params(1.0, 1.0, 0.05)).unwrap();
        let u = basis.phi1.to_modes(4);
        let v = basis.phi2.to_modes(4);
        assert!(inner(&u, &v).norm() < 1e-17);
    }

    #[test]
    fn asymptotic_matrix_at_zero_amplitude_matches_dispersion_slopes() {
        for &(b, k) in &[(1.0, 1.0), (2.0, 2.0), (0.5, 1.6)] {
            let eq = equilibrium(b, k).unwrap();
            let k2 = k * k;
            let xi = 1e-3;
            let m = reduced_matrix_asymptotic(params(k, b, 0.0), xi).unwrap();
            let outer = 6.0 * k.powi(3) * eq.w0 * eq.w0 / ((k2 + 1.0) * (k2 + 1.0));
            let middle = -3.0 * k.powi(3) * eq.w0 * eq.w0 / (k2 + 1.0);
            assert!((m.s[(0, 0)].im - xi * outer).abs() < 1e-14);
            assert!((m.s[(2, 2)].im - xi * middle).abs() < 1e-14);
            // independent: centred finite difference of the dispersion relation
            let h = 1e-6;
            let slope = |n: i64| {
                (constant_state_omega(n, h, b, k).unwrap() - constant_state_omega(n, -h, b, k).unwrap())
                    / (2.0 * h)
            };
            assert!((slope(1) - outer).abs() < 1e-8 * outer.abs().max(1.0));
            assert!((slope(-1) - outer).abs() < 1e-8 * outer.abs().max(1.0));
            assert!((slope(0) - middle).abs() < 1e-8 * middle.abs().max(1.0));
        }
    }

    #[test]
    fn zero_bloch_frequency_leaves_jordan_block() {
        let m = reduced_matrix_asymptotic(params(1.0, 1.0, 0.05), 0.0).unwrap();
        let q = cubic_coefficients(&m).unwrap();
        assert_eq!((q.q0, q.q1, q.q2), (0.0, 0.0, 0.0));
        assert_eq!(q.q3, 1.0);
    }

    #[test]
    fn cubic_at_zero_amplitude_has_diagonal_roots() {
        let (b, k) = (1.0, 1.0);
        let r = reduced_scalars(b, k).unwrap();
        let m = reduced_matrix_asymptotic(params(k, b, 0.0), 1e-6).unwrap();
        let q = cubic_coefficients(&m).unwrap();
        assert!(q.q3 > 0.0);
        let roots = cubic_roots(&q).unwrap();
        let want = [
            cz(-2.0 * k * r.alpha * r.m1, 0.0),
            cz(-2.0 * k * r.alpha * r.m1, 0.0),
            cz(k * r.alpha, 0.0),
        ];
        assert!(multiset_distance(&roots, &want) < 1e-4);
    }

    #[test]
    fn discriminant_of_known_cubics() {
        let double = CubicCoefficients::from_roots(1.0, 1.0, 1.0, 2.0);
        assert_eq!(discriminant(&double).unwrap(), 0.0);
        let distinct = CubicCoefficients::from_roots(2.0, -1.0, 0.5, 3.0);
        // 2⁴ ∏(ri - rj)²
        let want = 16.0 * (1.5f64 * 4.0 * 2.5).powi(2);
        assert!((discriminant(&distinct).unwrap() - want).abs() < 1e-9 * want);
        // (X² + 1)(X - 1) = X³ - X² + X - 1
        let complex = CubicCoefficients { q3: 1.0, q2: 1.0, q1: -1.0, q0: -1.0 };
        assert!(discriminant(&complex).unwrap() < 0.0);
        let flat = CubicCoefficients { q3: 0.0, q2: 1.0, q1: 0.0, q0: 0.0 };
        assert!(matches!(discriminant(&flat), Err(Error::DegenerateCubic)));
    }

    #[test]
    fn roots_solve_the_cubic() {
        let q = CubicCoefficients { q3: 1.5, q2: -0.3, q1: 2.0, q0: 0.7 };
        for x in cubic_roots(&q).unwrap() {
            assert!(q.eval(x).norm() < 1e-12 * q.scale());
        }
    }

    #[test]
    fn reality_check_rejects_inconsistent_matrices() {
        let mut m = reduced_matrix_asymptotic(params(1.0, 1.0, 0.05), 0.01).unwrap();
        m.s[(0, 0)] += cz(1e-3, 0.0);
        assert!(matches!(cubic_coefficients(&m), Err(Error::Consistency { .. })));
    }

    #[test]
    fn coefficients_parity_in_xi() {
        let p = params(1.2, 1.0, 0.03);
        let plus = cubic_coefficients(&reduced_matrix_asymptotic(p, 0.01).unwrap()).unwrap();
        let minus = cubic_coefficients(&reduced_matrix_asymptotic(p, -0.01).unwrap()).unwrap();
        let prof = solve_profile(p, &SolverOptions::default()).unwrap();
        let nplus = cubic_coefficients(&reduced_matrix_numeric(&prof, 0.01, 32).unwrap()).unwrap();
        let nminus = cubic_coefficients(&reduced_matrix_numeric(&prof, -0.01, 32).unwrap()).unwrap();
        // σ(A_{-ξ}) = -σ(A_ξ) leaves X = λ/(iξ) fixed, so every q is even in ξ
        for (x, y) in [(plus, minus), (nplus, nminus)] {
            for (u, v) in [(x.q0, y.q0), (x.q1, y.q1), (x.q2, y.q2), (x.q3, y.q3)] {
                assert!((u - v).abs() < 1e-10 * x.scale());
            }
        }
    }

    #[test]
    fn numeric_matrix_reduces_to_constant_state() {
        let (b, k) = (1.0, 1.0);
        let p = params(k, b, 0.0);
        let prof = asymptotic_profile(p).unwrap();
        let zero = reduced_matrix_numeric(&prof, 0.0, 32).unwrap();
        let asym = reduced_matrix_asymptotic(p, 0.0).unwrap();
        assert!((zero.s - asym.s).iter().all(|z| z.norm() < 1e-12));
        assert!((zero.g - CMatrix3::identity()).iter().all(|z| z.norm() < 1e-15));

        let xi = 0.01;
        let m = reduced_matrix_numeric(&prof, xi, 32).unwrap();
        let om = |n: i64| constant_state_omega(n, xi, b, k).unwrap();
        let tol = 1e-12;
        assert!((m.s[(0, 0)] - cz(0.0, 0.5 * (om(1) + om(-1)))).norm() < tol);
        assert!((m.s[(1, 1)] - cz(0.0, 0.5 * (om(1) + om(-1)))).norm() < tol);
        assert!((m.s[(0, 1)] - cz(0.5 * (om(1) - om(-1)), 0.0)).norm() < tol);
        assert!((m.s[(1, 0)] + cz(0.5 * (om(1) - om(-1)), 0.0)).norm() < tol);
        assert!((m.s[(2, 2)] - cz(0.0, om(0))).norm() < tol);

        // the diagonal of the closed form is the first-order Taylor polynomial
        let gap = |xi: f64| {
            let num = reduced_matrix_numeric(&prof, xi, 32).unwrap();
            let asym = reduced_matrix_asymptotic(p, xi).unwrap();
            (0..3).fold(0.0f64, |acc, i| acc.max((num.s[(i, i)] - asym.s[(i, i)]).norm()))
        };
        let ratio = gap(0.02) / gap(0.01);
        assert!((7.0..=9.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn closed_form_skew_block_against_dispersion_relation() {
        // Ω_{1,ξ} - Ω_{-1,ξ} = Ω''(1)ξ² + O(ξ⁴) with Ω''(1)/2 = 3k³w0²(3-k²)/(k²+1)³,
        // while the closed-form block carries 3k³w0²(7k²+3)/(k²+1)³
        for &(b, k) in &[(1.0, 1.0), (1.0, 2.0), (2.0, 0.7)] {
            let eq = equilibrium(b, k).unwrap();
            let k2 = k * k;
            let xi = 1e-3;
            let exact = 0.5
                * (constant_state_omega(1, xi, b, k).unwrap()
                    - constant_state_omega(-1, xi, b, k).unwrap());
            let from_taylor = 3.0 * k.powi(3) * eq.w0 * eq.w0 * (3.0 - k2) / (k2 + 1.0).powi(3);
            assert!((exact / (xi * xi) - from_taylor).abs() < 1e-5 * from_taylor.abs());
            let printed = reduced_matrix_asymptotic(params(k, b, 0.0), xi).unwrap().s[(0, 1)].re;
            let want = 3.0 * k.powi(3) * eq.w0 * eq.w0 * (7.0 * k2 + 3.0) / (k2 + 1.0).powi(3);
            assert!((printed / (xi * xi) - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn numeric_gram_is_nearly_orthonormal() {
        let prof = solve_profile(params(1.0, 1.0, 0.05), &SolverOptions::default()).unwrap();
        let m = reduced_matrix_numeric(&prof, 0.01, 32).unwrap();
        for i in 0..3 {
            assert!((m.g[(i, i)] - cz(1.0, 0.0)).norm() < 1e-14);
        }
        let off = (m.g - CMatrix3::identity()).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        assert!(off < 0.5);
        assert!(m.g[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn zero_amplitude_is_stable() {
        for k in [0.5, 1.0, 2.0, 3.0] {
            let r = classify(params(k, 1.0, 0.0), 0.01).unwrap();
            assert_eq!(r.verdict, Verdict::Stable);
            assert_eq!(r.growth_rate, 0.0);
        }
    }

    #[test]
    fn classify_rejects_untrusted_input() {
        assert!(classify(params(1.0, 1.0, 0.05), 0.0).is_err());
        assert!(classify(params(1.0, 1.0, 0.5), 0.01).is_err());
    }

    #[test]
    fn leading_terms_at_unit_parameters() {
        let t = discriminant_leading_terms(1.0, 1.0).unwrap();
        let lambda = 4.0 * 64.0 * 25.0 * 10.0 * 2.0 / (3f64.powf(0.75) * 2f64.powf(7.25));
        assert!((t.lambda - lambda).abs() < 1e-12 * lambda);
        assert!((t.lambda - 368.894).abs() < 1e-3);
        let d = 12.0 * 3f64.sqrt() * 256.0 * 100.0 / 2f64.powf(9.5);
        assert!((t.delta0 - d).abs() < 1e-12 * d);
        assert!((t.delta0 * 0.01 - 7.3485).abs() < 1e-4);
        for k in [0.5, 1.0, 1.7, 1.8, 2.5] {
            let t = discriminant_leading_terms(3.0, k).unwrap();
            assert_eq!(t.lambda > 0.0, k * k < 3.0);
        }
    }

    #[test]
    fn csv_layout() {
        let r = classify(params(1.0, 1.0, 0.05), 0.002).unwrap();
        let mut buf = Vec::new();
        write_classification_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CLASSIFICATION_HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 7);
    }
}
