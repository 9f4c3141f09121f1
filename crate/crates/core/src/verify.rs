//! Built-in identity suite: closed forms checked against the numerical pipeline.

use std::fmt;

use num_complex::Complex64;

use crate::bloch::{constant_state_eigenvalue, spectrum_slice, DEFAULT_HILL_TRUNCATION};
use crate::error::Result;
use crate::linalg::{eigenvalues, multiset_distance, CMatrix};
use crate::modulation::{
    cubic_coefficients, discriminant, discriminant_leading_terms, reduced_matrix_asymptotic,
};
use crate::waveform::{asymptotic_profile_with_truncation, equilibrium, WaveParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// worst observed error and the tolerance it was held to
    pub error: f64,
    pub tol: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<44} error {:.3e} (tol {:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.error,
            self.tol
        )
    }
}

fn check(name: impl Into<String>, error: f64, tol: f64) -> Check {
    Check {
        name: name.into(),
        passed: error <= tol,
        error,
        tol,
    }
}

fn rel(x: f64, want: f64) -> f64 {
    (x - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

const PAIRS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0)];

fn equilibrium_relations() -> Result<Vec<Check>> {
    let mut quartic = 0.0f64;
    let mut speed = 0.0f64;
    let mut alpha = 0.0f64;
    for (b, k) in PAIRS {
        let eq = equilibrium(b, k)?;
        let k2 = k * k;
        let w2 = eq.w0 * eq.w0;
        quartic = quartic.max(rel((eq.c0 - w2).powf(1.5) * eq.w0, b));
        speed = speed.max(rel(eq.c0, (k2 + 4.0) / (k2 + 1.0) * w2));
        alpha = alpha.max(rel(eq.c0 - 4.0 * w2, -3.0 * k2 * w2 / (k2 + 1.0)));
    }
    Ok(vec![
        check("equilibrium: (c0-w0^2)^(3/2) w0 = b", quartic, 1e-12),
        check("equilibrium: c0 = (k^2+4)/(k^2+1) w0^2", speed, 1e-12),
        check("equilibrium: c0-4w0^2 = -3k^2w0^2/(k^2+1)", alpha, 1e-12),
    ])
}

fn dispersion_exactness() -> Result<Check> {
    let n = DEFAULT_HILL_TRUNCATION;
    let mut worst = 0.0f64;
    for (b, k) in PAIRS {
        let prof = asymptotic_profile_with_truncation(WaveParams::new(k, b, 0.0)?, n)?;
        for xi in [0.0, 0.1, 0.49] {
            let slice = spectrum_slice(&prof, xi, n)?;
            let want = (-(n as i64)..=n as i64)
                .map(|m| constant_state_eigenvalue(m, xi, b, k))
                .collect::<Result<Vec<_>>>()?;
            let scale = want.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
            worst = worst.max(multiset_distance(&slice.eigenvalues, &want) / scale);
        }
    }
    Ok(check("a=0 Hill spectrum = i*Omega_n", worst, 1e-12))
}

/// The odd part `(S(ξ) - S(-ξ))/2ξ` of the zero-amplitude reduced matrix is the
/// first-order term; its eigenvalues are the ξ-slopes of `iΩ_{n,ξ}`, `n = -1, 0, 1`.
fn first_order_dispersion() -> Result<Check> {
    let mut worst = 0.0f64;
    for (b, k) in PAIRS {
        let eq = equilibrium(b, k)?;
        let k2 = k * k;
        let xi = 1e-3;
        let p = WaveParams::new(k, b, 0.0)?;
        let plus = reduced_matrix_asymptotic(p, xi)?.s;
        let minus = reduced_matrix_asymptotic(p, -xi)?.s;
        let odd = (plus - minus) / Complex64::new(2.0 * xi, 0.0);
        let ev = eigenvalues(&CMatrix::from_fn(3, 3, |i, j| odd[(i, j)]))?;
        let outer = 6.0 * k.powi(3) * eq.w0 * eq.w0 / ((k2 + 1.0) * (k2 + 1.0));
        let middle = -3.0 * k.powi(3) * eq.w0 * eq.w0 / (k2 + 1.0);
        let want = [outer, outer, middle].map(|s| Complex64::new(0.0, s));
        worst = worst.max(multiset_distance(&ev, &want) / outer.abs().max(middle.abs()));
    }
    Ok(check("a=0 reduced roots = d/dxi of i*Omega_{-1,0,1}", worst, 1e-10))
}

fn delta_closed_form() -> Result<Check> {
    let mut worst = 0.0f64;
    for (b, k) in PAIRS {
        let t = discriminant_leading_terms(b, k)?;
        for xi in [0.05, 0.1] {
            let m = reduced_matrix_asymptotic(WaveParams::new(k, b, 0.0)?, xi)?;
            let delta = discriminant(&cubic_coefficients(&m)?)?;
            worst = worst.max(rel(delta, t.delta0 * xi * xi));
        }
    }
    Ok(check("Delta(0,xi) pipeline vs closed form", worst, 1e-8))
}

fn lambda_closed_form() -> Result<Check> {
    let (a, xi) = (1e-3, 1e-3);
    let mut worst = 0.0f64;
    for (b, k) in PAIRS {
        let delta = |a: f64| -> Result<f64> {
            discriminant(&cubic_coefficients(&reduced_matrix_asymptotic(
                WaveParams::new(k, b, a)?,
                xi,
            )?)?)
        };
        let fit = (delta(a)? - delta(0.0)?) / (a * a);
        worst = worst.max(rel(fit, discriminant_leading_terms(b, k)?.lambda));
    }
    Ok(check("Lambda finite-difference fit vs closed form", worst, 1e-2))
}

/// Runs every check. Errors are numerical failures of the pipeline itself,
/// not failed comparisons.
pub fn run_identity_suite() -> Result<Vec<Check>> {
    let mut out = equilibrium_relations()?;
    out.push(dispersion_exactness()?);
    out.push(first_order_dispersion()?);
    out.push(delta_closed_form()?);
    out.push(lambda_closed_form()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_runs_and_reports_every_check() {
        let checks = run_identity_suite().unwrap();
        assert_eq!(checks.len(), 7);
        for c in &checks[..5] {
            assert!(c.passed, "{c}");
        }
        assert!(checks.iter().all(|c| c.error.is_finite()));
    }
}
