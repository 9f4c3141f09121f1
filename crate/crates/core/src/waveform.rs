//! Equilibria and small-amplitude periodic traveling waves.
//!
//! In the moving frame `z = k(x - ct)` a smooth wave `w(z)` of period 2π solves
//!
//! ```text
//! (c - w²)^{3/2} (w - k² w'') = b,      w² < c,   w - k² w'' > 0.
//! ```
//!
//! Profiles are even in `z` and stored as cosine series. The amplitude `a`
//! is the first cosine coefficient, which fixes both the translation and the
//! scaling freedom of the bifurcating family.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{cosine_eval, cosine_project, cosine_sample, uniform_grid};

/// Default cosine truncation for profiles.
pub const DEFAULT_TRUNCATION: usize = 32;

/// Lower bound on admissible wave speeds: `c > 4·3^{-3/4}·√b`.
pub fn minimal_speed(b: f64) -> f64 {
    4.0 * 3f64.powf(-0.75) * b.sqrt()
}

/// Wavenumber, integration constant and amplitude identifying one wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub k: f64,
    pub b: f64,
    pub a: f64,
}

impl WaveParams {
    pub fn new(k: f64, b: f64, a: f64) -> Result<Self> {
        check_kb(b, k)?;
        if !a.is_finite() {
            return Err(Error::domain(format!("amplitude must be finite, got {a}")));
        }
        Ok(Self { k, b, a })
    }

    pub fn equilibrium(&self) -> Result<Equilibrium> {
        equilibrium(self.b, self.k)
    }

    /// Speed predicted by the small-amplitude expansion, `c0 + a² c2`.
    pub fn speed(&self) -> Result<f64> {
        let eq = self.equilibrium()?;
        let coeffs = expansion_coefficients(self.b, self.k)?;
        Ok(eq.c0 + self.a * self.a * coeffs.c2)
    }

    /// Fails when the speed `c` lies below the smooth-wave existence window.
    pub fn check_existence_window(&self, c: f64) -> Result<()> {
        let c_min = minimal_speed(self.b);
        if c > c_min {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "speed {c} is outside the existence window c > {c_min}"
            )))
        }
    }

    pub fn with_amplitude(&self, a: f64) -> Self {
        Self { a, ..*self }
    }
}

fn check_kb(b: f64, k: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("b must be positive, got {b}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("k must be positive, got {k}")));
    }
    Ok(())
}

/// Constant state `w ≡ w0` at the bifurcation speed `c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub w0: f64,
    pub c0: f64,
}

pub fn equilibrium(b: f64, k: f64) -> Result<Equilibrium> {
    check_kb(b, k)?;
    let ratio = 3.0 / (k * k + 1.0);
    let w0 = b.powf(0.25) * ratio.powf(-0.375);
    let c0 = b.sqrt() * ratio.powf(-0.75) * (k * k + 4.0) / (k * k + 1.0);
    Ok(Equilibrium { w0, c0 })
}

/// Second-order coefficients of the amplitude expansion
/// `w = w0 + a cos z + a²(d1 + d2 cos 2z) + O(a³)`, `c = c0 + a² c2 + O(a⁴)`.
///
/// `d3 = 2 d1 - 5 w0 (k²+4)² / (72 c0)` is the mean of the O(a) correction
/// of the first critical basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoefficients {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub c2: f64,
}

pub fn expansion_coefficients(b: f64, k: f64) -> Result<ExpansionCoefficients> {
    let eq = equilibrium(b, k)?;
    let k2 = k * k;
    let common = (1.0 + k2).powf(0.625) / (3f64.powf(0.625) * b.powf(0.25) * k2);
    let d1 = common * (5.0 * k2 * k2 - 20.0 * k2 - 16.0) / 48.0;
    let d2 = common * (8.0 + 5.0 * k2) / 12.0;
    let c2 = 5.0 / 72.0 * (k2 + 4.0).powi(2);
    let d3 = 2.0 * d1 - 5.0 * eq.w0 / (72.0 * eq.c0) * (k2 + 4.0).powi(2);
    Ok(ExpansionCoefficients { d1, d2, d3, c2 })
}

/// An even 2π-periodic profile `w(z) = Σ_{n=0}^{N} w_n cos(nz)` with its speed.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    pub params: WaveParams,
    pub c: f64,
    pub coeffs: Vec<f64>,
}

impl PeriodicProfile {
    pub fn constant(params: WaveParams, w0: f64, c: f64, truncation: usize) -> Self {
        let mut coeffs = vec![0.0; truncation + 1];
        coeffs[0] = w0;
        Self { params, c, coeffs }
    }

    /// Highest cosine mode `N`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: f64) -> f64 {
        cosine_eval(&self.coeffs, z, 0)
    }

    pub fn derivative(&self, z: f64, order: u32) -> f64 {
        cosine_eval(&self.coeffs, z, order)
    }

    pub fn sample(&self, m: usize, order: u32) -> Vec<f64> {
        cosine_sample(&self.coeffs, m, order)
    }

    /// Same profile re-truncated to `n` modes (zero-padded or cut).
    pub fn with_truncation(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, 0.0);
        Self {
            coeffs,
            ..self.clone()
        }
    }

        /// Document `{k, b, a, c, N, coeffs}` with 17 significant digits per float.
    pub fn to_json(&self) -> Result<String> {
        crate::json::to_string(&ProfileDocument::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDocument = crate::json::from_str(text)?;
        if doc.coeffs.len() != doc.n + 1 {
            return Err(Error::Parse(format!(
                "profile lists {} coefficients but N = {}",
                doc.coeffs.len(),
                doc.n
            )));
        }
        Ok(Self {
            params: WaveParams::new(doc.k, doc.b, doc.a)?,
            c: doc.c,
            coeffs: doc.coeffs,
        })
    }

    /// Largest value of `w² - c` on a grid of `m` points; negative means admissible.
    pub fn speed_margin(&self, m: usize) -> f64 {
        self.sample(m, 0)
            .iter()
            .map(|w| w * w - self.c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest value of `w - k² w''` on a grid of `m` points.
    pub fn momentum_min(&self, m: usize) -> f64 {
        let k2 = self.params.k * self.params.k;
        self.sample(m, 0)
            .iter()
            .zip(self.sample(m, 2))
            .map(|(w, wzz)| w - k2 * wzz)
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks `w² < c` and `w - k² w'' > 0` on a grid of `m` points.
    pub fn check_pointwise(&self, m: usize) -> Result<()> {
        let excess = self.speed_margin(m);
        if excess >= 0.0 {
            return Err(Error::domain(format!("w^2 >= c somewhere (excess {excess:.3e})")));
        }
        let momentum = self.momentum_min(m);
        if momentum <= 0.0 {
            return Err(Error::domain(format!(
                "w - k^2 w'' is not positive (min {momentum:.3e})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileDocument {
    k: f64,
    b: f64,
    a: f64,
    c: f64,
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<f64>,
}

impl From<&PeriodicProfile> for ProfileDocument {
    fn from(p: &PeriodicProfile) -> Self {
        Self {
            k: p.params.k,
            b: p.params.b,
            a: p.params.a,
            c: p.c,
            n: p.truncation(),
            coeffs: p.coeffs.clone(),
        }
    }
}

/// Second-order truncation of the amplitude expansion, zero-padded to
/// [`DEFAULT_TRUNCATION`] modes. Accurate to O(a³) in the profile and O(a⁴) in `c`.
pub fn asymptotic_profile(params: WaveParams) -> Result<PeriodicProfile> {
    asymptotic_profile_with_truncation(params, DEFAULT_TRUNCATION)
}

pub fn asymptotic_profile_with_truncation(
    params: WaveParams,
    truncation: usize,
) -> Result<PeriodicProfile> {
    if truncation < 2 {
        return Err(Error::Dimension(format!(
            "asymptotic profile needs at least 2 modes, got {truncation}"
        )));
    }
    let eq = params.equilibrium()?;
    let ex = expansion_coefficients(params.b, params.k)?;
    let a = params.a;
    let mut coeffs = vec![0.0; truncation + 1];
    coeffs[0] = eq.w0 + a * a * ex.d1;
    coeffs[1] = a;
    coeffs[2] = a * a * ex.d2;
    Ok(PeriodicProfile {
        params,
        c: eq.c0 + a * a * ex.c2,
        coeffs,
    })
}

/// Newton settings for [`solve_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub truncation: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub max_amplitude: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
            tol: 1e-12,
            max_iter: 50,
            max_amplitude: 0.2,
        }
    }
}

impl SolverOptions {
    pub fn with_truncation(truncation: usize) -> Self {
        Self {
            truncation,
            ..Self::default()
        }
    }
}

/// Pointwise data of `F(w) = (c - w²)^{3/2}(w - k²w'') - b` and its partial derivatives.
struct Collocation {
    residual: Vec<f64>,
    /// dF/dw at fixed w'' (multiplies the perturbation itself)
    dw: Vec<f64>,
    /// dF/dw'' (multiplies the second derivative of the perturbation)
    dwzz: Vec<f64>,
    /// dF/dc
    dc: Vec<f64>,
    /// max over the grid of w² - c
    excess: f64,
}

fn collocate(coeffs: &[f64], c: f64, k: f64, b: f64, m: usize) -> Collocation {
    let k2 = k * k;
    let w = cosine_sample(coeffs, m, 0);
    let wzz = cosine_sample(coeffs, m, 2);
    let mut out = Collocation {
        residual: Vec::with_capacity(m),
        dw: Vec::with_capacity(m),
        dwzz: Vec::with_capacity(m),
        dc: Vec::with_capacity(m),
        excess: f64::NEG_INFINITY,
    };
    for (&w, &wzz) in w.iter().zip(&wzz) {
        let gap = c - w * w;
        out.excess = out.excess.max(-gap);
        let root = gap.max(0.0).sqrt();
        let momentum = w - k2 * wzz;
        out.residual.push(gap.max(0.0) * root * momentum - b);
        out.dw.push(-3.0 * w * root * momentum + gap * root);
        out.dwzz.push(-k2 * gap * root);
        out.dc.push(1.5 * root * momentum);
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Square Newton Jacobian for the unknowns `(w_0, w_2, ..., w_N, c)`, `w_1` held fixed.
///
/// Rows are the cosine projections of the linearized residual onto modes `0..=N`.
fn jacobian(col: &Collocation, n_modes: usize) -> DMatrix<f64> {
    let m = col.residual.len();
    let grid = uniform_grid(m);
    let mut jac = DMatrix::zeros(n_modes + 1, n_modes + 1);
    let mut column = vec![0.0; m];
    let mut unknown = 0;
    for n in 0..=n_modes {
        if n == 1 {
            continue;
        }
        let nf = n as f64;
        for (j, z) in grid.iter().enumerate() {
            let cz = (nf * z).cos();
            column[j] = col.dw[j] * cz - col.dwzz[j] * nf * nf * cz;
        }
        let proj = cosine_project(&column, n_modes);
        jac.column_mut(unknown).copy_from_slice(&proj);
        unknown += 1;
    }
    let proj = cosine_project(&col.dc, n_modes);
    jac.column_mut(n_modes).copy_from_slice(&proj);
    jac
}

/// Projected linearization with respect to `w_1` (the amplitude direction).
fn amplitude_column(col: &Collocation, n_modes: usize) -> DVector<f64> {
    let grid = uniform_grid(col.residual.len());
    let column: Vec<f64> = grid
        .iter()
        .enumerate()
        .map(|(j, z)| (col.dw[j] - col.dwzz[j]) * z.cos())
        .collect();
    DVector::from_vec(cosine_project(&column, n_modes))
}

/// Solves the profile equation by Newton's method on cosine coefficients.
///
/// Unknowns are `w_0, w_2..w_N` and `c`; `w_1 = a` closes the system. The
/// residual is collocated on `4N` points and projected onto modes `0..=N`.
/// `a = 0` returns the equilibrium directly: the Jacobian is singular there
/// because `cos z` spans the kernel of the linearization.
pub fn solve_profile(params: WaveParams, opts: &SolverOptions) -> Result<PeriodicProfile> {
    let n_modes = opts.truncation;
    if n_modes < 8 {
        return Err(Error::Dimension(format!(
            "truncation must be at least 8, got {n_modes}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if params.a.abs() > opts.max_amplitude {
        return Err(Error::domain(format!(
            "|a| = {} exceeds the configured bound {}",
            params.a.abs(),
            opts.max_amplitude
        )));
    }
    let eq = params.equilibrium()?;
    if params.a == 0.0 {
        return Ok(PeriodicProfile::constant(params, eq.w0, eq.c0, n_modes));
    }

    let guess = asymptotic_profile_with_truncation(params, n_modes)?;
    let mut coeffs = guess.coeffs;
    let mut c = guess.c;
    let m = 4 * n_modes;
    let (k, b) = (params.k, params.b);

    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let col = collocate(&coeffs, c, k, b, m);
        if col.excess >= 0.0 {
            return Err(Error::DomainExit { excess: col.excess });
        }
        residual = max_abs(&col.residual);
        if residual < opts.tol {
            let profile = PeriodicProfile { params, c, coeffs };
            profile.check_pointwise(8 * n_modes)?;
            return Ok(profile);
        }
        let rhs = -DVector::from_vec(cosine_project(&col.residual, n_modes));
        let step = jacobian(&col, n_modes)
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("profile Newton Jacobian".into()))?;
        let mut unknown = 0;
        for (n, w) in coeffs.iter_mut().enumerate() {
            if n == 1 {
                continue;
            }
            *w += step[unknown];
            unknown += 1;
        }
        c += step[n_modes];
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Derivatives of a solved profile and its speed with respect to `a` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDerivatives {
    pub w_a: Vec<f64>,
    pub w_b: Vec<f64>,
    pub c_a: f64,
    pub c_b: f64,
}

/// Implicit differentiation of the Newton system at a solved profile.
///
/// Along the family, `w_1 = a` so `∂_a w_1 = 1` and `∂_b w_1 = 0`; the
/// remaining unknowns follow from one linear solve each. At `a = 0` the
/// system is singular and the closed-form limits are returned instead.
pub fn parameter_derivatives(p: &PeriodicProfile) -> Result<ParameterDerivatives> {
    let n_modes = p.truncation();
    let WaveParams { k, b, a } = p.params;
    if a == 0.0 {
        let eq = equilibrium(b, k)?;
        let mut w_a = vec![0.0; n_modes + 1];
        w_a[1] = 1.0;
        let mut w_b = vec![0.0; n_modes + 1];
        w_b[0] = eq.w0 / (4.0 * b);
        return Ok(ParameterDerivatives {
            w_a,
            w_b,
            c_a: 0.0,
            c_b: eq.c0 / (2.0 * b),
        });
    }
    let col = collocate(&p.coeffs, p.c, k, b, 4 * n_modes);
    if col.excess >= 0.0 {
        return Err(Error::DomainExit { excess: col.excess });
    }
    let lu = jacobian(&col, n_modes).lu();
    let rhs_a = -amplitude_column(&col, n_modes);
    // dF/db = -1, whose projection is -e_0
    let mut rhs_b = DVector::zeros(n_modes + 1);
    rhs_b[0] = 1.0;
    let da = lu
        .solve(&rhs_a)
        .ok_or_else(|| Error::Singular("amplitude sensitivity".into()))?;
    let db = lu
        .solve(&rhs_b)
        .ok_or_else(|| Error::Singular("b sensitivity".into()))?;
    let unpack = |x: &DVector<f64>, first: f64| {
        let mut out = vec![0.0; n_modes + 1];
        let mut unknown = 0;
        for (n, slot) in out.iter_mut().enumerate() {
            if n == 1 {
                *slot = first;
            } else {
                *slot = x[unknown];
                unknown += 1;
            }
        }
        out
    };
    Ok(ParameterDerivatives {
        w_a: unpack(&da, 1.0),
        w_b: unpack(&db, 0.0),
        c_a: da[n_modes],
        c_b: db[n_modes],
    })
}

/// Max-norm residuals of the integrated and differentiated profile equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileResidual {
    /// `(c - w²)^{3/2}(w - k²w'') - b`
    pub integrated: f64,
    /// `-cw' + ck²w''' + 4w²w' - 3k²ww'w'' - k²w²w'''`
    pub differential: f64,
}

pub fn profile_residual(p: &PeriodicProfile) -> Result<ProfileResidual> {
    let m = (8 * p.truncation()).max(64);
    let excess = p.speed_margin(m);
    if excess >= 0.0 {
        return Err(Error::domain(format!("w^2 >= c on the grid (excess {excess:.3e})")));
    }
    let WaveParams { k, b, .. } = p.params;
    let (k2, c) = (k * k, p.c);
    let w = p.sample(m, 0);
    let wz = p.sample(m, 1);
    let wzz = p.sample(m, 2);
    let wzzz = p.sample(m, 3);
    let mut integrated = 0.0f64;
    let mut differential = 0.0f64;
    for j in 0..m {
        let f = (c - w[j] * w[j]).powf(1.5) * (w[j] - k2 * wzz[j]) - b;
        let g = -c * wz[j] + c * k2 * wzzz[j] + 4.0 * w[j] * w[j] * wz[j]
            - 3.0 * k2 * w[j] * wz[j] * wzz[j]
            - k2 * w[j] * w[j] * wzzz[j];
        integrated = integrated.max(f.abs());
        differential = differential.max(g.abs());
    }
    Ok(ProfileResidual {
        integrated,
        differential,
    })
}

/// Effective potential `V(φ; b, c) = bφ / (c√(c - φ²)) - φ²/2`.
pub fn potential(phi: f64, b: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) || phi * phi >= c {
        return Err(Error::domain(format!(
            "potential needs phi^2 < c, got phi = {phi}, c = {c}"
        )));
    }
    Ok(b * phi / (c * (c - phi * phi).sqrt()) - 0.5 * phi * phi)
}

/// Max deviation of a profile from the first integral
/// `½(w_x)² = E + w²/2 - bw/(c√(c - w²))`, with `w_x = k w_z`.
///
/// The orbit constant `E` is read off at the grid maximum of `w`, where `w_z = 0`.
pub fn quadrature_check(p: &PeriodicProfile) -> Result<f64> {
    let m = (8 * p.truncation()).max(64);
    let WaveParams { k, b, .. } = p.params;
    let w = p.sample(m, 0);
    let wz = p.sample(m, 1);
    let energy = |j: usize| -> Result<f64> {
        let slope = k * wz[j];
        Ok(0.5 * slope * slope + potential(w[j], b, p.c)?)
    };
    let top = (0..m)
        .max_by(|&i, &j| w[i].total_cmp(&w[j]))
        .unwrap_or(0);
    let e = energy(top)?;
    let mut worst = 0.0f64;
    for j in 0..m {
        worst = worst.max((energy(j)? - e).abs());
    }
    Ok(worst)
}
