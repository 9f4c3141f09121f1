//! Parameter scans, threshold location and their file formats.

mod config;
pub mod export;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{KGrid, Mode, ScanConfig, XiRule};

use crate::bloch::spectrum_slice;
use crate::error::{Error, Result};
use crate::modulation::{
    classify, classify_numeric, cubic_coefficients, discriminant, reduced_matrix_asymptotic,
    Verdict,
};
use crate::waveform::{solve_profile, SolverOptions, WaveParams};

/// One `(k, a)` point of a scan. Numeric fields are absent when the
/// corresponding pipeline was not run or failed; `error` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: f64,
    pub a: f64,
    pub xi: f64,
    /// discriminant of the closed-form cubic (numeric cubic in numeric mode)
    pub delta: Option<f64>,
    pub verdict: Option<Verdict>,
    pub growth_rate_predicted: Option<f64>,
    /// discriminant of the Galerkin cubic, in `both` mode
    pub numeric_delta: Option<f64>,
    pub numeric_verdict: Option<Verdict>,
    /// max Re λ over the three Hill eigenvalues nearest the origin
    pub growth_rate_hill: Option<f64>,
    pub error: Option<String>,
}

impl ScanRow {
    fn empty(k: f64, a: f64, xi: f64) -> Self {
        Self {
            k,
            a,
            xi,
            delta: None,
            verdict: None,
            growth_rate_predicted: None,
            numeric_delta: None,
            numeric_verdict: None,
            growth_rate_hill: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMap {
    pub b: f64,
    pub mode: Mode,
    #[serde(rename = "N")]
    pub n: usize,
    pub rows: Vec<ScanRow>,
}

impl StabilityMap {
    /// Neighbouring `(k, k')` pairs between which the verdict changes,
    /// among rows with amplitude `a` that carry a verdict.
    pub fn transitions(&self, a: f64) -> Vec<(f64, f64)> {
        let rows: Vec<&ScanRow> = self
            .rows
            .iter()
            .filter(|r| r.a == a && r.verdict.is_some())
            .collect();
        rows.windows(2)
            .filter(|w| w[0].verdict != w[1].verdict)
            .map(|w| (w[0].k, w[1].k))
            .collect()
    }
}

fn scan_point(cfg: &ScanConfig, k: f64, a: f64) -> ScanRow {
    let xi = cfg.xi_rule.xi(a);
    let mut row = ScanRow::empty(k, a, xi);
    if let Err(e) = fill_row(cfg, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn fill_row(cfg: &ScanConfig, row: &mut ScanRow) -> Result<()> {
    let params = WaveParams::new(row.k, cfg.b, row.a)?;
    if cfg.mode.asymptotic() {
        let r = classify(params, row.xi)?;
        row.delta = Some(r.delta);
        row.verdict = Some(r.verdict);
        row.growth_rate_predicted = Some(r.growth_rate);
    }
    if cfg.mode.numeric() {
        let profile = solve_profile(params, &SolverOptions::with_truncation(cfg.n))?;
        let r = classify_numeric(&profile, row.xi, cfg.n)?;
        if cfg.mode == Mode::Numeric {
            row.delta = Some(r.delta);
            row.verdict = Some(r.verdict);
            row.growth_rate_predicted = Some(r.growth_rate);
        } else {
            row.numeric_delta = Some(r.delta);
            row.numeric_verdict = Some(r.verdict);
        }
        let slice = spectrum_slice(&profile, row.xi, cfg.n)?;
        let growth = slice
            .nearest_origin(3)
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        row.growth_rate_hill = Some(growth);
    }
    Ok(())
}

/// Runs every `(k, a)` point of the grid, `k` outermost, in parallel.
///
/// Failures at single points are recorded in the row and do not stop the scan.
pub fn run_scan(cfg: &ScanConfig) -> Result<StabilityMap> {
    cfg.validate()?;
    let points: Vec<(f64, f64)> = cfg
        .k_grid
        .values()
        .into_iter()
        .flat_map(|k| cfg.a_list.iter().map(move |&a| (k, a)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(k, a)| scan_point(cfg, k, a))
        .collect();
    Ok(StabilityMap {
        b: cfg.b,
        mode: cfg.mode,
        n: cfg.n,
        rows,
    })
}

/// Closed-form discriminant `Δ(a, ξ; b, k)`.
pub fn asymptotic_delta(b: f64, k: f64, a: f64, xi: f64) -> Result<f64> {
    let m = reduced_matrix_asymptotic(WaveParams::new(k, b, a)?, xi)?;
    discriminant(&cubic_coefficients(&m)?)
}

/// Width at which [`threshold_locate`] stops bisecting.
pub const THRESHOLD_WIDTH: f64 = 1e-4;

/// Bisects the sign change of the closed-form `Δ(a, ξ(a); b, k)` in `k`.
pub fn threshold_locate(b: f64, a: f64, xi_rule: XiRule, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::domain(format!("bracket [{lo}, {hi}] is not an ordered positive interval")));
    }
    let xi = xi_rule.xi(a);
    let f = |k: f64| asymptotic_delta(b, k, a, xi);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracketing { lo, hi });
    }
    let lo_sign = f_lo.signum();
    while hi - lo > THRESHOLD_WIDTH {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
