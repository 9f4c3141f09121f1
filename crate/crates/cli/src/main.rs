use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use novikov::bloch::{spectrum_slice, spectrum_sweep, SpectrumSlice};
use novikov::modulation::{
    classify, classify_numeric, export_classification_csv, export_classification_json,
    ModulationResult,
};
use novikov::sweep::export::{export_map, export_slices, Format};
use novikov::sweep::{run_scan, threshold_locate, Mode, ScanConfig, XiRule};
use novikov::verify::run_identity_suite;
use novikov::waveform::{asymptotic_profile_with_truncation, profile_residual};
use novikov::{solve_profile, PeriodicProfile, SolverOptions, WaveParams};

/// Small-amplitude periodic waves of the Novikov equation and their
/// modulational stability.
#[derive(Parser, Debug)]
#[command(name = "novikov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args, Debug)]
struct Shared {
    /// integration constant of the profile equation
    #[arg(long, global = true, default_value_t = 1.0)]
    b: f64,
    /// wavenumber
    #[arg(long, global = true)]
    k: Option<f64>,
    /// amplitude (first cosine coefficient)
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Bloch frequency
    #[arg(long, global = true, allow_hyphen_values = true)]
    xi: Option<f64>,
    /// Fourier truncation of profile and Hill matrix
    #[arg(long = "N", global = true, default_value_t = 32)]
    n: usize,
    #[arg(long, global = true, default_value = "both", value_parser = parse_mode)]
    mode: Mode,
    /// artifact path; `.json` selects JSON, anything else CSV
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Newton tolerance for the profile solver
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// scan configuration (TOML or JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for a traveling-wave profile
    Profile,
    /// Bloch spectrum at one xi, or a sweep of xi over [-1/2, 1/2)
    Spectrum {
        /// number of evenly spaced xi values; replaces --xi
        #[arg(long)]
        sweep: Option<usize>,
        /// eigenvalues nearest the origin to print
        #[arg(long, default_value_t = 7)]
        show: usize,
    },
    /// Modulational stability verdict at (k, a, xi)
    Classify,
    /// Critical wavenumber where the verdict changes sign
    Threshold {
        #[arg(long, default_value_t = 1.5)]
        lo: f64,
        #[arg(long, default_value_t = 2.0)]
        hi: f64,
        /// xi = factor * |a| when --xi is not given
        #[arg(long, default_value_t = 0.1)]
        xi_factor: f64,
    },
    /// Stability map over a (k, a) grid read from --config
    Scan,
    /// Built-in identity suite
    Verify,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: novikov::Error| e.to_string())
}

fn usage(kind: ErrorKind, msg: &str) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn require(v: Option<f64>, flag: &str) -> f64 {
    v.unwrap_or_else(|| usage(ErrorKind::MissingRequiredArgument, &format!("{flag} is required")))
}

fn configure_threads() -> novikov::Result<()> {
    let Ok(raw) = std::env::var("NOVIKOV_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| novikov::Error::Config(format!("NOVIKOV_THREADS={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| novikov::Error::Config(e.to_string()))
}

fn build_profile(s: &Shared, params: WaveParams) -> novikov::Result<PeriodicProfile> {
    if s.mode == Mode::Asymptotic {
        asymptotic_profile_with_truncation(params, s.n)
    } else {
        let opts = SolverOptions {
            tol: s.tol,
            ..SolverOptions::with_truncation(s.n)
        };
        solve_profile(params, &opts)
    }
}

fn params(s: &Shared) -> novikov::Result<WaveParams> {
    WaveParams::new(require(s.k, "--k"), s.b, s.a.unwrap_or(0.0))
}

fn cmd_profile(s: &Shared) -> novikov::Result<bool> {
    let p = build_profile(s, params(s)?)?;
    let res = profile_residual(&p)?;
    let eq = p.params.equilibrium()?;
    println!("k = {}  b = {}  a = {}  N = {}", p.params.k, p.params.b, p.params.a, p.truncation());
    println!("w0 = {:.15}  c0 = {:.15}", eq.w0, eq.c0);
    println!("c = {:.15}", p.c);
    println!("mean = {:.15}", p.coeffs[0]);
    for (n, w) in p.coeffs.iter().enumerate().skip(1).take(4) {
        println!("w_{n} = {w:.6e}");
    }
    println!("residual = {:.3e}", res.integrated);
    if let Some(out) = &s.out {
        write_text(out, &p.to_json()?)?;
    }
    Ok(true)
}

fn write_text(path: &Path, text: &str) -> novikov::Result<()> {
    std::fs::write(path, text).map_err(|e| novikov::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_slice(slice: &SpectrumSlice, show: usize) {
    println!("xi = {}  max Re = {:.3e}", slice.xi, slice.max_real());
    for z in slice.nearest_origin(show) {
        println!("  {:+.12e} {:+.12e}i", z.re, z.im);
    }
}

fn cmd_spectrum(s: &Shared, sweep: Option<usize>, show: usize) -> novikov::Result<bool> {
    let p = build_profile(s, params(s)?)?;
    let slices = match sweep {
        Some(0) => usage(ErrorKind::InvalidValue, "--sweep needs at least one point"),
        Some(count) => {
            let grid: Vec<f64> = (0..count).map(|j| -0.5 + j as f64 / count as f64).collect();
            spectrum_sweep(&p, &grid, s.n)?
        }
        None => vec![spectrum_slice(&p, s.xi.unwrap_or(0.0), s.n)?],
    };
    for slice in &slices {
        print_slice(slice, show);
    }
    if let Some(out) = &s.out {
        export_slices(&slices, out, Format::from_path(out))?;
    }
    Ok(true)
}

fn print_result(label: &str, r: &ModulationResult) {
    println!("{label}: {}", r.verdict);
    println!("  delta = {:.6e}", r.delta);
    println!("  growth rate = {:.6e}", r.growth_rate);
    println!("  q = [{:.6e}, {:.6e}, {:.6e}, {:.6e}]", r.q.q0, r.q.q1, r.q.q2, r.q.q3);
}

fn cmd_classify(s: &Shared) -> novikov::Result<bool> {
    let xi = require(s.xi, "--xi");
    let p = WaveParams::new(require(s.k, "--k"), s.b, require(s.a, "--a"))?;
    let mut results = Vec::new();
    if s.mode.asymptotic() {
        let r = classify(p, xi)?;
        print_result("asymptotic", &r);
        results.push(r);
    }
    if s.mode.numeric() {
        let prof = build_profile(s, p)?;
        let r = classify_numeric(&prof, xi, s.n)?;
        print_result("numeric", &r);
        results.push(r);
    }
    if let Some(out) = &s.out {
        match Format::from_path(out) {
            Format::Json if results.len() == 1 => export_classification_json(&results[0], out)?,
            Format::Json => write_text(out, &novikov::json::to_string(&results)?)?,
            Format::Csv => export_classification_csv(&results, out)?,
        }
    }
    Ok(true)
}

fn cmd_threshold(s: &Shared, lo: f64, hi: f64, factor: f64) -> novikov::Result<bool> {
    let a = s.a.unwrap_or(0.02);
    let rule = match s.xi {
        Some(value) => XiRule::Fixed { value },
        None => XiRule::Proportional { factor },
    };
    let k_star = threshold_locate(s.b, a, rule, (lo, hi))?;
    println!("k* = {k_star:.6}  (b = {}, a = {a}, xi = {})", s.b, rule.xi(a));
    println!("k*^2 = {:.6}", k_star * k_star);
    Ok(true)
}

fn cmd_scan(s: &Shared) -> novikov::Result<bool> {
    let path = s
        .config
        .as_deref()
        .unwrap_or_else(|| usage(ErrorKind::MissingRequiredArgument, "scan needs --config"));
    let mut cfg = ScanConfig::load(path)?;
    if s.out.is_some() {
        cfg.output = s.out.clone();
    }
    let map = run_scan(&cfg)?;
    let failed = map.rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} points, {failed} failed (b = {}, mode = {}, N = {})", map.rows.len(), map.b, map.mode, map.n);
    for r in &map.rows {
        let verdict = r.verdict.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        match &r.error {
            Some(e) => println!("k = {:.6}  a = {:<8} error: {e}", r.k, r.a),
            None => println!("k = {:.6}  a = {:<8} {verdict}", r.k, r.a),
        }
    }
    for a in &cfg.a_list {
        for (k1, k2) in map.transitions(*a) {
            println!("a = {a}: verdict changes between k = {k1:.6} and k = {k2:.6}");
        }
    }
    if let Some(out) = &cfg.output {
        export_map(&map, out, Format::from_path(out))?;
    }
    Ok(failed == 0)
}

fn cmd_verify() -> novikov::Result<bool> {
    let checks = run_identity_suite()?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(failed == 0)
}

fn run(cli: Cli) -> novikov::Result<bool> {
    configure_threads()?;
    let s = &cli.shared;
    if s.n < 8 {
        usage(ErrorKind::InvalidValue, "--N must be at least 8");
    }
    if !(s.tol > 0.0) {
        usage(ErrorKind::InvalidValue, "--tol must be positive");
    }
    match cli.command {
        Command::Profile => cmd_profile(s),
        Command::Spectrum { sweep, show } => cmd_spectrum(s, sweep, show),
        Command::Classify => cmd_classify(s),
        Command::Threshold { lo, hi, xi_factor } => cmd_threshold(s, lo, hi, xi_factor),
        Command::Scan => cmd_scan(s),
        Command::Verify => cmd_verify(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
