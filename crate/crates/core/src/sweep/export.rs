//! Byte-stable CSV and JSON files for stability maps and spectrum sweeps.
//!
//! Floats are written with 17 significant digits and lines end in LF, so
//! identical inputs always produce identical files.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Mode, ScanRow, StabilityMap};
use crate::bloch::{write_spectrum_csv, SpectrumSlice};
use crate::error::{Error, Result};
use crate::modulation::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension() {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

pub const MAP_HEADER: [&str; 11] = [
    "k",
    "b",
    "a",
    "xi",
    "delta",
    "verdict",
    "growth_rate_predicted",
    "numeric_delta",
    "numeric_verdict",
    "growth_rate_hill",
    "error",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn opt_verdict(v: Option<Verdict>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// CSV text of a map: header [`MAP_HEADER`], one row per grid point.
/// The scan's `b` is repeated on every row; mode and `N` are not recorded.
pub fn map_to_csv(map: &StabilityMap) -> Result<String> {
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(MAP_HEADER).map_err(csv_err)?;
        for r in &map.rows {
            w.write_record([
                num(r.k),
                num(map.b),
                num(r.a),
                num(r.xi),
                opt_num(r.delta),
                opt_verdict(r.verdict),
                opt_num(r.growth_rate_predicted),
                opt_num(r.numeric_delta),
                opt_verdict(r.numeric_verdict),
                opt_num(r.growth_rate_hill),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    }
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_num(field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {field:?}")))
}

fn parse_opt<T>(field: &str, f: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        f(field).map(Some)
    }
}

/// Reads a map written by [`map_to_csv`]; `mode` and `n` are supplied by the caller.
pub fn map_from_csv(text: &str, mode: Mode, n: usize) -> Result<StabilityMap> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(MAP_HEADER) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    let mut b = None;
    for record in reader.records() {
        let rec = record.map_err(csv_err)?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let row_b = parse_num(f(1))?;
        if b.is_some_and(|b| b != row_b) {
            return Err(Error::Parse("rows disagree on b".into()));
        }
        b = Some(row_b);
        rows.push(ScanRow {
            k: parse_num(f(0))?,
            a: parse_num(f(2))?,
            xi: parse_num(f(3))?,
            delta: parse_opt(f(4), parse_num)?,
            verdict: parse_opt(f(5), str::parse)?,
            growth_rate_predicted: parse_opt(f(6), parse_num)?,
            numeric_delta: parse_opt(f(7), parse_num)?,
            numeric_verdict: parse_opt(f(8), str::parse)?,
            growth_rate_hill: parse_opt(f(9), parse_num)?,
            error: parse_opt(f(10), |s| Ok(s.to_string()))?,
        });
    }
    Ok(StabilityMap {
        b: b.unwrap_or(1.0),
        mode,
        n,
        rows,
    })
}

pub fn map_to_json(map: &StabilityMap) -> Result<String> {
    crate::json::to_string(map)
}

pub fn map_from_json(text: &str) -> Result<StabilityMap> {
    crate::json::from_str(text)
}

fn write(path: &Path, text: &[u8]) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn export_map(map: &StabilityMap, path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => map_to_csv(map)?,
        Format::Json => map_to_json(map)?,
    };
    write(path, text.as_bytes())
}

/// Reads a map in either format. CSV files do not record mode and `N`;
/// they come back as `both` and the default truncation.
pub fn import_map(path: &Path) -> Result<StabilityMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match Format::from_path(path) {
        Format::Json => map_from_json(&text),
        Format::Csv => map_from_csv(&text, Mode::Both, crate::bloch::DEFAULT_HILL_TRUNCATION),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SliceDocument {
    xi: f64,
    /// `[re, im]` pairs
    eigenvalues: Vec<[f64; 2]>,
}

pub fn slices_to_json(slices: &[SpectrumSlice]) -> Result<String> {
    let docs: Vec<SliceDocument> = slices
        .iter()
        .map(|s| SliceDocument {
            xi: s.xi,
            eigenvalues: s.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
        })
        .collect();
    crate::json::to_string(&docs)
}

pub fn slices_from_json(text: &str) -> Result<Vec<SpectrumSlice>> {
    let docs: Vec<SliceDocument> = crate::json::from_str(text)?;
    Ok(docs
        .into_iter()
        .map(|d| SpectrumSlice {
            xi: d.xi,
            eigenvalues: d.eigenvalues.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        })
        .collect())
}

pub fn export_slices(slices: &[SpectrumSlice], path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_spectrum_csv(slices, &mut buf).map_err(|e| Error::io(path, e))?;
            buf
        }
        Format::Json => slices_to_json(slices)?.into_bytes(),
    };
    write(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_map() -> StabilityMap {
        StabilityMap {
            b: 1.0,
            mode: Mode::Both,
            n: 32,
            rows: vec![
                ScanRow {
                    k: 1.0,
                    a: 0.02,
                    xi: 0.002,
                    delta: Some(3.25),
                    verdict: Some(Verdict::Stable),
                    growth_rate_predicted: Some(0.0),
                    numeric_delta: Some(0.1 + 0.2),
                    numeric_verdict: Some(Verdict::Stable),
                    growth_rate_hill: Some(-1.5e-17),
                    error: None,
                },
                ScanRow {
                    k: 1.7,
                    a: 0.3,
                    xi: 0.03,
                    delta: None,
                    verdict: None,
                    growth_rate_predicted: None,
                    numeric_delta: None,
                    numeric_verdict: None,
                    growth_rate_hill: None,
                    error: Some("domain error: |a| = 0.3, \"quoted\"\nsecond line".into()),
                },
            ],
        }
    }

    #[test]
    fn empty_map_is_header_only() {
        let map = StabilityMap { rows: vec![], ..sample_map() };
        assert_eq!(map_to_csv(&map).unwrap(), format!("{}\n", MAP_HEADER.join(",")));
    }

    #[test]
    fn csv_round_trip() {
        let map = sample_map();
        let text = map_to_csv(&map).unwrap();
        assert!(!text.contains('\r'));
        assert_eq!(map_from_csv(&text, Mode::Both, 32).unwrap(), map);
    }

    #[test]
    fn json_round_trip() {
        let map = sample_map();
        let text = map_to_json(&map).unwrap();
        assert_eq!(map_from_json(&text).unwrap(), map);
        assert_eq!(map_to_json(&map_from_json(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn slices_round_trip() {
        let slices = vec![SpectrumSlice::new(
            0.01,
            vec![Complex64::new(0.0, 1.0 / 3.0), Complex64::new(1e-9, -2.0)],
        )];
        let back = slices_from_json(&slices_to_json(&slices).unwrap()).unwrap();
        assert_eq!(back, slices);
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::from_path(Path::new("x.JSON")), Format::Json);
        assert_eq!(Format::from_path(Path::new("x.csv")), Format::Csv);
        assert_eq!(Format::from_path(Path::new("x")), Format::Csv);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let missing = Path::new("/nonexistent-dir/map.csv");
        let err = export_map(&sample_map(), missing, Format::Csv).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/map.csv"));
    }
}
