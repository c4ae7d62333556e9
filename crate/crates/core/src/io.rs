//! CSV import/export of series and grids.
//!
//! All numeric output uses the shortest decimal representation that round
//! trips to the same `f64`, so repeated runs of identical configurations
//! produce byte-identical files.

use std::fmt::Write as _;

use crate::field::{FourierField, GridField};
use crate::series::{SineSeries, TildeSeries};
use crate::{Error, Result};

/// Shortest round-trip decimal rendering of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Fixed 17-significant-digit scientific rendering (coefficient tables).
pub fn fmt_f64_17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `basis,index,coefficient` rendering of a tilde series.
pub fn tilde_series_csv(eta: &TildeSeries) -> String {
    let mut out = String::from("basis,index,coefficient\n");
    for (i, v) in eta.coeffs().iter().enumerate() {
        let _ = writeln!(out, "tilde,{},{}", i + 1, fmt_f64(*v));
    }
    out
}

/// `basis,index,coefficient` rendering of a sine series.
pub fn sine_series_csv(xi: &SineSeries) -> String {
    let mut out = String::from("basis,index,coefficient\n");
    for (i, v) in xi.coeffs().iter().enumerate() {
        let _ = writeln!(out, "sine,{},{}", i + 1, fmt_f64(*v));
    }
    out
}

/// `basis,index,coefficient` rendering of a general field; the mean is the
/// `cos` row at index 0.
pub fn fourier_field_csv(f: &FourierField) -> String {
    let mut out = String::from("basis,index,coefficient\n");
    let _ = writeln!(out, "cos,0,{}", fmt_f64(f.mean));
    for j in 1..=f.modes() {
        let _ = writeln!(out, "cos,{},{}", j, fmt_f64(f.cos[j - 1]));
    }
    for j in 1..=f.modes() {
        let _ = writeln!(out, "sine,{},{}", j, fmt_f64(f.sin[j - 1]));
    }
    out
}

/// `theta,value` rendering of a grid field.
pub fn grid_csv(g: &GridField) -> String {
    let mut out = String::from("theta,value\n");
    let m = g.len();
    for (i, v) in g.values().iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt_f64(GridField::theta(m, i)), fmt_f64(*v));
    }
    out
}

/// Sparse coefficients parsed from a `basis,index,coefficient` file.
#[derive(Debug, Clone, Default)]
pub struct ParsedSeries {
    pub tilde: Vec<(u32, f64)>,
    pub sine: Vec<(u32, f64)>,
    pub cos: Vec<(u32, f64)>,
}

impl ParsedSeries {
    /// Dense tilde series (fails if sine/cos rows are present).
    pub fn into_tilde(self) -> Result<TildeSeries> {
        if !self.sine.is_empty() || !self.cos.is_empty() {
            return Err(Error::Parse(
                "expected a pure tilde series, found sine/cos rows".into(),
            ));
        }
        let n = self.tilde.iter().map(|(k, _)| *k).max().unwrap_or(0) as usize;
        let mut coeffs = vec![0.0; n];
        for (k, v) in self.tilde {
            if k == 0 {
                return Err(Error::Parse("tilde index 0 is invalid".into()));
            }
            coeffs[(k - 1) as usize] = v;
        }
        Ok(TildeSeries::new(coeffs))
    }
}

/// Parses a `basis,index,coefficient` CSV.
pub fn parse_series_csv(text: &str) -> Result<ParsedSeries> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "basis,index,coefficient" => {}
        other => {
            return Err(Error::Parse(format!(
                "bad header {:?}, expected basis,index,coefficient",
                other.unwrap_or("")
            )))
        }
    }
    let mut parsed = ParsedSeries::default();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (basis, index, value) = (fields.next(), fields.next(), fields.next());
        let (Some(basis), Some(index), Some(value)) = (basis, index, value) else {
            return Err(Error::Parse(format!("line {}: expected 3 fields", lineno + 2)));
        };
        let index: u32 = index
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: bad index: {e}", lineno + 2)))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: bad value: {e}", lineno + 2)))?;
        match basis.trim() {
            "tilde" => parsed.tilde.push((index, value)),
            "sine" => parsed.sine.push((index, value)),
            "cos" => parsed.cos.push((index, value)),
            other => {
                return Err(Error::Parse(format!(
                    "line {}: unknown basis {other:?}",
                    lineno + 2
                )))
            }
        }
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilde_csv_round_trip() {
        let eta = TildeSeries::new(vec![1.0, 0.0, -0.125, 3.3e-17]);
        let text = tilde_series_csv(&eta);
        let back = parse_series_csv(&text).unwrap().into_tilde().unwrap();
        assert_eq!(back.coeffs(), eta.coeffs());
    }

    #[test]
    fn shortest_round_trip_is_deterministic() {
        for &x in &[0.1, 1.0 / 3.0, 2.0_f64.powi(-40), -0.0, 6.02e23] {
            let s = fmt_f64(x);
            let y: f64 = s.parse().unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{s}");
        }
    }

    #[test]
    fn rejects_bad_header() {
        assert!(parse_series_csv("nope\n").is_err());
        assert!(parse_series_csv("basis,index,coefficient\nfoo,1,2\n").is_err());
    }
}
