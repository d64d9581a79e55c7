//! Plain-text spectrum files.
//!
//! ```text
//! dim=2
//! # k_1 k_2 re im
//! 0 1 1.0 0.0
//! -3 2 0.25 -0.5
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Duplicate
//! frequencies are rejected.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{Frequency, SparseSpectrum};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_spectrum(text: &str) -> Result<SparseSpectrum> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hdr_line, header) = lines.next().ok_or_else(|| parse_err(1, "missing `dim=<d>` header"))?;
    let dim: usize = header
        .strip_prefix("dim=")
        .ok_or_else(|| parse_err(hdr_line, "expected `dim=<d>`"))?
        .trim()
        .parse()
        .map_err(|e| parse_err(hdr_line, format!("bad dimension: {e}")))?;
    if dim == 0 {
        return Err(parse_err(hdr_line, "dimension must be at least 1"));
    }

    let mut terms = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim + 2 {
            return Err(parse_err(n, format!("expected {} fields, found {}", dim + 2, fields.len())));
        }
        let k = fields[..dim]
            .iter()
            .map(|f| f.parse::<i64>().map_err(|e| parse_err(n, format!("bad frequency `{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let re: f64 = fields[dim].parse().map_err(|e| parse_err(n, format!("bad real part: {e}")))?;
        let im: f64 = fields[dim + 1].parse().map_err(|e| parse_err(n, format!("bad imaginary part: {e}")))?;
        if !seen.insert(k.clone()) {
            return Err(parse_err(n, format!("duplicate frequency {k:?}")));
        }
        terms.push((Frequency::new(k), Complex64::new(re, im)));
    }
    SparseSpectrum::from_terms(dim, terms)
}

/// Serializes in lexicographic frequency order with round-trip float formatting.
pub fn format_spectrum(t: &SparseSpectrum) -> String {
    let mut out = format!("dim={}\n", t.dim());
    for (k, c) in t.iter() {
        for kj in k.components() {
            let _ = write!(out, "{kj} ");
        }
        let _ = writeln!(out, "{:?} {:?}", c.re, c.im);
    }
    out
}

pub fn read_spectrum(path: impl AsRef<Path>) -> Result<SparseSpectrum> {
    parse_spectrum(&std::fs::read_to_string(path)?)
}

pub fn write_spectrum(path: impl AsRef<Path>, t: &SparseSpectrum) -> Result<()> {
    std::fs::write(path, format_spectrum(t))?;
    Ok(())
}
