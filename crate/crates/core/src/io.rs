//! Text formats: datasets, coefficient tables, mixture definitions and run statistics.
//!
//! A dataset file starts with a `d=<int> n=<int>` header followed by exactly
//! `n` lines of `d` characters `0`/`1`, `x^(1)` first. Coefficient files are
//! CSV with an `index,coefficient` header, the index as a bit string, rows in
//! lexicographic order and values written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{BitVector, MAX_LEN};
use crate::error::{Error, Result};
use crate::fwht::DenseVector;
use crate::model::{BernoulliMixture, Dataset, SparseDensity};

pub const COEFFICIENT_HEADER: &str = "index,coefficient";

fn header_field(token: Option<&str>, key: &str) -> Result<usize> {
    let token = token.ok_or_else(|| Error::parse(1, format!("missing `{key}=` in header")))?;
    let value = token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::parse(1, format!("expected `{key}=<int>`, found `{token}`")))?;
    value
        .parse()
        .map_err(|_| Error::parse(1, format!("`{value}` is not a nonnegative integer")))
}

pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty dataset file"))?;
    let mut tokens = header.split_whitespace();
    let d = header_field(tokens.next(), "d")?;
    let n = header_field(tokens.next(), "n")?;
    if let Some(extra) = tokens.next() {
        return Err(Error::parse(1, format!("unexpected `{extra}` in header")));
    }
    if d == 0 || d > MAX_LEN {
        return Err(Error::parse(
            1,
            format!("dimension {d} outside 1..={}", MAX_LEN),
        ));
    }
    if n == 0 {
        return Err(Error::parse(1, "dataset has no samples"));
    }
    let mut samples = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if samples.len() == n {
            return Err(Error::parse(line_no, format!("more than n={n} samples")));
        }
        let x: BitVector = line
            .parse()
            .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        if x.len() != d {
            return Err(Error::parse(
                line_no,
                format!("sample has {} bits, expected {d}", x.len()),
            ));
        }
        samples.push(x.bits());
    }
    if samples.len() != n {
        return Err(Error::parse(
            samples.len() + 2,
            format!("expected {n} samples, found {}", samples.len()),
        ));
    }
    Dataset::from_indices(d, samples)
}

pub fn format_dataset(data: &Dataset) -> String {
    let mut out = String::with_capacity((data.dim() + 1) * data.n() + 32);
    writeln!(out, "d={} n={}", data.dim(), data.n()).unwrap();
    for x in data.iter() {
        writeln!(out, "{x}").unwrap();
    }
    out
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&fs::read_to_string(path)?)
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    Ok(fs::write(path, format_dataset(data))?)
}

fn coefficient_rows<'a>(dim: usize, rows: impl Iterator<Item = (u64, f64)> + 'a) -> String {
    let mut out = String::new();
    writeln!(out, "{COEFFICIENT_HEADER}").unwrap();
    for (s, v) in rows {
        let s = BitVector::new(s, dim).expect("index within dimension");
        writeln!(out, "{s},{v:.16e}").unwrap();
    }
    out
}

/// The stored coefficients of an estimate.
pub fn format_coefficients(estimate: &SparseDensity) -> String {
    coefficient_rows(
        estimate.dim(),
        estimate.as_map().iter().map(|(&s, &v)| (s, v)),
    )
}

/// Every entry of a dense coefficient vector, zeros included.
pub fn format_dense_coefficients(theta: &DenseVector) -> String {
    coefficient_rows(
        theta.dim(),
        theta
            .values()
            .iter()
            .enumerate()
            .map(|(s, &v)| (s as u64, v)),
    )
}

/// Reads a coefficient table; `dim` is needed because the table may be empty.
pub fn parse_coefficients(text: &str, dim: usize) -> Result<SparseDensity> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == COEFFICIENT_HEADER => {}
        _ => {
            return Err(Error::parse(
                1,
                format!("expected header `{COEFFICIENT_HEADER}`"),
            ))
        }
    }
    let mut estimate = SparseDensity::new(dim)?;
    let mut previous: Option<u64> = None;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let (index, value) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(line_no, "expected `index,coefficient`"))?;
        let s: BitVector = index
            .trim()
            .parse()
            .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        if s.len() != dim {
            return Err(Error::parse(
                line_no,
                format!("index has {} bits, expected {dim}", s.len()),
            ));
        }
        if previous.is_some_and(|p| p >= s.bits()) {
            return Err(Error::parse(line_no, "indices must be strictly increasing"));
        }
        previous = Some(s.bits());
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("`{}` is not a number", value.trim())))?;
        estimate
            .insert(s, value)
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
    }
    Ok(estimate)
}

pub fn format_mixture(mixture: &BernoulliMixture) -> String {
    let mut text = serde_json::to_string_pretty(mixture).expect("mixture serializes");
    text.push('\n');
    text
}

/// Reads a mixture definition and revalidates it.
pub fn parse_mixture(text: &str) -> Result<BernoulliMixture> {
    #[derive(Deserialize)]
    struct Raw {
        dim: usize,
        weights: Vec<f64>,
        components: Vec<Vec<f64>>,
    }
    let raw: Raw = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    BernoulliMixture::new(raw.dim, raw.weights, raw.components)
}

/// Pretty JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    text
}
