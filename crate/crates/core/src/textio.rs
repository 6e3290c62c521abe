//! Plain-text helpers shared by the matrix, mesh and report formats.
//!
//! Floats are written with `{:e}`, which emits the shortest digit string that
//! parses back to the same `f64`, so every format here round-trips bit-exactly.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    f64::from_str(s.trim()).map_err(|e| Error::Parse(format!("bad float {s:?}: {e}")))
}

/// Formats `a+bi` / `a-bi`.
pub fn fmt_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{:e}-{:e}i", z.re, -z.im)
    } else {
        format!("{:e}+{:e}i", z.re, z.im)
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let body = s
        .strip_suffix('i')
        .ok_or_else(|| Error::Parse(format!("complex entry {s:?} lacks trailing 'i'")))?;
    let bytes = body.as_bytes();
    // split at the last sign that is not a leading sign or an exponent sign
    let split = (1..bytes.len())
        .rev()
        .find(|&i| {
            (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
        })
        .ok_or_else(|| Error::Parse(format!("complex entry {s:?} lacks imaginary part")))?;
    let re = parse_f64(&body[..split])?;
    let im = parse_f64(&body[split + 1..])?;
    let im = if bytes[split] == b'-' { -im } else { im };
    Ok(Complex64::new(re, im))
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
/// Repeated keys keep every value in order of appearance.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
        map.entry(k.trim().to_string())
            .or_default()
            .push(v.trim().to_string());
    }
    Ok(map)
}
