//! Byte-stable CSV/JSON writers and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Significant digits kept in JSON output.
pub const JSON_DIGITS: usize = 12;

/// Rounds to `digits` significant digits through decimal formatting, so the
/// printed shortest representation is stable.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", digits.saturating_sub(1), v).parse().unwrap_or(v)
}

/// Plain decimal with `digits` significant digits, no exponent.
pub fn format_sig(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded = round_sig(v, digits);
    let magnitude = rounded.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{rounded:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn round_value(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().unwrap(), digits);
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_value(x, digits)),
        Value::Object(map) => map.values_mut().for_each(|x| round_value(x, digits)),
        _ => {}
    }
}

/// Pretty JSON with sorted keys and rounded floats, LF-terminated.
pub fn to_canonical_json<T: Serialize>(report: &T, digits: usize) -> Result<String, CliError> {
    let mut v = serde_json::to_value(report).map_err(|e| CliError::Invalid(e.to_string()))?;
    round_value(&mut v, digits.min(JSON_DIGITS));
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Writes to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub argv: &'a [String],
    pub config: Value,
    pub threads: Option<usize>,
    /// Not covered by the byte-stability guarantee.
    pub wall_time_seconds: f64,
    pub warnings: &'a [String],
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let body = to_canonical_json(manifest, JSON_DIGITS)?;
    write_output(Some(&manifest_path(out)), &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.561903345, 6), "0.561903");
        assert_eq!(format_sig(-1.3404612, 6), "-1.34046");
        assert_eq!(format_sig(7.07846158, 6), "7.07846");
        assert_eq!(format_sig(123456.7, 3), "123000");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(-1e-20, 3), "-0.0000000000000000000100");
        assert_eq!(round_sig(2.0 / 3.0, 12), 0.666666666667);
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct R {
            zeta: f64,
            alpha: f64,
        }
        let s = to_canonical_json(&R { zeta: 1.0 / 3.0, alpha: 2.0 }, 12).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("0.333333333333"));
        assert!(!s.contains("0.3333333333333"));
    }
}
