//! CSV and JSON emission.
//!
//! Distribution files have header `t,x,a,prob`; moments files have header
//! `channel,T,p,mean,second_moment,sigma`. Floats carry 9 significant
//! digits and lines end in LF. Moments smaller than 1e-12 of their natural
//! scale (`T` for the mean, `T²` for the second moment) are roundoff and
//! are written as `0`.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use qwalk::{Distribution, MomentsRecord};
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const DISTRIBUTION_HEADER: &str = "t,x,a,prob";
pub const MOMENTS_HEADER: &str = "channel,T,p,mean,second_moment,sigma";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Formats `v` with 9 significant digits in positional notation, falling
/// back to exponent notation for very large or very small magnitudes.
pub fn fmt_sig(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{:.*e}", (DIGITS - 1) as usize, v);
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can produce "-0.000..." for tiny negatives
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        return "0".to_string();
    }
    s
}

/// Roundoff floor for a moment whose magnitude is bounded by `scale`.
fn snap(v: f64, scale: f64) -> f64 {
    if v.abs() < 1e-12 * scale.max(1.0) {
        0.0
    } else {
        v
    }
}

fn channel_label(record: &MomentsRecord) -> &'static str {
    record.channel.map_or("none", |c| c.name())
}

pub fn distribution_csv(dist: &Distribution) -> String {
    let mut out = String::from(DISTRIBUTION_HEADER);
    out.push('\n');
    for (x, a, p) in dist.lightcone_cells() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            dist.time(),
            x,
            a.value(),
            fmt_sig(p)
        ));
    }
    out
}

pub fn moments_csv(records: &[MomentsRecord]) -> String {
    let mut out = String::from(MOMENTS_HEADER);
    out.push('\n');
    for r in records {
        let t = r.steps as f64;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            channel_label(r),
            r.steps,
            fmt_sig(r.p),
            fmt_sig(snap(r.mean, t)),
            fmt_sig(snap(r.second_moment, t * t)),
            fmt_sig(snap(r.sigma, t))
        ));
    }
    out
}

pub fn distribution_rows(dist: &Distribution, standard_errors: Option<&[f64]>) -> Value {
    let t = dist.time();
    let h = dist.horizon() as i64;
    let rows: Vec<Value> = dist
        .lightcone_cells()
        .map(|(x, a, p)| {
            let mut row = json!({ "t": t, "x": x, "a": a.value(), "prob": p });
            if let Some(se) = standard_errors {
                row["stderr"] = json!(se[(2 * (x + h)) as usize + a.index()]);
            }
            row
        })
        .collect();
    Value::Array(rows)
}

pub fn moments_rows(records: &[MomentsRecord]) -> Value {
    Value::Array(
        records
            .iter()
            .map(|r| {
                json!({
                    "channel": channel_label(r),
                    "T": r.steps,
                    "p": r.p,
                    "mean": r.mean,
                    "second_moment": r.second_moment,
                    "sigma": r.sigma,
                })
            })
            .collect(),
    )
}

/// `{"metadata": {...}, key: rows}` with the engine version stamped in.
pub fn json_document(mut metadata: Value, key: &str, rows: Value) -> String {
    metadata["engine_version"] = json!(env!("CARGO_PKG_VERSION"));
    let doc = json!({ "metadata": metadata, key: rows });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(10.0), "10.0000000");
        assert_eq!(fmt_sig(0.25), "0.250000000");
        assert_eq!(fmt_sig(1.0), "1.00000000");
        assert_eq!(fmt_sig(-29.2893219), "-29.2893219");
        assert_eq!(fmt_sig(1e-4), "0.000100000000");
        assert_eq!(fmt_sig(123456789.4), "123456789");
        assert_eq!(fmt_sig(1e-7), "1.00000000e-7");
        assert_eq!(fmt_sig(-1e-20), "-1.00000000e-20");
    }

    #[test]
    fn csv_headers() {
        assert!(moments_csv(&[]).starts_with("channel,T,p,mean,second_moment,sigma\n"));
        let d = qwalk::distribution(&qwalk::initial_state(qwalk::CoinLabel::Plus, 0));
        assert_eq!(
            distribution_csv(&d),
            "t,x,a,prob\n0,0,-1,0\n0,0,1,1.00000000\n"
        );
    }
}
