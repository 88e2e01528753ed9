//! CSV emission and parsing for experiment and bound rows.
//!
//! Schema v1, UTF-8, LF line endings, floats printed with 6 significant
//! digits. The rendering is a pure function of the rows, which is what the
//! byte-identical determinism guarantee rests on.

use std::path::Path;
use std::str::FromStr;

use crate::bound::BoundRow;

use super::{PrecoderKind, ResultRow, SimError};

pub const CSV_HEADER: &str = "snr_db,precoder,sdr_db,sdr_analytic_db,stderr_db,trials,elapsed_ms";
pub const BOUND_CSV_HEADER: &str = "snr_db,d_sum,sdr_opt_db,sdr_opt_raw_db,trials";

/// Format with 6 significant digits, `%g`-style: plain decimal for moderate
/// exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    };
    trim_trailing_zeros(&s)
}

fn trim_trailing_zeros(s: &str) -> String {
    if let Some(epos) = s.find(['e', 'E']) {
        let (mant, exp) = s.split_at(epos);
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}{exp}")
    } else if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_g6(r.snr_db),
            r.precoder,
            format_g6(r.sdr_db),
            format_g6(r.sdr_analytic_db),
            format_g6(r.stderr_db),
            r.trials,
            r.elapsed_ms
        ));
    }
    out
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<(), SimError> {
    std::fs::write(path, render_csv(rows))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, SimError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(SimError::Parse {
                location: "line 1".into(),
                message: format!("unexpected header '{header}', expected '{CSV_HEADER}'"),
            });
        }
        None => {
            return Err(SimError::Parse {
                location: "line 1".into(),
                message: "empty file".into(),
            });
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(SimError::Parse {
                location: format!("line {}", idx + 1),
                message: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let field = |i: usize, name: &str| -> Result<f64, SimError> {
            fields[i].parse::<f64>().map_err(|e| SimError::Parse {
                location: format!("line {} field {name}", idx + 1),
                message: e.to_string(),
            })
        };
        rows.push(ResultRow {
            snr_db: field(0, "snr_db")?,
            precoder: PrecoderKind::from_str(fields[1]).map_err(|e| SimError::Parse {
                location: format!("line {} field precoder", idx + 1),
                message: e,
            })?,
            sdr_db: field(2, "sdr_db")?,
            sdr_analytic_db: field(3, "sdr_analytic_db")?,
            stderr_db: field(4, "stderr_db")?,
            trials: fields[5].parse().map_err(|e| SimError::Parse {
                location: format!("line {} field trials", idx + 1),
                message: format!("{e}"),
            })?,
            elapsed_ms: fields[6].parse().map_err(|e| SimError::Parse {
                location: format!("line {} field elapsed_ms", idx + 1),
                message: format!("{e}"),
            })?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, SimError> {
    parse_csv(&std::fs::read_to_string(path)?)
}

pub fn render_bound_csv(rows: &[BoundRow]) -> String {
    let mut out = String::new();
    out.push_str(BOUND_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_g6(r.snr_db),
            format_g6(r.d_sum_mean),
            format_g6(r.sdr_opt_db),
            format_g6(r.sdr_opt_raw_db),
            r.trials
        ));
    }
    out
}

pub fn write_bound_csv(rows: &[BoundRow], path: &Path) -> Result<(), SimError> {
    std::fs::write(path, render_bound_csv(rows))?;
    Ok(())
}
