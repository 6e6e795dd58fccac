use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solvers::Trace;

pub const CSV_HEADER: &str = "iteration,algorithm,rel_error,step_min,step_mean,step_max,grad_norm";

/// Plain decimal with at least 12 significant digits.
pub fn format_decimal(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return format!("{:.11}", 0.0);
    }
    let exponent = v.abs().log10().floor() as i64;
    let precision = (11 - exponent).clamp(0, 400) as usize;
    format!("{v:.precision$}")
}

pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            trace.algorithm,
            format_decimal(r.rel_error),
            format_decimal(r.step_min),
            format_decimal(r.step_mean),
            format_decimal(r.step_max),
            format_decimal(r.grad_norm),
        );
    }
    out
}

pub fn emit_csv(trace: &Trace, path: &Path) -> Result<()> {
    std::fs::write(path, trace_to_csv(trace)).map_err(|e| Error::io(path, e))
}
