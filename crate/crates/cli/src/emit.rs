//! Report serialization.
//!
//! JSON goes through `serde_json::Value`, whose maps keep keys sorted, and is
//! written by hand so every float carries 17 significant digits (`%.17g`).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::config::OutputFormat;
use crate::report::Report;
use crate::CliError;

pub const CSV_HEADER: &str = "trial_index,alice_basis,alice_outcome,outcomes,zero_count";

/// `%.17g`: 17 significant digits, trailing zeros trimmed, exponent form
/// outside `1e-4 ..= 1e17`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_g17(n.as_f64().expect("f64")));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric arrays stay on one line
            if items.iter().all(|x| x.is_number()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(out, x, indent + 2);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn render_json(report: &Report) -> Result<String, CliError> {
    let value = serde_json::to_value(report)
        .map_err(|e| CliError::Internal(format!("serializing report: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

pub fn render_csv(report: &Report) -> String {
    let mut out = String::with_capacity(32 * (report.trials.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &report.trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.trial_index,
            row.alice_basis.unwrap_or(""),
            row.alice_outcome.map(|o| o.to_string()).unwrap_or_default(),
            row.outcomes,
            row.zero_count
        );
    }
    out
}

pub fn render(report: &Report, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => render_json(report),
        OutputFormat::Csv => Ok(render_csv(report)),
    }
}

/// Writes the report to `path`, or to standard output when `path` is `None`.
pub fn emit_report(
    report: &Report,
    format: OutputFormat,
    path: Option<&Path>,
) -> Result<(), CliError> {
    let text = render(report, format)?;
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("writing standard output: {e}")))
        }
    }
}
