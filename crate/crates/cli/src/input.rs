//! Plain-text e-value files: one value per line, an optional `e_value`
//! header, blank lines ignored, `inf` accepted.

use crate::error::CliError;

pub const HEADER: &str = "e_value";

/// Parses nonnegative extended reals, naming the 1-based line of any failure.
pub fn parse_values(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !seen_content {
            seen_content = true;
            if line.eq_ignore_ascii_case(HEADER) {
                continue;
            }
        }
        let x = parse_extended(line).ok_or_else(|| {
            CliError::Input(format!("line {line_no}: `{line}` is not a number"))
        })?;
        if x < 0.0 {
            return Err(CliError::Input(format!(
                "line {line_no}: negative {what} {line}"
            )));
        }
        values.push(x);
    }
    if values.is_empty() {
        return Err(CliError::Input(format!("no {what}s found")));
    }
    Ok(values)
}

fn parse_extended(s: &str) -> Option<f64> {
    let x: f64 = s.parse().ok()?;
    if x.is_nan() {
        None
    } else {
        Some(x)
    }
}
