//! CSV curve I/O: first column is the parameter, remaining columns the
//! point coordinates. A non-numeric first line is treated as a header.

use metricfact::area::{Curve, CurveMetric};

use crate::output::fmt_f64;
use crate::CliError;

pub fn read_curve(path: &str, metric: CurveMetric, closed: bool) -> Result<Curve, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut params = Vec::new();
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(vals) if vals.len() >= 2 => {
                params.push(vals[0]);
                points.push(vals[1..].to_vec());
            }
            Ok(_) => {
                return Err(CliError::Config(format!(
                    "{path}:{}: need a parameter and at least one coordinate",
                    lineno + 1
                )))
            }
            Err(_) if lineno == 0 => continue, // header
            Err(e) => {
                return Err(CliError::Config(format!(
                    "{path}:{}: bad number: {e}",
                    lineno + 1
                )))
            }
        }
    }
    let curve = if closed {
        Curve::closed(params, points, metric)
    } else {
        Curve::new(params, points, metric)
    };
    curve.map_err(CliError::from)
}

pub fn curve_to_csv(curve: &Curve, header: &str) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (s, p) in curve.params().iter().zip(curve.points()) {
        out.push_str(&fmt_f64(*s));
        for c in p {
            out.push(',');
            out.push_str(&fmt_f64(*c));
        }
        out.push('\n');
    }
    out
}

/// Header for a Heisenberg curve with `n` horizontal coordinate pairs.
pub fn heisenberg_header(n: usize) -> String {
    let mut cols = vec!["s".to_string()];
    for j in 1..=n {
        cols.push(format!("x{j}"));
    }
    for j in 1..=n {
        cols.push(format!("y{j}"));
    }
    cols.push("t".to_string());
    cols.join(",")
}
