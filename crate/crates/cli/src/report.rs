//! CSV and JSON output formats.
//!
//! Every format is deterministic: floats are written either with 17
//! significant digits (values meant to be read back losslessly) or with the
//! shortest round-trip representation (labels such as regularization
//! weights), and row order is fixed by the data structures. Re-running a
//! command on the same inputs reproduces each file byte for byte.

use std::fmt::Write as _;

use serde::Serialize;
use transvect_core::diagnostics::{ErrorKind, ErrorReport};
use transvect_core::{ControlSystem, MomentaSet, PointSet, RegistrationResult};

use crate::CliError;

/// Control points with momenta: `index,x,y,z,mx,my,mz`, lossless floats.
pub fn format_control_csv(system: &ControlSystem<3>) -> String {
    let mut out = String::from("index,x,y,z,mx,my,mz\n");
    let c = system.control_points().as_slice();
    let mu = system.momenta().as_slice();
    for (i, (p, m)) in c.iter().zip(mu).enumerate() {
        let _ = writeln!(
            out,
            "{i},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p[0], p[1], p[2], m[0], m[1], m[2]
        );
    }
    out
}

/// Reads a control CSV back into points and momenta.
pub fn parse_control_csv(text: &str) -> Result<(PointSet<3>, MomentaSet<3>), CliError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != "index,x,y,z,mx,my,mz" {
        return Err(CliError::Message(format!(
            "line 1: expected header 'index,x,y,z,mx,my,mz', found '{header}'"
        )));
    }
    let mut points = Vec::new();
    let mut momenta = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(CliError::Message(format!(
                "line {line_no}: expected 7 comma-separated fields, found {}",
                fields.len()
            )));
        }
        let expected: usize = fields[0].parse().map_err(|_| {
            CliError::Message(format!("line {line_no}: invalid index '{}'", fields[0]))
        })?;
        if expected != points.len() {
            return Err(CliError::Message(format!(
                "line {line_no}: expected index {}, found {expected}",
                points.len()
            )));
        }
        let mut values = [0.0f64; 6];
        for (k, f) in fields[1..].iter().enumerate() {
            values[k] = f.parse().map_err(|_| {
                CliError::Message(format!("line {line_no}: invalid number '{f}'"))
            })?;
            if !values[k].is_finite() {
                return Err(CliError::Message(format!(
                    "line {line_no}: non-finite value '{f}'"
                )));
            }
        }
        points.push([values[0], values[1], values[2]]);
        momenta.push([values[3], values[4], values[5]]);
    }
    let points = PointSet::new(points).map_err(CliError::Core)?;
    let momenta = MomentaSet::new(momenta).map_err(CliError::Core)?;
    Ok((points, momenta))
}

/// Per-vertex displacements: `index,dx,dy,dz`, lossless floats.
pub fn format_delta_csv(delta: &[[f64; 3]]) -> String {
    let mut out = String::from("index,dx,dy,dz\n");
    for (i, d) in delta.iter().enumerate() {
        let _ = writeln!(out, "{i},{:.16e},{:.16e},{:.16e}", d[0], d[1], d[2]);
    }
    out
}

/// Per-vertex scalar field: `index,value`, lossless floats.
pub fn format_scalar_csv(values: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{i},{v:.16e}");
    }
    out
}

/// Consistency-error table: one row per subject, weight, variant, and error
/// kind, in suite order. Schema:
/// `subject_id,alpha_squared,variant,error_type,value,converged`.
pub fn format_errors_csv(report: &ErrorReport) -> String {
    let mut out = String::from("subject_id,alpha_squared,variant,error_type,value,converged\n");
    for row in &report.rows {
        for kind in ErrorKind::ALL {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.16e},{}",
                row.subject,
                row.alpha_squared,
                row.variant.name(),
                kind.name(),
                kind.value_of(&row.values),
                row.values.converged
            );
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct SummaryRowJson {
    alpha_squared: f64,
    variant: &'static str,
    error_type: &'static str,
    count: usize,
    mean: f64,
    median: f64,
    q1: f64,
    q3: f64,
}

#[derive(Debug, Serialize)]
struct FailureJson {
    subject: usize,
    alpha_squared: f64,
    message: String,
}

#[derive(Debug, Serialize)]
struct SummaryJson {
    rows: Vec<SummaryRowJson>,
    failures: Vec<FailureJson>,
}

/// Aggregated suite statistics as pretty JSON (trailing newline included).
pub fn format_summary_json(report: &ErrorReport) -> Result<String, CliError> {
    let rows = report
        .summary()
        .into_iter()
        .map(|s| SummaryRowJson {
            alpha_squared: s.alpha_squared,
            variant: s.variant.name(),
            error_type: s.kind.name(),
            count: s.count,
            mean: s.mean,
            median: s.median,
            q1: s.q1,
            q3: s.q3,
        })
        .collect();
    let failures = report
        .failures
        .iter()
        .map(|f| FailureJson {
            subject: f.subject,
            alpha_squared: f.alpha_squared,
            message: f.message.clone(),
        })
        .collect();
    let json = serde_json::to_string_pretty(&SummaryJson { rows, failures })
        .map_err(CliError::Json)?;
    Ok(json + "\n")
}

#[derive(Debug, Serialize)]
struct RegistrationJson {
    data_term: f64,
    regularity_term: f64,
    total: f64,
    residual_rms: f64,
    deformation_norm: f64,
    iterations: usize,
    converged: bool,
    n_control_points: usize,
    sigma: f64,
    alpha_squared: f64,
    n_steps: usize,
    scheme: &'static str,
}

/// Registration outcome as pretty JSON (trailing newline included).
pub fn format_registration_json(
    result: &RegistrationResult<3>,
    sigma: f64,
    alpha_squared: f64,
    n_steps: usize,
    scheme_name: &'static str,
) -> Result<String, CliError> {
    let json = serde_json::to_string_pretty(&RegistrationJson {
        data_term: result.data_term,
        regularity_term: result.regularity_term,
        total: result.total,
        residual_rms: result.residual_rms(),
        deformation_norm: result.deformation_norm(),
        iterations: result.iterations,
        converged: result.converged,
        n_control_points: result.system.control_points().len(),
        sigma,
        alpha_squared,
        n_steps,
        scheme: scheme_name,
    })
    .map_err(CliError::Json)?;
    Ok(json + "\n")
}
