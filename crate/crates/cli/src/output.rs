//! CSV writers. Numbers are written with 17 significant digits so files
//! round-trip exactly.

use std::path::Path;

use seek_core::{EquilibriumReport, FourierCoefficients, Trajectory};

use crate::error::CliError;

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn open(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::output(path, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| CliError::output(path, e))
}

fn write_rows<W: std::io::Write>(
    writer: &mut csv::Writer<W>,
    path: &Path,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    for row in rows {
        writer
            .write_record(&row)
            .map_err(|e| CliError::output(path, e))?;
    }
    writer.flush().map_err(|e| CliError::output(path, e))
}

/// `t,<labels...>` followed by one row per sample.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let header = std::iter::once("t".to_string())
        .chain(traj.labels().iter().cloned())
        .collect();
    let rows = traj.times().iter().zip(traj.states()).map(|(t, s)| {
        std::iter::once(fmt_num(*t))
            .chain(s.iter().map(|v| fmt_num(*v)))
            .collect()
    });
    write_rows(&mut open(path)?, path, std::iter::once(header).chain(rows))
}

/// Several trajectories on one time grid, columns `t,<name>.<label>...`.
pub fn write_joined(path: &Path, named: &[(String, &Trajectory)]) -> Result<(), CliError> {
    let Some((_, first)) = named.first() else {
        return Err(CliError::output(path, "no trajectories"));
    };
    let mut header = vec!["t".to_string()];
    for (name, traj) in named {
        if traj.len() != first.len() {
            return Err(CliError::output(
                path,
                "trajectories have different lengths",
            ));
        }
        header.extend(traj.labels().iter().map(|l| format!("{name}.{l}")));
    }
    let rows = (0..first.len()).map(|i| {
        let mut row = vec![fmt_num(first.times()[i])];
        for (_, traj) in named {
            row.extend(traj.state(i).iter().map(|v| fmt_num(*v)));
        }
        row
    });
    write_rows(&mut open(path)?, path, std::iter::once(header).chain(rows))
}

pub const EQUILIBRIUM_HEADER: [&str; 6] = ["delta", "root", "stability", "lo", "hi", "contained"];

fn equilibrium_rows(report: &EquilibriumReport, x_star: Option<f64>, tol: f64) -> Vec<Vec<String>> {
    let (lo, hi) = report.attractor_interval.unzip();
    let contained = match x_star {
        Some(x) => report.contained(x, tol).to_string(),
        None => "unknown".to_string(),
    };
    let row = |root: String, stability: String| {
        vec![
            fmt_num(report.delta),
            root,
            stability,
            fmt_opt(lo),
            fmt_opt(hi),
            contained.clone(),
        ]
    };
    if report.roots.is_empty() {
        return vec![row(String::new(), "none".to_string())];
    }
    report
        .roots
        .iter()
        .map(|r| row(fmt_num(r.x), r.stability.to_string()))
        .collect()
}

/// One row per root; a report without roots still gets one row.
pub fn write_equilibria<W: std::io::Write>(
    out: W,
    reports: &[EquilibriumReport],
    x_star: Option<f64>,
    tol: f64,
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    let header = EQUILIBRIUM_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = reports
        .iter()
        .flat_map(|r| equilibrium_rows(r, x_star, tol));
    write_rows(
        &mut writer,
        Path::new("<equilibria>"),
        std::iter::once(header).chain(rows),
    )
}

pub fn write_equilibria_file(
    path: &Path,
    reports: &[EquilibriumReport],
    x_star: Option<f64>,
    tol: f64,
) -> Result<(), CliError> {
    let header = EQUILIBRIUM_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = reports
        .iter()
        .flat_map(|r| equilibrium_rows(r, x_star, tol));
    write_rows(&mut open(path)?, path, std::iter::once(header).chain(rows))
}

/// `k,a_k,b_k`, with `b_0` left empty.
pub fn write_coefficients<W: std::io::Write>(
    out: W,
    c: &FourierCoefficients,
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    let header = vec!["k".to_string(), "a_k".to_string(), "b_k".to_string()];
    let rows = (0..=c.k_max).map(|k| {
        let b = if k == 0 {
            String::new()
        } else {
            fmt_num(c.b(k))
        };
        vec![k.to_string(), fmt_num(c.a(k)), b]
    });
    write_rows(
        &mut writer,
        Path::new("<coefficients>"),
        std::iter::once(header).chain(rows),
    )
}

/// Generic table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
    let header = header.iter().map(|s| s.to_string()).collect();
    write_rows(&mut open(path)?, path, std::iter::once(header).chain(rows))
}
