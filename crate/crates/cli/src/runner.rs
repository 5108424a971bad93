//! Executes scenarios: simulations in parallel, then all file output from a
//! single thread once every run has succeeded.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use seek_core::analysis::default_search_interval;
use seek_core::{
    find_equilibria, tracking_error, EquilibriumReport, Scheme, Trajectory, TrajectoryMetrics,
};

use crate::error::CliError;
use crate::output;
use crate::plot::{self, Series};
use crate::scenario::{Scenario, SweepPoint};

/// Slack for the containment verdict in equilibrium reports.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-9;
/// Plots keep at most this many samples per series.
const PLOT_SAMPLES: usize = 4000;

/// One simulated (sweep point, scheme) pair.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub point: SweepPoint,
    pub scheme: Scheme,
    pub trajectory: Trajectory,
    pub metrics: TrajectoryMetrics,
}

impl RunRecord {
    pub fn describe(&self) -> String {
        format!("{} {}", self.scheme, self.point.describe())
    }
}

/// Everything a scenario produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub records: Vec<RunRecord>,
    pub reports: Vec<EquilibriumReport>,
    /// `(reference, other, sweep point, error)` from `compare`.
    pub tracking: Vec<(Scheme, Scheme, String, f64)>,
    pub files: Vec<PathBuf>,
}

fn simulate_one(
    scenario: &Scenario,
    point: &SweepPoint,
    scheme: Scheme,
) -> Result<RunRecord, CliError> {
    let abort = |e| CliError::numerical(format!("{} scheme={scheme}", point.describe()), e);
    let trajectory = scheme.simulate(&point.cost, &point.params).map_err(abort)?;
    let a = &scenario.analysis;
    let metrics = match point.cost.minimiser_hint() {
        Some(center) => TrajectoryMetrics::measure(&trajectory, 0, center, a.band, a.window, None)
            .map_err(abort)?,
        None => TrajectoryMetrics {
            convergence_time: None,
            oscillation_amplitude: seek_core::oscillation_amplitude(
                &trajectory,
                0,
                a.window.min(trajectory.t_end()),
            ),
            tracking_error: None,
        },
    };
    Ok(RunRecord {
        point: point.clone(),
        scheme,
        trajectory,
        metrics,
    })
}

/// Runs every (sweep point, scheme) pair concurrently. Results come back in
/// sweep order, schemes in scenario order within each point.
pub fn simulate_all(scenario: &Scenario) -> Result<Vec<RunRecord>, CliError> {
    let points = scenario.points()?;
    let jobs: Vec<(&SweepPoint, Scheme)> = points
        .iter()
        .flat_map(|p| scenario.schemes.iter().map(move |&s| (p, s)))
        .collect();
    jobs.into_par_iter()
        .map(|(p, s)| simulate_one(scenario, p, s))
        .collect()
}

/// Equilibrium reports for each distinct dither amplitude in the sweep.
pub fn equilibrium_reports(scenario: &Scenario) -> Result<Vec<EquilibriumReport>, CliError> {
    let mut seen: Vec<f64> = Vec::new();
    let mut work = Vec::new();
    for point in scenario.points()? {
        let delta = point.params.delta;
        if seen.contains(&delta) {
            continue;
        }
        seen.push(delta);
        work.push(point);
    }
    work.par_iter()
        .map(|point| {
            let delta = point.params.delta;
            let interval = scenario
                .analysis
                .search_interval
                .map(|[lo, hi]| (lo, hi))
                .or_else(|| default_search_interval(&point.cost, delta))
                .ok_or_else(|| CliError::config("no search interval for the equilibrium report"))?;
            find_equilibria(&point.cost, delta, interval, scenario.analysis.grid_n)
                .map_err(|e| CliError::numerical(format!("equilibria {}", point.describe()), e))
        })
        .collect()
}

fn sibling(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn downsample(name: String, traj: &Trajectory) -> (String, Vec<f64>, Vec<f64>) {
    let stride = traj.len().div_ceil(PLOT_SAMPLES).max(1);
    let keep = |i: &usize| i.is_multiple_of(stride) || *i + 1 == traj.len();
    let idx: Vec<usize> = (0..traj.len()).filter(keep).collect();
    let t = idx.iter().map(|&i| traj.times()[i]).collect();
    let x = idx.iter().map(|&i| traj.state(i)[0]).collect();
    (name, t, x)
}

fn plot_records(
    path: &Path,
    title: &str,
    records: &[(String, &Trajectory)],
) -> Result<(), CliError> {
    let sampled: Vec<(String, Vec<f64>, Vec<f64>)> = records
        .iter()
        .map(|(name, traj)| downsample(name.clone(), traj))
        .collect();
    let series: Vec<Series<'_>> = sampled
        .iter()
        .map(|(name, t, x)| Series {
            name: name.clone(),
            times: t,
            values: x,
        })
        .collect();
    plot::line_plot(path, title, "x", &series)
}

fn write_report(
    scenario: &Scenario,
    out_dir: &Path,
    reports: &[EquilibriumReport],
) -> Result<PathBuf, CliError> {
    let path = match &scenario.outputs.report {
        Some(p) => out_dir.join(p),
        None => sibling(&out_dir.join(&scenario.outputs.csv), "_equilibria", "csv"),
    };
    let x_star = scenario
        .points()?
        .first()
        .and_then(|p| p.cost.minimiser_hint());
    output::write_equilibria_file(&path, reports, x_star, CONTAINMENT_TOLERANCE)?;
    Ok(path)
}

/// `run`: one CSV per (sweep point, scheme), an optional overlay plot and,
/// when an averaged scheme is involved, an equilibrium report.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<Outcome, CliError> {
    let records = simulate_all(scenario)?;
    let reports = if scenario.has_averaged_scheme() {
        equilibrium_reports(scenario)?
    } else {
        Vec::new()
    };

    let mut files = Vec::new();
    let csv_base = out_dir.join(&scenario.outputs.csv);
    let many_schemes = scenario.schemes.len() > 1;
    for rec in &records {
        let scheme_part = if many_schemes {
            format!("_{}", rec.scheme.name())
        } else {
            String::new()
        };
        let path = sibling(
            &csv_base,
            &format!("{scheme_part}{}", rec.point.file_suffix()),
            "csv",
        );
        output::write_trajectory(&path, &rec.trajectory)?;
        files.push(path);
    }
    if let Some(plot_path) = &scenario.outputs.plot {
        let path = out_dir.join(plot_path);
        let named: Vec<(String, &Trajectory)> = records
            .iter()
            .map(|r| (r.describe(), &r.trajectory))
            .collect();
        plot_records(&path, &scenario.name, &named)?;
        files.push(path);
    }
    if !reports.is_empty() {
        files.push(write_report(scenario, out_dir, &reports)?);
    }
    Ok(Outcome {
        records,
        reports,
        tracking: Vec::new(),
        files,
    })
}

/// `compare`: all schemes on the same grid, one joined CSV per sweep point
/// and a summary of sup-distances to the first listed scheme.
pub fn compare(scenario: &Scenario, out_dir: &Path) -> Result<Outcome, CliError> {
    if scenario.schemes.len() < 2 {
        return Err(CliError::config("compare needs at least two schemes"));
    }
    let records = simulate_all(scenario)?;
    let reports = if scenario.has_averaged_scheme() {
        equilibrium_reports(scenario)?
    } else {
        Vec::new()
    };

    let mut files = Vec::new();
    let mut tracking = Vec::new();
    let mut summary_rows = Vec::new();
    let csv_base = out_dir.join(&scenario.outputs.csv);
    for group in records.chunks(scenario.schemes.len()) {
        let reference = &group[0];
        let point = &reference.point;
        for rec in group {
            let err = tracking_error(&rec.trajectory, &reference.trajectory, 0)
                .map_err(|e| CliError::numerical(format!("{} tracking", rec.describe()), e))?;
            tracking.push((reference.scheme, rec.scheme, point.describe(), err));
            summary_rows.push(vec![
                point.describe(),
                rec.scheme.to_string(),
                reference.scheme.to_string(),
                output::fmt_num(err),
                output::fmt_num(rec.trajectory.last()[0]),
                rec.metrics
                    .convergence_time
                    .map(output::fmt_num)
                    .unwrap_or_default(),
                output::fmt_num(rec.metrics.oscillation_amplitude),
            ]);
        }
        let named: Vec<(String, &Trajectory)> = group
            .iter()
            .map(|r| (r.scheme.to_string(), &r.trajectory))
            .collect();
        let path = sibling(&csv_base, &point.file_suffix(), "csv");
        output::write_joined(&path, &named)?;
        files.push(path);
        if let Some(plot_path) = &scenario.outputs.plot {
            let path = sibling(&out_dir.join(plot_path), &point.file_suffix(), "svg");
            plot_records(
                &path,
                &format!("{} {}", scenario.name, point.describe()),
                &named,
            )?;
            files.push(path);
        }
    }
    let summary = sibling(&csv_base, "_summary", "csv");
    output::write_table(
        &summary,
        &[
            "point",
            "scheme",
            "reference",
            "tracking_error",
            "final_x",
            "convergence_time",
            "amplitude",
        ],
        summary_rows,
    )?;
    files.push(summary);
    if !reports.is_empty() {
        files.push(write_report(scenario, out_dir, &reports)?);
    }
    Ok(Outcome {
        records,
        reports,
        tracking,
        files,
    })
}
