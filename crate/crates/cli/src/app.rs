//! Command-line interface of the `seek` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use seek_core::analysis::default_search_interval;
use seek_core::fourier::{DEFAULT_K_MAX, DEFAULT_N_QUAD};
use seek_core::{find_equilibria, fourier_coefficients};

use crate::error::CliError;
use crate::output;
use crate::runner::{self, Outcome, CONTAINMENT_TOLERANCE};
use crate::scenario::{CostKind, CostSpec, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "seek",
    version,
    about = "Extremum-seeking simulation and analysis harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate every sweep point of a scenario and write one CSV per run.
    Run(ScenarioArgs),
    /// Simulate several schemes on the same grid and report tracking errors.
    Compare(ScenarioArgs),
    /// Locate zeros of the averaged field for one or more dither amplitudes.
    Equilibria(EquilibriaArgs),
    /// Print the readout's Fourier coefficients at a frozen state.
    Fourier(FourierArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario TOML file.
    pub scenario: PathBuf,
    /// Directory that relative output paths are resolved against.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CostArg {
    Benchmark,
    Quadratic,
    Expression,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long, value_enum, default_value = "benchmark")]
    pub cost: CostArg,
    /// Constant offset added to the cost.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub h0: f64,
    /// Minimiser of a quadratic cost (or hint for an expression).
    #[arg(long, allow_hyphen_values = true)]
    pub x_star: Option<f64>,
    /// Formula in `x` for expression costs.
    #[arg(long)]
    pub expr: Option<String>,
}

impl CostArgs {
    fn spec(&self) -> Result<CostSpec, CliError> {
        let spec = CostSpec {
            kind: match self.cost {
                CostArg::Benchmark => CostKind::Benchmark,
                CostArg::Quadratic => CostKind::Quadratic,
                CostArg::Expression => CostKind::Expression,
            },
            h0: self.h0,
            x_star: self.x_star,
            expr: self.expr.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[command(flatten)]
    pub cost: CostArgs,
    /// Dither amplitude; repeat for several.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub delta: Vec<f64>,
    /// Search interval; defaults to x* +- 3 delta.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    pub interval: Option<Vec<f64>>,
    /// Scan points.
    #[arg(long, default_value_t = 2000)]
    pub grid_n: usize,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    #[command(flatten)]
    pub cost: CostArgs,
    /// Frozen state.
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long, default_value_t = DEFAULT_N_QUAD)]
    pub n_quad: usize,
}

/// Runs one command, writing human-readable progress to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let scenario = Scenario::load(&args.scenario)?;
            let outcome = runner::run(&scenario, &args.out_dir)?;
            summarise(out, &outcome)
        }
        Command::Compare(args) => {
            let scenario = Scenario::load(&args.scenario)?;
            let outcome = runner::compare(&scenario, &args.out_dir)?;
            for (reference, scheme, point, err) in &outcome.tracking {
                if reference != scheme {
                    say(
                        out,
                        format!("{point}: sup |{scheme} - {reference}| = {err:.6e}"),
                    )?;
                }
            }
            summarise(out, &outcome)
        }
        Command::Equilibria(args) => equilibria(&args, out),
        Command::Fourier(args) => {
            if !(args.delta > 0.0 && args.delta.is_finite()) {
                return Err(CliError::config("--delta must be positive"));
            }
            let h = args.cost.spec()?.build(args.cost.h0)?;
            let c = fourier_coefficients(&h, args.x, args.delta, args.k_max, args.n_quad)
                .map_err(|e| CliError::config(e.to_string()))?;
            output::write_coefficients(out, &c)
        }
    }
}

fn say(out: &mut dyn Write, line: String) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::output(Path::new("<stdout>"), e))
}

fn summarise(out: &mut dyn Write, outcome: &Outcome) -> Result<(), CliError> {
    for rec in &outcome.records {
        let m = &rec.metrics;
        let conv = m.convergence_time.map_or("not converged".to_string(), |t| {
            format!("converged at t = {t:.3}")
        });
        say(
            out,
            format!(
                "{}: x(end) = {:.6}, {conv}, amplitude = {:.4e}",
                rec.describe(),
                rec.trajectory.last()[0],
                m.oscillation_amplitude
            ),
        )?;
    }
    for path in &outcome.files {
        say(out, format!("wrote {}", path.display()))?;
    }
    Ok(())
}

fn equilibria(args: &EquilibriaArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(bad) = args.delta.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(CliError::config(format!(
            "--delta must be positive, got {bad}"
        )));
    }
    let h = args.cost.spec()?.build(args.cost.h0)?;
    let mut reports = Vec::with_capacity(args.delta.len());
    for &delta in &args.delta {
        let interval = match &args.interval {
            Some(v) => (v[0], v[1]),
            None => default_search_interval(&h, delta)
                .ok_or_else(|| CliError::config("give --interval or --x-star for this cost"))?,
        };
        let report = find_equilibria(&h, delta, interval, args.grid_n)
            .map_err(|e| CliError::config(e.to_string()))?;
        reports.push(report);
    }
    let x_star = h.minimiser_hint();
    match &args.out {
        Some(path) => {
            output::write_equilibria_file(path, &reports, x_star, CONTAINMENT_TOLERANCE)?;
            say(out, format!("wrote {}", path.display()))
        }
        None => output::write_equilibria(out, &reports, x_star, CONTAINMENT_TOLERANCE),
    }
}
