//! Scenario files: TOML experiment definitions validated before any run.
//!
//! ```toml
//! name = "fig5"
//! scheme = "classic"            # or: schemes = ["classic", "fourier_avg"]
//!
//! [cost]
//! kind = "benchmark"            # benchmark | quadratic | expression
//! h0 = 0.0
//!
//! [params]
//! gamma = 0.1
//! delta = 0.1
//! x0 = 1.0
//! t_end = 2400.0
//! dt = 0.005
//!
//! [sweep]                       # optional
//! parameter = "h0"              # h0 | gamma | delta | x0
//! values = [-10.0, 10.0, 100.0, 1000.0]
//!
//! [outputs]
//! csv = "fig5.csv"
//! plot = "fig5.svg"             # optional
//! report = "fig5_equilibria.csv" # optional
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use seek_core::{CostFunction, Scheme, SimParams, DEFAULT_DT, DEFAULT_T_END};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Benchmark,
    Quadratic,
    Expression,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    pub kind: CostKind,
    #[serde(default)]
    pub h0: f64,
    /// Minimiser for `quadratic`; optional hint for `expression`.
    pub x_star: Option<f64>,
    /// Formula in `x`, only for `expression`.
    pub expr: Option<String>,
}

impl CostSpec {
    pub fn benchmark(h0: f64) -> Self {
        Self {
            kind: CostKind::Benchmark,
            h0,
            x_star: None,
            expr: None,
        }
    }

    pub fn quadratic(x_star: f64) -> Self {
        Self {
            kind: CostKind::Quadratic,
            h0: 0.0,
            x_star: Some(x_star),
            expr: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !self.h0.is_finite() || self.x_star.is_some_and(|x| !x.is_finite()) {
            return Err(CliError::config("cost values must be finite"));
        }
        match self.kind {
            CostKind::Benchmark if self.x_star.is_some() => Err(CliError::config(
                "the benchmark minimiser is fixed at 2*pi; drop `x_star`",
            )),
            CostKind::Quadratic if self.x_star.is_none() => {
                Err(CliError::config("quadratic cost needs `x_star`"))
            }
            CostKind::Expression if self.expr.is_none() => {
                Err(CliError::config("expression cost needs `expr`"))
            }
            CostKind::Benchmark | CostKind::Quadratic if self.expr.is_some() => Err(
                CliError::config("`expr` is only valid for expression costs"),
            ),
            _ => {
                self.build(self.h0)?;
                Ok(())
            }
        }
    }

    /// Builds the cost with offset `h0` (overriding the configured `h0`).
    pub fn build(&self, h0: f64) -> Result<CostFunction, CliError> {
        match self.kind {
            CostKind::Benchmark => Ok(CostFunction::benchmark(h0)),
            CostKind::Quadratic => {
                let base = CostFunction::quadratic(self.x_star.unwrap_or(0.0));
                Ok(if h0 == 0.0 { base } else { base.shifted(h0) })
            }
            CostKind::Expression => {
                let expr = self.expr.as_deref().unwrap_or_default();
                let base = crate::expression::compile(expr)?;
                let base = match self.x_star {
                    Some(x) => base.with_minimiser(x),
                    None => base,
                };
                Ok(if h0 == 0.0 { base } else { base.shifted(h0) })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub gamma: f64,
    pub delta: f64,
    pub x0: f64,
    pub ybar0: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_t_end() -> f64 {
    DEFAULT_T_END
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

impl ParamsSpec {
    pub fn to_sim(&self) -> SimParams {
        SimParams {
            gamma: self.gamma,
            delta: self.delta,
            x0: self.x0,
            ybar0: self.ybar0,
            t_end: self.t_end,
            dt: self.dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    H0,
    Gamma,
    Delta,
    X0,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::H0 => "h0",
            SweepParameter::Gamma => "gamma",
            SweepParameter::Delta => "delta",
            SweepParameter::X0 => "x0",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: PathBuf,
    pub plot: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Knobs for the metrics printed after a run.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Trailing window (periods) for the oscillation amplitude, clipped to
    /// the horizon.
    #[serde(default = "default_window")]
    pub window: f64,
    /// Half-width of the convergence band around the minimiser.
    #[serde(default = "default_band")]
    pub band: f64,
    /// Scan points for the equilibrium search.
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Equilibrium search interval; defaults to `x* +- 3 delta`.
    pub search_interval: Option<[f64; 2]>,
}

fn default_window() -> f64 {
    10.0
}

fn default_band() -> f64 {
    0.5
}

fn default_grid_n() -> usize {
    400
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            window: default_window(),
            band: default_band(),
            grid_n: default_grid_n(),
            search_interval: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    scheme: Option<String>,
    schemes: Option<Vec<String>>,
    cost: CostSpec,
    params: ParamsSpec,
    sweep: Option<SweepSpec>,
    outputs: OutputSpec,
    #[serde(default)]
    analysis: AnalysisSpec,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub schemes: Vec<Scheme>,
    pub cost: CostSpec,
    pub params: ParamsSpec,
    pub sweep: Option<SweepSpec>,
    pub outputs: OutputSpec,
    pub analysis: AnalysisSpec,
}

/// One concrete simulation setup after applying a sweep value.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// `None` when the scenario has no sweep.
    pub tag: Option<(SweepParameter, f64)>,
    pub cost: CostFunction,
    pub params: SimParams,
}

impl SweepPoint {
    pub fn describe(&self) -> String {
        match self.tag {
            Some((p, v)) => format!("{p}={v}"),
            None => "base".to_string(),
        }
    }

    /// File-name suffix such as `_h0_-10`.
    pub fn file_suffix(&self) -> String {
        match self.tag {
            Some((p, v)) => format!("_{p}_{v}"),
            None => String::new(),
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let fallback = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scenario");
        Self::parse(&text, fallback)
    }

    pub fn parse(text: &str, fallback_name: &str) -> Result<Self, CliError> {
        let raw: RawScenario = toml::from_str(text)
            .map_err(|e| CliError::config(format!("scenario does not parse: {e}")))?;
        let names = match (raw.scheme, raw.schemes) {
            (Some(s), None) => vec![s],
            (None, Some(list)) => list,
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "give either `scheme` or `schemes`, not both",
                ))
            }
            (None, None) => return Err(CliError::config("missing `scheme`")),
        };
        if names.is_empty() {
            return Err(CliError::config("`schemes` is empty"));
        }
        let schemes = names
            .iter()
            .map(|n| {
                n.parse::<Scheme>()
                    .map_err(|e| CliError::config(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let scenario = Scenario {
            name: raw.name.unwrap_or_else(|| fallback_name.to_string()),
            schemes,
            cost: raw.cost,
            params: raw.params,
            sweep: raw.sweep,
            outputs: raw.outputs,
            analysis: raw.analysis,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.cost.validate()?;
        let has_filter = self
            .schemes
            .iter()
            .any(|s| matches!(s, Scheme::Hpf | Scheme::HpfAverage));
        if self.params.ybar0.is_some() && !has_filter {
            return Err(CliError::config("`ybar0` only applies to the hpf schemes"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::config("sweep `values` must not be empty"));
            }
            if sweep.values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::config("sweep values must be finite"));
            }
        }
        if !(self.analysis.window > 0.0 && self.analysis.band > 0.0) {
            return Err(CliError::config(
                "analysis `window` and `band` must be positive",
            ));
        }
        if self.analysis.grid_n < seek_core::analysis::MIN_SCAN_POINTS {
            return Err(CliError::config("analysis `grid_n` must be at least 100"));
        }
        if let Some([lo, hi]) = self.analysis.search_interval {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(CliError::config(
                    "analysis `search_interval` must be increasing",
                ));
            }
        }
        for point in self.points()? {
            point
                .params
                .validate()
                .map_err(|e| CliError::config(format!("{}: {e}", point.describe())))?;
            if self.has_averaged_scheme()
                && self.analysis.search_interval.is_none()
                && point.cost.minimiser_hint().is_none()
            {
                return Err(CliError::config(
                    "the equilibrium report needs `x_star` or `analysis.search_interval`",
                ));
            }
        }
        Ok(())
    }

    /// Expands the sweep (if any) into concrete setups.
    pub fn points(&self) -> Result<Vec<SweepPoint>, CliError> {
        let base = self.params.to_sim();
        let Some(sweep) = &self.sweep else {
            return Ok(vec![SweepPoint {
                tag: None,
                cost: self.cost.build(self.cost.h0)?,
                params: base,
            }]);
        };
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut params = base;
                let mut h0 = self.cost.h0;
                match sweep.parameter {
                    SweepParameter::H0 => h0 = v,
                    SweepParameter::Gamma => params.gamma = v,
                    SweepParameter::Delta => params.delta = v,
                    SweepParameter::X0 => params.x0 = v,
                }
                Ok(SweepPoint {
                    tag: Some((sweep.parameter, v)),
                    cost: self.cost.build(h0)?,
                    params,
                })
            })
            .collect()
    }

    pub fn has_averaged_scheme(&self) -> bool {
        self.schemes.iter().any(Scheme::is_averaged)
    }
}
