//! Right-hand sides for every seeking scheme and their averaged models, plus
//! the fixed-step integrator that turns them into sampled trajectories.
//!
//! | scheme                | state        | field                                              |
//! |-----------------------|--------------|----------------------------------------------------|
//! | classic               | `x`          | `-g * h(x + d u) * u`                               |
//! | hpf                   | `x, ybar`    | `-g (h(x + d u) - ybar) u`, `g (h(x + d u) - ybar)` |
//! | fourier average       | `x`          | `-(g/2) b_1(x)`                                     |
//! | hpf average           | `x, ybar`    | `-(g/2) b_1(x)`, `-g ybar + g a_0(x)/2`             |
//! | taylor average (K)    | `x`          | `-g sum_k c_k d^(2k-1) h^(2k-1)(x)`                 |
//! | support oscillator    | `x`          | `-g h(x) u`                                         |
//!
//! with `u = sin(2 pi t)`, `g = gamma`, `d = delta`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::cost::{numeric_derivative, CostFunction};
use crate::error::{Error, Result};
use crate::fourier::{dither, PeriodicGrid};
use crate::root::bisect;

/// Default integration step: 200 steps per dither period.
pub const DEFAULT_DT: f64 = 1.0 / 200.0;
/// Default horizon in dither periods.
pub const DEFAULT_T_END: f64 = 600.0;
/// Largest admissible step (at least 100 steps per period).
pub const MAX_DT: f64 = 1.0 / 100.0;
/// Highest Taylor order accepted by [`taylor_full_average`].
pub const MAX_TAYLOR_ORDER: u32 = 4;
/// Below this magnitude the support oscillator refuses to continue.
pub const SUPPORT_MIN_COST: f64 = 1e-12;

/// Tunable gains, initial conditions and integration grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub gamma: f64,
    pub delta: f64,
    pub x0: f64,
    /// Initial filter state; HPF schemes fall back to `h(x0)`.
    pub ybar0: Option<f64>,
    pub t_end: f64,
    pub dt: f64,
}

impl SimParams {
    pub fn new(gamma: f64, delta: f64, x0: f64) -> Self {
        Self {
            gamma,
            delta,
            x0,
            ybar0: None,
            t_end: DEFAULT_T_END,
            dt: DEFAULT_DT,
        }
    }

    pub fn with_horizon(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_ybar0(mut self, ybar0: f64) -> Self {
        self.ybar0 = Some(ybar0);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(
                "gamma",
                format!("must be nonnegative, got {}", self.gamma),
            ));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid(
                "delta",
                format!("must be positive, got {}", self.delta),
            ));
        }
        if !self.x0.is_finite() || self.ybar0.is_some_and(|y| !y.is_finite()) {
            return Err(Error::invalid("initial state", "must be finite"));
        }
        if !(self.t_end >= 1.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(
                "t_end",
                format!("must be at least one period, got {}", self.t_end),
            ));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::invalid(
                "dt",
                format!("must lie in (0, {MAX_DT}], got {}", self.dt),
            ));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps {
            return Err(Error::invalid(
                "dt",
                format!("must divide t_end = {} evenly", self.t_end),
            ));
        }
        Ok(())
    }

    /// Number of integration steps from 0 to `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

type Rhs = Arc<dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync>;

/// A first- or second-order ODE `state' = f(t, state)`.
#[derive(Clone)]
pub struct OdeSystem {
    label: String,
    labels: Vec<String>,
    rhs: Rhs,
}

impl OdeSystem {
    pub fn new<F>(label: impl Into<String>, labels: &[&str], rhs: F) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync + 'static,
    {
        assert!(
            matches!(labels.len(), 1 | 2),
            "systems are one- or two-dimensional"
        );
        Self {
            label: label.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            rhs: Arc::new(rhs),
        }
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Writes `f(t, state)` into `out`.
    pub fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) -> Result<()> {
        (self.rhs)(t, state, out)
    }
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSystem")
            .field("label", &self.label)
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}

/// States sampled on the uniform grid `t_i = i * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    data: Vec<f64>,
    labels: Vec<String>,
}

impl Trajectory {
    pub fn from_parts(times: Vec<f64>, data: Vec<f64>, labels: Vec<String>) -> Self {
        assert!(!labels.is_empty());
        assert_eq!(times.len() * labels.len(), data.len());
        Self {
            times,
            data,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        let d = self.dimension();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dimension())
    }

    /// One state component as a contiguous series.
    pub fn component(&self, c: usize) -> Vec<f64> {
        assert!(c < self.dimension(), "component {c} out of range");
        self.states().map(|s| s[c]).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// Classical fourth-order Runge-Kutta with a fixed step.
///
/// Fails with [`Error::NonFinite`] as soon as any component leaves the
/// finite range, and propagates errors raised by the right-hand side.
pub fn integrate(system: &OdeSystem, initial: &[f64], params: &SimParams) -> Result<Trajectory> {
    params.validate()?;
    let dim = system.dimension();
    if initial.len() != dim {
        return Err(Error::DimensionMismatch {
            system: system.label().to_string(),
            expected: dim,
            got: initial.len(),
        });
    }
    let steps = params.steps();
    let dt = params.dt;
    let mut times = Vec::with_capacity(steps + 1);
    let mut data = Vec::with_capacity((steps + 1) * dim);
    let mut y = initial.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );

    times.push(0.0);
    data.extend_from_slice(&y);
    for i in 0..steps {
        let t = i as f64 * dt;
        system.eval(t, &y, &mut k1)?;
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * dt * k1[j];
        }
        system.eval(t + 0.5 * dt, &tmp, &mut k2)?;
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * dt * k2[j];
        }
        system.eval(t + 0.5 * dt, &tmp, &mut k3)?;
        for j in 0..dim {
            tmp[j] = y[j] + dt * k3[j];
        }
        system.eval(t + dt, &tmp, &mut k4)?;
        let t_next = (i + 1) as f64 * dt;
        for j in 0..dim {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if !y[j].is_finite() {
                return Err(Error::NonFinite {
                    t: t_next,
                    component: system.labels()[j].clone(),
                });
            }
        }
        times.push(t_next);
        data.extend_from_slice(&y);
    }
    Ok(Trajectory::from_parts(
        times,
        data,
        system.labels().to_vec(),
    ))
}

/// The dither-correlation loop `x' = -gamma * h(x + delta*u(t)) * u(t)`.
pub fn classic_es(h: &CostFunction, params: &SimParams) -> OdeSystem {
    let (h, gamma, delta) = (h.clone(), params.gamma, params.delta);
    OdeSystem::new("classic", &["x"], move |t, s, out| {
        let u = dither(t);
        out[0] = -gamma * h.eval(s[0] + delta * u) * u;
        Ok(())
    })
}

/// Averaged classic loop `x_a' = -(gamma/2) b_1(x_a)`, quadrature on the
/// default grid.
pub fn fourier_average(h: &CostFunction, params: &SimParams) -> OdeSystem {
    fourier_average_on(h, params, PeriodicGrid::shared_default())
}

/// [`fourier_average`] with a caller-chosen quadrature grid.
pub fn fourier_average_on(
    h: &CostFunction,
    params: &SimParams,
    grid: Arc<PeriodicGrid>,
) -> OdeSystem {
    let (h, gamma, delta) = (h.clone(), params.gamma, params.delta);
    OdeSystem::new("fourier_avg", &["x_a"], move |_, s, out| {
        out[0] = -0.5 * gamma * grid.b1(&h, s[0], delta);
        Ok(())
    })
}

/// `c_k = C(2k, k) / (4^k (2k-1)!)`: the weight of `delta^(2k-1) h^(2k-1)`
/// in the averaged field, from `int_0^1 sin^(2k)(2 pi t) dt = C(2k, k) / 4^k`.
pub fn taylor_coefficient(k: u32) -> f64 {
    assert!(k >= 1);
    let central_binomial = (1..=k).fold(1.0, |acc, i| acc * (k + i) as f64 / i as f64);
    let factorial = (1..2 * k).fold(1.0, |acc, i| acc * i as f64);
    central_binomial / (4f64.powi(k as i32) * factorial)
}

/// Gradient-only average `x_a' = -gamma c_1 delta h'(x_a)`.
pub fn taylor_first_order_average(h: &CostFunction, params: &SimParams) -> OdeSystem {
    let system = taylor_series_average(h, params, 1);
    OdeSystem {
        label: "taylor1_avg".into(),
        ..system
    }
}

/// Taylor-series average truncated after `order` odd derivatives.
pub fn taylor_full_average(h: &CostFunction, params: &SimParams, order: u32) -> Result<OdeSystem> {
    if !(1..=MAX_TAYLOR_ORDER).contains(&order) {
        return Err(Error::invalid(
            "taylor order",
            format!("must lie in 1..={MAX_TAYLOR_ORDER}, got {order}"),
        ));
    }
    Ok(taylor_series_average(h, params, order))
}

fn taylor_series_average(h: &CostFunction, params: &SimParams, order: u32) -> OdeSystem {
    let (h, gamma, delta) = (h.clone(), params.gamma, params.delta);
    let terms: Vec<(u32, f64, f64)> = (1..=order)
        .map(|k| {
            let deriv = 2 * k - 1;
            let weight = taylor_coefficient(k) * delta.powi(deriv as i32);
            (deriv, weight, crate::cost::default_derivative_step(deriv))
        })
        .collect();
    OdeSystem::new(format!("taylor{order}_avg"), &["x_a"], move |_, s, out| {
        let mut acc = 0.0;
        for &(deriv, weight, step) in &terms {
            acc += weight * numeric_derivative(&h, s[0], deriv, step)?;
        }
        out[0] = -gamma * acc;
        Ok(())
    })
}

/// High-pass-filtered loop over `(x, ybar)`.
pub fn hpf_es(h: &CostFunction, params: &SimParams) -> OdeSystem {
    let (h, gamma, delta) = (h.clone(), params.gamma, params.delta);
    OdeSystem::new("hpf", &["x", "ybar"], move |t, s, out| {
        let u = dither(t);
        let e = h.eval(s[0] + delta * u) - s[1];
        out[0] = -gamma * e * u;
        out[1] = gamma * e;
        Ok(())
    })
}

/// Averaged HPF loop: the Fourier average cascaded into a first-order
/// filter driven by `a_0(x_a)/2`.
pub fn hpf_average(h: &CostFunction, params: &SimParams) -> OdeSystem {
    hpf_average_on(h, params, PeriodicGrid::shared_default())
}

pub fn hpf_average_on(h: &CostFunction, params: &SimParams, grid: Arc<PeriodicGrid>) -> OdeSystem {
    let (h, gamma, delta) = (h.clone(), params.gamma, params.delta);
    OdeSystem::new("hpf_avg", &["x_a", "ybar_a"], move |_, s, out| {
        let (a0, b1) = grid.a0_b1(&h, s[0], delta);
        out[0] = -0.5 * gamma * b1;
        out[1] = -gamma * s[1] + 0.5 * gamma * a0;
        Ok(())
    })
}

/// `x1' = -gamma h(x1) u(t)`: the classic loop with the dither removed from
/// the cost argument. Aborts where `h` vanishes.
pub fn support_oscillator(h: &CostFunction, params: &SimParams) -> OdeSystem {
    let (h, gamma) = (h.clone(), params.gamma);
    OdeSystem::new("support_osc", &["x1"], move |t, s, out| {
        let value = h.eval(s[0]);
        if value.abs() < SUPPORT_MIN_COST {
            return Err(Error::VanishingCost { x: s[0], value });
        }
        out[0] = -gamma * value * dither(t);
        Ok(())
    })
}

/// Separable solution of the support oscillator:
/// `H(x1(t)) = H(x10) + (gamma / 2 pi)(cos(2 pi t) - 1)` with
/// `H(x) = int_{x10}^x dxi / h(xi)`, inverted by bisection.
pub fn support_closed_form(h: &CostFunction, x10: f64, gamma: f64, t: f64) -> Result<f64> {
    let h_start = h.eval(x10);
    if h_start.abs() < SUPPORT_MIN_COST {
        return Err(Error::VanishingCost {
            x: x10,
            value: h_start,
        });
    }
    let target = gamma / TAU * ((TAU * t).cos() - 1.0);
    if target == 0.0 {
        return Ok(x10);
    }
    // H is increasing where h > 0, so x moves along sign(target * h)
    let direction = (target * h_start).signum();
    let sign = h_start.signum();
    let primitive = |x: f64| -> Option<f64> { reciprocal_integral(h, x10, x, sign) };

    let mut width = 1.5 * target.abs() * h_start.abs() + 1e-9;
    let mut far = x10 + direction * width;
    let mut bracketed = false;
    for _ in 0..64 {
        match primitive(far) {
            None => break,
            Some(value) if value * target.signum() >= target.abs() => {
                bracketed = true;
                break;
            }
            Some(_) => {
                width *= 2.0;
                far = x10 + direction * width;
            }
        }
    }
    if !bracketed {
        return Err(Error::NoBracket { target, start: x10 });
    }
    let tol = 1e-13 * (1.0 + far.abs().max(x10.abs()));
    bisect(
        |x| primitive(x).map_or(f64::NAN, |v| v - target),
        x10,
        far,
        tol,
    )
    .ok_or(Error::NoBracket { target, start: x10 })
}

/// `int_a^b dxi / h(xi)` by composite Simpson, or `None` if `h` changes sign
/// or vanishes on the way.
fn reciprocal_integral(h: &CostFunction, a: f64, b: f64, sign: f64) -> Option<f64> {
    if a == b {
        return Some(0.0);
    }
    let panels = (((b - a).abs() / 2e-3).ceil() as usize).max(16);
    let panels = panels + panels % 2;
    let step = (b - a) / panels as f64;
    let mut acc = 0.0;
    for j in 0..=panels {
        let value = h.eval(a + step * j as f64);
        if value * sign < SUPPORT_MIN_COST {
            return None;
        }
        let w = if j == 0 || j == panels {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w / value;
    }
    Some(acc * step / 3.0)
}

/// Every scheme the toolkit can simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Classic,
    Hpf,
    FourierAverage,
    HpfAverage,
    TaylorFirstOrder,
    TaylorFull { order: u32 },
    SupportOscillator,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Classic => "classic",
            Scheme::Hpf => "hpf",
            Scheme::FourierAverage => "fourier_avg",
            Scheme::HpfAverage => "hpf_avg",
            Scheme::TaylorFirstOrder => "taylor1_avg",
            Scheme::TaylorFull { .. } => "taylor_full_avg",
            Scheme::SupportOscillator => "support_osc",
        }
    }

    /// Whether the scheme is an averaged model built from Fourier or
    /// Taylor coefficients.
    pub fn is_averaged(&self) -> bool {
        matches!(
            self,
            Scheme::FourierAverage
                | Scheme::HpfAverage
                | Scheme::TaylorFirstOrder
                | Scheme::TaylorFull { .. }
        )
    }

    pub fn system(&self, h: &CostFunction, params: &SimParams) -> Result<OdeSystem> {
        Ok(match *self {
            Scheme::Classic => classic_es(h, params),
            Scheme::Hpf => hpf_es(h, params),
            Scheme::FourierAverage => fourier_average(h, params),
            Scheme::HpfAverage => hpf_average(h, params),
            Scheme::TaylorFirstOrder => taylor_first_order_average(h, params),
            Scheme::TaylorFull { order } => taylor_full_average(h, params, order)?,
            Scheme::SupportOscillator => support_oscillator(h, params),
        })
    }

    /// `[x0]`, or `[x0, ybar0]` with `ybar0` defaulting to `h(x0)`.
    pub fn initial_state(&self, h: &CostFunction, params: &SimParams) -> Vec<f64> {
        match self {
            Scheme::Hpf | Scheme::HpfAverage => {
                vec![params.x0, params.ybar0.unwrap_or_else(|| h.eval(params.x0))]
            }
            _ => vec![params.x0],
        }
    }

    pub fn simulate(&self, h: &CostFunction, params: &SimParams) -> Result<Trajectory> {
        params.validate()?;
        let system = self.system(h, params)?;
        integrate(&system, &self.initial_state(h, params), params)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Accepts the names returned by [`Scheme::name`]; `taylor_full_avg`
    /// takes an optional order suffix such as `taylor_full_avg:3`.
    fn from_str(s: &str) -> Result<Self> {
        let (base, order) = match s.split_once(':') {
            Some((b, o)) => {
                let order = o
                    .parse()
                    .map_err(|_| Error::invalid("scheme", format!("bad taylor order in `{s}`")))?;
                (b, Some(order))
            }
            None => (s, None),
        };
        let scheme = match base {
            "classic" => Scheme::Classic,
            "hpf" => Scheme::Hpf,
            "fourier_avg" => Scheme::FourierAverage,
            "hpf_avg" => Scheme::HpfAverage,
            "taylor1_avg" => Scheme::TaylorFirstOrder,
            "taylor_full_avg" => Scheme::TaylorFull {
                order: order.unwrap_or(2),
            },
            "support_osc" => Scheme::SupportOscillator,
            other => {
                return Err(Error::invalid(
                    "scheme",
                    format!("unknown scheme `{other}`"),
                ))
            }
        };
        if order.is_some() && !matches!(scheme, Scheme::TaylorFull { .. }) {
            return Err(Error::invalid("scheme", format!("`{base}` takes no order")));
        }
        Ok(scheme)
    }
}
