//! Cost functions and the local constants that tune the seeking loop.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default grid size for [`estimate_interval_constants`].
pub const DEFAULT_INTERVAL_GRID: usize = 4096;

/// A scalar cost `h: R -> R`, cheap to clone and shareable across threads.
#[derive(Clone)]
pub struct CostFunction {
    eval: ScalarFn,
    minimiser_hint: Option<f64>,
    label: String,
}

impl CostFunction {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            minimiser_hint: None,
            label: label.into(),
        }
    }

    pub fn with_minimiser(mut self, x_star: f64) -> Self {
        self.minimiser_hint = Some(x_star);
        self
    }

    /// The piecewise benchmark with a saddle at `pi` and its global minimum
    /// `h0 - 3` at `2 pi`.
    pub fn benchmark(h0: f64) -> Self {
        Self::new(format!("benchmark(h0={h0})"), move |x| {
            benchmark_cost(x, h0)
        })
        .with_minimiser(2.0 * PI)
    }

    pub fn quadratic(x_star: f64) -> Self {
        Self::new(format!("quadratic(x*={x_star})"), move |x| {
            quadratic_cost(x, x_star)
        })
        .with_minimiser(x_star)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("constant({c})"), move |_| c)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn minimiser_hint(&self) -> Option<f64> {
        self.minimiser_hint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `h + h0`. The minimiser is unchanged.
    pub fn shifted(&self, h0: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        Self {
            eval: Arc::new(move |x| inner(x) + h0),
            minimiser_hint: self.minimiser_hint,
            label: format!("{}+{h0}", self.label),
        }
    }

    /// `self + c * other`. The minimiser hint is dropped since it is no
    /// longer known in general.
    pub fn plus_scaled(&self, c: f64, other: &CostFunction) -> Self {
        let a = Arc::clone(&self.eval);
        let b = Arc::clone(&other.eval);
        Self {
            eval: Arc::new(move |x| a(x) + c * b(x)),
            minimiser_hint: None,
            label: format!("{}+{c}*{}", self.label, other.label),
        }
    }

    /// Derivative of the given order with the default finite-difference step.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        numeric_derivative(self, x, order, default_derivative_step(order))
            .expect("default step is positive")
    }

    /// Checks the minimiser hint against a uniform grid on `[lo, hi]`:
    /// every grid point other than the minimiser must have a strictly larger
    /// cost. Returns `false` when no hint is set.
    pub fn verify_minimiser(&self, lo: f64, hi: f64, n: usize) -> bool {
        let Some(x_star) = self.minimiser_hint else {
            return false;
        };
        let h_star = self.eval(x_star);
        let step = (hi - lo) / (n.max(2) - 1) as f64;
        (0..n.max(2))
            .map(|i| lo + step * i as f64)
            .filter(|&x| x != x_star)
            .all(|x| self.eval(x) > h_star)
    }
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("label", &self.label)
            .field("minimiser_hint", &self.minimiser_hint)
            .finish_non_exhaustive()
    }
}

/// Piecewise benchmark cost: quadratic left of `pi`, cosine on `[pi, 2 pi)`,
/// quadratic from `2 pi` on. Continuous and C^1 everywhere.
pub fn benchmark_cost(x: f64, h0: f64) -> f64 {
    let base = if x < PI {
        (x - PI).powi(2) - 1.0
    } else if x < 2.0 * PI {
        (x - PI).cos() - 2.0
    } else {
        (x - 2.0 * PI).powi(2) - 3.0
    };
    h0 + base
}

pub fn quadratic_cost(x: f64, x_star: f64) -> f64 {
    (x - x_star).powi(2)
}

/// Grid estimates of the Lipschitz constant and magnitude bound of a cost on
/// `[center - radius, center + radius]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalConstants {
    pub center: f64,
    pub radius: f64,
    pub lipschitz: f64,
    pub magnitude: f64,
}

/// Samples `h` on `n` uniform points over `[center - r, center + r]` and
/// returns the largest adjacent difference quotient and the largest `|h|`.
///
/// Both are lower estimates of the true constants. On nested grids
/// (`n -> 2n - 1`) they are nondecreasing.
pub fn estimate_interval_constants(
    h: &CostFunction,
    center: f64,
    r: f64,
    n: usize,
) -> Result<IntervalConstants> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(
            "radius",
            format!("must be positive and finite, got {r}"),
        ));
    }
    if n < 2 {
        return Err(Error::invalid(
            "grid size",
            format!("need at least 2 points, got {n}"),
        ));
    }
    if !center.is_finite() {
        return Err(Error::invalid("center", "must be finite"));
    }
    let lo = center - r;
    let step = 2.0 * r / (n - 1) as f64;
    let mut prev_x = lo;
    let mut prev_h = h.eval(lo);
    let mut lipschitz = 0.0_f64;
    let mut magnitude = prev_h.abs();
    for i in 1..n {
        let x = if i == n - 1 {
            center + r
        } else {
            lo + step * i as f64
        };
        let hx = h.eval(x);
        lipschitz = lipschitz.max((hx - prev_h).abs() / (x - prev_x));
        magnitude = magnitude.max(hx.abs());
        prev_x = x;
        prev_h = hx;
    }
    Ok(IntervalConstants {
        center,
        radius: r,
        lipschitz,
        magnitude,
    })
}

/// Finite-difference step used when none is given.
///
/// Orders 1 and 3 use `1e-5` and `1e-3`; higher orders widen the step so
/// that round-off (which scales like `eps / step^order`) stays bounded.
pub fn default_derivative_step(order: u32) -> f64 {
    match order {
        0 | 1 => 1e-5,
        2 => 1e-4,
        3 | 4 => 1e-3,
        5 | 6 => 1e-2,
        7 | 8 => 3e-2,
        _ => 5e-2,
    }
}

/// Central finite difference of the given order with node spacing `step`.
///
/// Uses the nodes `x + (order/2 - j) * step`, `j = 0..=order`, so the
/// truncation error is `O(step^2)` for every order.
pub fn numeric_derivative(h: &CostFunction, x: f64, order: u32, step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid(
            "step",
            format!("must be positive, got {step}"),
        ));
    }
    if order == 0 {
        return Err(Error::invalid("order", "must be at least 1"));
    }
    let n = order as i64;
    let half = order as f64 / 2.0;
    let mut binom = 1.0_f64;
    let mut acc = 0.0;
    for j in 0..=n {
        if j > 0 {
            binom = binom * (n - j + 1) as f64 / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * h.eval(x + (half - j as f64) * step);
    }
    Ok(acc / step.powi(order as i32))
}

/// A class-K-infinity comparison function, supplied by the caller.
#[derive(Clone)]
pub struct ClassKInf {
    f: ScalarFn,
    label: String,
}

impl ClassKInf {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// `s -> s^p` for `p > 0`.
    pub fn power(p: f64) -> Self {
        Self::new(format!("s^{p}"), move |s: f64| s.signum() * s.abs().powf(p))
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl Default for ClassKInf {
    fn default() -> Self {
        Self::new("s", |s| s)
    }
}

impl fmt::Debug for ClassKInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ClassKInf").field(&self.label).finish()
    }
}
