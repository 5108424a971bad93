//! Equilibria of the averaged field and measurements on sampled trajectories.

use std::fmt;

use crate::cost::CostFunction;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::fourier::PeriodicGrid;
use crate::root::bisect;

/// Brackets are refined until they are narrower than this.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Roots closer than this are reported once.
pub const ROOT_MERGE_DISTANCE: f64 = 1e-8;
/// Smallest grid accepted by [`find_equilibria`].
pub const MIN_SCAN_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub x: f64,
    pub stability: Stability,
    /// `b_1` evaluated at `x`
    pub residual: f64,
}

/// Zeros of `b_1` on a search interval for one dither amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub delta: f64,
    pub search_interval: (f64, f64),
    pub roots: Vec<Equilibrium>,
    /// Hull of all roots; `None` when no sign change was found.
    pub attractor_interval: Option<(f64, f64)>,
}

impl EquilibriumReport {
    pub fn stable_roots(&self) -> impl Iterator<Item = &Equilibrium> {
        self.roots
            .iter()
            .filter(|r| r.stability == Stability::Stable)
    }

    /// Whether the attractor estimate lies in `[x_star - delta - tol, x_star + delta + tol]`.
    /// An empty report is never contained.
    pub fn contained(&self, x_star: f64, tol: f64) -> bool {
        self.attractor_interval.is_some_and(|(lo, hi)| {
            lo >= x_star - self.delta - tol && hi <= x_star + self.delta + tol
        })
    }
}

/// Search window `[x* - 3 delta, x* + 3 delta]` around the minimiser hint.
pub fn default_search_interval(h: &CostFunction, delta: f64) -> Option<(f64, f64)> {
    h.minimiser_hint()
        .map(|x| (x - 3.0 * delta, x + 3.0 * delta))
}

/// Scans `b_1(., delta)` on `grid_n` points, bisects every sign change and
/// classifies each root by the sign of `b_1` on either side. A root where
/// `b_1` goes from negative to positive attracts the averaged flow
/// `x' = -(gamma/2) b_1(x)`.
pub fn find_equilibria(
    h: &CostFunction,
    delta: f64,
    search_interval: (f64, f64),
    grid_n: usize,
) -> Result<EquilibriumReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(
            "delta",
            format!("must be positive, got {delta}"),
        ));
    }
    if grid_n < MIN_SCAN_POINTS {
        return Err(Error::invalid(
            "grid_n",
            format!("need at least {MIN_SCAN_POINTS} points, got {grid_n}"),
        ));
    }
    let (lo, hi) = search_interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(
            "search interval",
            format!("[{lo}, {hi}] is empty or unbounded"),
        ));
    }

    let grid = PeriodicGrid::shared_default();
    let field = |x: f64| grid.b1(h, x, delta);
    let step = (hi - lo) / (grid_n - 1) as f64;
    let xs: Vec<f64> = (0..grid_n)
        .map(|i| {
            if i == grid_n - 1 {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect();
    let values: Vec<f64> = xs.iter().map(|&x| field(x)).collect();

    let classify = |left: f64, right: f64| {
        if left < 0.0 && right > 0.0 {
            Stability::Stable
        } else if left > 0.0 && right < 0.0 {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    };

    let mut roots: Vec<Equilibrium> = Vec::new();
    let mut push = |x: f64, stability: Stability| {
        if roots
            .last()
            .is_some_and(|r: &Equilibrium| (x - r.x).abs() < ROOT_MERGE_DISTANCE)
        {
            return;
        }
        roots.push(Equilibrium {
            x,
            stability,
            residual: field(x),
        });
    };

    for i in 0..grid_n {
        let v = values[i];
        if v == 0.0 {
            let left = if i > 0 { values[i - 1] } else { v };
            let right = if i + 1 < grid_n { values[i + 1] } else { v };
            push(xs[i], classify(left, right));
        } else if i + 1 < grid_n && values[i + 1] != 0.0 && v.signum() != values[i + 1].signum() {
            if let Some(x) = bisect(field, xs[i], xs[i + 1], ROOT_TOLERANCE) {
                push(x, classify(v, values[i + 1]));
            }
        }
    }

    let attractor_interval = roots
        .first()
        .zip(roots.last())
        .map(|(first, last)| (first.x, last.x));
    Ok(EquilibriumReport {
        delta,
        search_interval,
        roots,
        attractor_interval,
    })
}

/// Steady state `a_0(x_a)/2` of the averaged filter at a frozen `x_a`.
pub fn tau_graph(h: &CostFunction, x_a: f64, delta: f64) -> Result<f64> {
    Ok(crate::fourier::a0(h, x_a, delta)? / 2.0)
}

/// Earliest sample time after which the component stays within `d` of
/// `target_center` until the end of the trajectory.
pub fn convergence_time(
    traj: &Trajectory,
    component: usize,
    target_center: f64,
    d: f64,
) -> Option<f64> {
    assert!(d > 0.0, "band half-width must be positive");
    let series = traj.component(component);
    match series.iter().rposition(|x| (x - target_center).abs() > d) {
        None => traj.times().first().copied(),
        Some(i) if i + 1 < series.len() => Some(traj.times()[i + 1]),
        Some(_) => None,
    }
}

/// Half the peak-to-peak range of the component over the trailing `window`.
pub fn oscillation_amplitude(traj: &Trajectory, component: usize, window: f64) -> f64 {
    assert!(window <= traj.t_end() + 1e-12, "window exceeds the horizon");
    let start = traj.t_end() - window - 1e-12;
    let (lo, hi) = traj
        .times()
        .iter()
        .zip(traj.states())
        .filter(|(t, _)| **t >= start)
        .map(|(_, s)| s[component])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
    if lo.is_finite() {
        (hi - lo) / 2.0
    } else {
        0.0
    }
}

/// Sup-distance between two trajectories sampled on the same time grid.
pub fn tracking_error(traj_a: &Trajectory, traj_b: &Trajectory, component: usize) -> Result<f64> {
    let same_grid = traj_a.len() == traj_b.len()
        && traj_a
            .times()
            .iter()
            .zip(traj_b.times())
            .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    if !same_grid {
        return Err(Error::GridMismatch);
    }
    Ok(traj_a
        .states()
        .zip(traj_b.states())
        .map(|(a, b)| (a[component] - b[component]).abs())
        .fold(0.0, f64::max))
}

/// Checks `|h(x + delta u) - h(x)| <= L_r delta` at `n_samples` dither phases.
pub fn remainder_check(
    h: &CostFunction,
    x: f64,
    delta: f64,
    lipschitz: f64,
    n_samples: usize,
) -> bool {
    let base = h.eval(x);
    let bound = lipschitz * delta;
    (0..n_samples.max(1)).all(|j| {
        let u = crate::fourier::dither(j as f64 / n_samples.max(1) as f64);
        let gap = (h.eval(x + delta * u) - base).abs();
        gap <= bound + 1e-12 * (1.0 + base.abs())
    })
}

/// Convergence, oscillation and tracking figures for one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryMetrics {
    pub convergence_time: Option<f64>,
    pub oscillation_amplitude: f64,
    pub tracking_error: Option<f64>,
}

impl TrajectoryMetrics {
    pub fn measure(
        traj: &Trajectory,
        component: usize,
        target_center: f64,
        band: f64,
        window: f64,
        reference: Option<&Trajectory>,
    ) -> Result<Self> {
        Ok(Self {
            convergence_time: convergence_time(traj, component, target_center, band),
            oscillation_amplitude: oscillation_amplitude(traj, component, window.min(traj.t_end())),
            tracking_error: reference
                .map(|r| tracking_error(traj, r, component))
                .transpose()?,
        })
    }
}
