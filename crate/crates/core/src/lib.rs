//! Scalar extremum seeking with a sinusoidal dither.
//!
//! The crate simulates the classic dither-correlation loop
//! `x' = -gamma * h(x + delta*u(t)) * u(t)` with `u(t) = sin(2 pi t)`, its
//! high-pass-filtered variant, and several averaged models of both. The
//! averaged models are built from the Fourier coefficients of the perturbed
//! readout `t -> h(x + delta*u(t))`, computed by periodic trapezoid
//! quadrature. Time is measured in dither periods throughout.
//!
//! Modules:
//! - [`cost`]: cost functions, the piecewise benchmark, interval constants, finite differences
//! - [`fourier`]: dither, perturbed readout, Fourier coefficients, the `delta_star_lower` bound
//! - [`dynamics`]: right-hand sides for every scheme and a fixed-step RK4 integrator
//! - [`analysis`]: equilibria of the averaged field, trajectory metrics, remainder checks

pub mod analysis;
pub mod cost;
pub mod dynamics;
mod error;
pub mod fourier;
mod root;

pub use analysis::{
    convergence_time, find_equilibria, oscillation_amplitude, remainder_check, tau_graph,
    tracking_error, EquilibriumReport, Stability, TrajectoryMetrics,
};
pub use cost::{
    benchmark_cost, estimate_interval_constants, numeric_derivative, quadratic_cost, ClassKInf,
    CostFunction, IntervalConstants,
};
pub use dynamics::{
    integrate, OdeSystem, Scheme, SimParams, Trajectory, DEFAULT_DT, DEFAULT_T_END,
};
pub use error::{Error, Result};
pub use fourier::{
    a0, b1, delta_star_lower, dither, fourier_coefficients, y_delta, FourierCoefficients,
    PeriodicGrid,
};
