//! Dither signal, perturbed readout and its Fourier coefficients.
//!
//! For a frozen state `x` the readout `t -> h(x + delta*sin(2 pi t))` is
//! 1-periodic, with
//!
//! ```text
//! a_k(x) = 2 * int_0^1 y(x, t) cos(2 pi k t) dt
//! b_k(x) = 2 * int_0^1 y(x, t) sin(2 pi k t) dt
//! ```
//!
//! Integrals over one period use the composite trapezoid rule on `n`
//! equispaced nodes, which converges geometrically for smooth periodic
//! integrands.

use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use crate::cost::{ClassKInf, CostFunction};
use crate::error::{Error, Result};

/// Quadrature nodes per period used when the caller does not choose.
pub const DEFAULT_N_QUAD: usize = 4096;
/// Harmonics reported by default.
pub const DEFAULT_K_MAX: usize = 8;

/// `u(t) = sin(2 pi t)`.
#[inline]
pub fn dither(t: f64) -> f64 {
    (TAU * t).sin()
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "delta",
            format!("dither amplitude must be positive, got {delta}"),
        ))
    }
}

/// `y(x, t) = h(x + delta * u(t))`.
pub fn y_delta(h: &CostFunction, x: f64, delta: f64, t: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(h.eval(x + delta * dither(t)))
}

/// Equispaced nodes on one dither period with cached `sin`/`cos` tables.
#[derive(Debug, Clone)]
pub struct PeriodicGrid {
    sin: Vec<f64>,
    cos: Vec<f64>,
    /// Distinct dither values with their multiplicities. Nodes `j` and
    /// `n/2 - j` carry the same `sin`, so for even `n` the readout only has
    /// to be evaluated at about half the nodes when the weight is a function
    /// of the dither alone (`a_0`, `b_1`).
    folded: Vec<(f64, f64)>,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(
                "n_quad",
                format!("need at least 2 nodes, got {n}"),
            ));
        }
        let (sin, cos): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|j| {
                let phase = TAU * j as f64 / n as f64;
                (phase.sin(), phase.cos())
            })
            .unzip();
        let folded = fold_nodes(&sin);
        Ok(Self { sin, cos, folded })
    }

    /// Process-wide grid with [`DEFAULT_N_QUAD`] nodes.
    pub fn shared_default() -> Arc<PeriodicGrid> {
        static GRID: OnceLock<Arc<PeriodicGrid>> = OnceLock::new();
        Arc::clone(GRID.get_or_init(|| Arc::new(PeriodicGrid::new(DEFAULT_N_QUAD).unwrap())))
    }

    pub fn len(&self) -> usize {
        self.sin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sin.is_empty()
    }

    /// Dither samples `u(j/n)`.
    pub fn dither_samples(&self) -> &[f64] {
        &self.sin
    }

    /// `(1/n) * sum_j f(j/n)`, the trapezoid rule for a 1-periodic `f`.
    pub fn mean<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let n = self.len();
        (0..n).map(|j| f(j as f64 / n as f64)).sum::<f64>() / n as f64
    }

    /// First sine coefficient `b_1(x)`. `delta` is not validated.
    pub fn b1(&self, h: &CostFunction, x: f64, delta: f64) -> f64 {
        let acc: f64 = self
            .folded
            .iter()
            .map(|&(s, w)| w * h.eval(x + delta * s) * s)
            .sum();
        2.0 * acc / self.len() as f64
    }

    /// `(a_0(x), b_1(x))` in a single sweep over the nodes. `delta` is not
    /// validated.
    pub fn a0_b1(&self, h: &CostFunction, x: f64, delta: f64) -> (f64, f64) {
        let (mut a0, mut b1) = (0.0, 0.0);
        for &(s, w) in &self.folded {
            let y = w * h.eval(x + delta * s);
            a0 += y;
            b1 += y * s;
        }
        let scale = 2.0 / self.len() as f64;
        (scale * a0, scale * b1)
    }

    /// All coefficients up to `k_max`. Requires `n >= 8 * k_max`.
    pub fn coefficients(
        &self,
        h: &CostFunction,
        x: f64,
        delta: f64,
        k_max: usize,
    ) -> Result<FourierCoefficients> {
        check_delta(delta)?;
        if k_max == 0 {
            return Err(Error::invalid("k_max", "must be at least 1"));
        }
        let n = self.len();
        if n < 8 * k_max {
            return Err(Error::invalid(
                "n_quad",
                format!(
                    "{n} nodes alias harmonics up to {k_max}; need at least {}",
                    8 * k_max
                ),
            ));
        }
        let mut a = vec![0.0; k_max + 1];
        let mut b = vec![0.0; k_max];
        for j in 0..n {
            let y = h.eval(x + delta * self.sin[j]);
            a[0] += y;
            for k in 1..=k_max {
                let idx = (k * j) % n;
                a[k] += y * self.cos[idx];
                b[k - 1] += y * self.sin[idx];
            }
        }
        let scale = 2.0 / n as f64;
        a.iter_mut().chain(b.iter_mut()).for_each(|c| *c *= scale);
        Ok(FourierCoefficients {
            x,
            delta,
            k_max,
            a,
            b,
        })
    }
}

fn fold_nodes(sin: &[f64]) -> Vec<(f64, f64)> {
    let n = sin.len();
    if n % 2 == 1 {
        return sin.iter().map(|&s| (s, 1.0)).collect();
    }
    (0..n)
        .filter_map(|j| {
            let mirror = (n + n / 2 - j) % n;
            match j.cmp(&mirror) {
                std::cmp::Ordering::Less => Some((sin[j], 2.0)),
                std::cmp::Ordering::Equal => Some((sin[j], 1.0)),
                std::cmp::Ordering::Greater => None,
            }
        })
        .collect()
}

/// Truncated Fourier series of the readout at a frozen state.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    pub x: f64,
    pub delta: f64,
    pub k_max: usize,
    /// `a_0 ..= a_k_max`
    pub a: Vec<f64>,
    /// `b_1 ..= b_k_max`, stored from index 0
    pub b: Vec<f64>,
}

impl FourierCoefficients {
    pub fn a(&self, k: usize) -> f64 {
        self.a[k]
    }

    /// `b_k` for `k >= 1`.
    pub fn b(&self, k: usize) -> f64 {
        assert!(k >= 1, "sine coefficients start at k = 1");
        self.b[k - 1]
    }

    /// Evaluates `a_0/2 + sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t)`.
    pub fn reconstruct(&self, t: f64) -> f64 {
        let harmonics: f64 = (1..=self.k_max)
            .map(|k| {
                let phase = TAU * k as f64 * t;
                self.a[k] * phase.cos() + self.b[k - 1] * phase.sin()
            })
            .sum();
        self.a[0] / 2.0 + harmonics
    }

    /// Largest gap between the readout and the truncated series over `n`
    /// equispaced phases.
    pub fn reconstruction_residual(&self, h: &CostFunction, n: usize) -> f64 {
        (0..n)
            .map(|j| {
                let t = j as f64 / n as f64;
                (h.eval(self.x + self.delta * dither(t)) - self.reconstruct(t)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Fourier coefficients of the readout with `n_quad` trapezoid nodes.
pub fn fourier_coefficients(
    h: &CostFunction,
    x: f64,
    delta: f64,
    k_max: usize,
    n_quad: usize,
) -> Result<FourierCoefficients> {
    check_delta(delta)?;
    if n_quad < 8 * k_max {
        return Err(Error::invalid(
            "n_quad",
            format!(
                "{n_quad} nodes alias harmonics up to {k_max}; need at least {}",
                8 * k_max
            ),
        ));
    }
    let grid = if n_quad == DEFAULT_N_QUAD {
        PeriodicGrid::shared_default()
    } else {
        Arc::new(PeriodicGrid::new(n_quad)?)
    };
    grid.coefficients(h, x, delta, k_max)
}

/// `b_1(x)` on the default grid.
pub fn b1(h: &CostFunction, x: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(PeriodicGrid::shared_default().b1(h, x, delta))
}

/// `a_0(x)` on the default grid.
pub fn a0(h: &CostFunction, x: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(PeriodicGrid::shared_default().a0_b1(h, x, delta).0)
}

/// Panels used by [`delta_star_lower`].
pub const DELTA_STAR_PANELS: usize = 4096;

/// `2 * int_0^{1/2} alpha(s * sin(2 pi t)) dt`.
///
/// The integrand is not periodic on the half period, so this uses composite
/// Simpson rather than the trapezoid rule.
pub fn delta_star_lower(alpha: &ClassKInf, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid(
            "s",
            format!("must be nonnegative and finite, got {s}"),
        ));
    }
    if alpha.eval(0.0).abs() > 1e-12 {
        return Err(Error::invalid("alpha", "alpha(0) must be 0"));
    }
    if s > 0.0 {
        let (q, hlf, full) = (alpha.eval(0.25 * s), alpha.eval(0.5 * s), alpha.eval(s));
        if !(0.0 < q && q < hlf && hlf < full) {
            return Err(Error::invalid("alpha", "must be strictly increasing"));
        }
    } else {
        return Ok(0.0);
    }
    let n = DELTA_STAR_PANELS;
    let step = 0.5 / n as f64;
    let f = |t: f64| alpha.eval(s * (2.0 * PI * t).sin());
    let interior: f64 = (1..n)
        .map(|j| {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            w * f(j as f64 * step)
        })
        .sum();
    let integral = step / 3.0 * (f(0.0) + interior + f(0.5));
    Ok(2.0 * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dither_values() {
        assert_eq!(dither(0.0), 0.0);
        assert_abs_diff_eq!(dither(0.25), 1.0, epsilon = 1e-15);
        assert!(dither(1.0).abs() < 1e-15);
    }

    #[test]
    fn readout_values() {
        let sq = CostFunction::quadratic(0.0);
        assert_abs_diff_eq!(y_delta(&sq, 0.0, 0.5, 0.25).unwrap(), 0.25, epsilon = 1e-15);
        let bench = CostFunction::benchmark(0.0);
        assert_abs_diff_eq!(
            y_delta(&bench, 2.0 * PI, 0.1, 0.0).unwrap(),
            -3.0,
            epsilon = 1e-15
        );
        assert!(y_delta(&sq, 0.0, 0.0, 0.1).is_err());
        assert!(y_delta(&sq, 0.0, -0.1, 0.1).is_err());
    }

    #[test]
    fn readout_is_periodic() {
        let bench = CostFunction::benchmark(3.0);
        for t in [0.0, 0.13, 0.5, 0.77] {
            let a = y_delta(&bench, 4.0, 0.3, t).unwrap();
            let b = y_delta(&bench, 4.0, 0.3, t + 1.0).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    // (x + d sin)^2 = x^2 + d^2/2 + 2 d x sin - (d^2/2) cos(2 .)
    fn quadratic_oracle(x: f64, d: f64) -> (f64, f64, f64) {
        (2.0 * x * x + d * d, 2.0 * d * x, -d * d / 2.0)
    }

    #[test]
    fn quadratic_coefficients_match_expansion() {
        let sq = CostFunction::quadratic(0.0);
        let c = fourier_coefficients(&sq, 1.0, 0.5, 2, 64).unwrap();
        let (a0, b1, a2) = quadratic_oracle(1.0, 0.5);
        assert_abs_diff_eq!(c.a(0), a0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.b(1), b1, epsilon = 1e-10);
        assert_abs_diff_eq!(c.a(2), a2, epsilon = 1e-10);
        assert_abs_diff_eq!(c.a(1), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.b(2), 0.0, epsilon = 1e-10);
        assert_eq!(c.a.len(), 3);
        assert_eq!(c.b.len(), 2);
        assert!(c.reconstruction_residual(&sq, 257) < 1e-12);
    }

    #[test]
    fn constant_has_no_harmonics() {
        let c = fourier_coefficients(&CostFunction::constant(4.2), -3.0, 0.7, 8, 256).unwrap();
        assert_abs_diff_eq!(c.a(0), 8.4, epsilon = 1e-12);
        for k in 1..=8 {
            assert_abs_diff_eq!(c.a(k), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.b(k), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn aliasing_guard() {
        let sq = CostFunction::quadratic(0.0);
        assert!(fourier_coefficients(&sq, 0.0, 0.1, 8, 63).is_err());
        assert!(fourier_coefficients(&sq, 0.0, 0.1, 8, 64).is_ok());
        assert!(fourier_coefficients(&sq, 0.0, 0.0, 8, 64).is_err());
    }

    #[test]
    fn b1_values() {
        let sq = CostFunction::quadratic(0.0);
        assert_abs_diff_eq!(b1(&sq, 0.0, 0.1).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b1(&sq, 2.0, 0.1).unwrap(), 0.4, epsilon = 1e-10);
        assert!(b1(&sq, 2.0, -0.1).is_err());
    }

    #[test]
    fn b1_sign_follows_gradient_on_benchmark() {
        let bench = CostFunction::benchmark(0.0);
        let x = 2.0 * PI + 0.05;
        let dense = PeriodicGrid::new(1 << 16).unwrap().b1(&bench, x, 0.1);
        let got = b1(&bench, x, 0.1).unwrap();
        assert!(dense > 0.0 && got > 0.0);
        assert_abs_diff_eq!(got, dense, epsilon = 1e-8);
    }

    #[test]
    fn folded_sums_match_full_sums() {
        let bench = CostFunction::benchmark(7.0);
        for n in [64, 4096, 4098, 333] {
            let grid = PeriodicGrid::new(n).unwrap();
            let c = grid.coefficients(&bench, 3.3, 0.4, 1).unwrap();
            let (a0, b1) = grid.a0_b1(&bench, 3.3, 0.4);
            assert_abs_diff_eq!(a0, c.a(0), epsilon = 1e-12);
            assert_abs_diff_eq!(b1, c.b(1), epsilon = 1e-12);
            assert_abs_diff_eq!(grid.b1(&bench, 3.3, 0.4), c.b(1), epsilon = 1e-12);
        }
    }

    #[test]
    fn coefficients_converge_under_refinement() {
        let smooth = CostFunction::new("exp-cos", |x: f64| (0.3 * x).exp() + x.cos());
        for n in [256, 512, 1024] {
            let c1 = fourier_coefficients(&smooth, 0.8, 0.6, 8, n).unwrap();
            let c2 = fourier_coefficients(&smooth, 0.8, 0.6, 8, 2 * n).unwrap();
            for (p, q) in c1.a.iter().chain(&c1.b).zip(c2.a.iter().chain(&c2.b)) {
                assert!((p - q).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn delta_star_oracles() {
        assert_abs_diff_eq!(
            delta_star_lower(&ClassKInf::default(), 1.0).unwrap(),
            2.0 / PI,
            epsilon = 1e-8
        );
        assert_abs_diff_eq!(
            delta_star_lower(&ClassKInf::power(2.0), 1.0).unwrap(),
            0.5,
            epsilon = 1e-8
        );
        assert_eq!(delta_star_lower(&ClassKInf::power(3.0), 0.0).unwrap(), 0.0);
        assert!(delta_star_lower(&ClassKInf::default(), -1.0).is_err());
        let shifted = ClassKInf::new("s+1", |s| s + 1.0);
        assert!(delta_star_lower(&shifted, 1.0).is_err());
    }

    #[test]
    fn delta_star_is_nondecreasing() {
        let alpha = ClassKInf::new("atan", f64::atan);
        let values: Vec<f64> = (0..50)
            .map(|i| delta_star_lower(&alpha, 0.2 * i as f64).unwrap())
            .collect();
        assert_eq!(values[0], 0.0);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }
}
