//! Acceptance suite. Every criterion runs at its stated setup and tolerance
//! and prints a single `PASS`/`FAIL` line with the measured figures, then
//! asserts its verdict. Tests hold a shared lock so runtime budgets are
//! measured one at a time.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use seek_cli::{runner, Scenario};
use seek_core::dynamics::{self, Scheme};
use seek_core::{
    a0, b1, convergence_time, delta_star_lower, find_equilibria, integrate, oscillation_amplitude,
    tracking_error, ClassKInf, CostFunction, SimParams, Stability, Trajectory,
};

static SERIAL: Mutex<()> = Mutex::new(());

/// Collects sub-checks for one criterion.
struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    start: Instant,
    checks: Vec<(bool, String)>,
}

impl Criterion {
    fn new(id: u32, title: &'static str, budget_secs: u64) -> Self {
        Self {
            id,
            title,
            budget: Duration::from_secs(budget_secs),
            start: Instant::now(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.checks.push((ok, detail.into()));
    }

    /// Prints the verdict line (bypassing test capture) and fails the test
    /// when any sub-check or the runtime budget failed.
    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        self.check(
            elapsed <= self.budget,
            format!(
                "runtime {:.2}s of {}s",
                elapsed.as_secs_f64(),
                self.budget.as_secs()
            ),
        );
        let ok = self.checks.iter().all(|(ok, _)| *ok);
        let details: Vec<String> = self
            .checks
            .iter()
            .map(|(ok, d)| {
                if *ok {
                    d.clone()
                } else {
                    format!("FAILED {d}")
                }
            })
            .collect();
        let line = format!(
            "acceptance {:>2} [{}] {}: {}\n",
            self.id,
            if ok { "PASS" } else { "FAIL" },
            self.title,
            details.join("; ")
        );
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(line.as_bytes());
        let _ = out.flush();
        assert!(ok, "{line}");
    }
}

fn list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn benchmark_run(scheme: Scheme, h0: f64, gamma: f64, x0: f64) -> Trajectory {
    let p = SimParams::new(gamma, 0.1, x0);
    scheme.simulate(&CostFunction::benchmark(h0), &p).unwrap()
}

#[test]
fn criterion_01_fourier_oracle() {
    let _guard = serial();
    let mut c = Criterion::new(1, "Fourier oracle on x^2", 1);
    let h = CostFunction::quadratic(0.0);
    let delta = 0.5;
    for x in [0.0, 1.0, 2.0] {
        let e_b1 = (b1(&h, x, delta).unwrap() - 2.0 * delta * x).abs();
        let e_a0 = (a0(&h, x, delta).unwrap() - (2.0 * x * x + delta * delta)).abs();
        c.check(
            e_b1 <= 1e-10 && e_a0 <= 1e-10,
            format!("x={x}: |db1|={e_b1:.1e} |da0|={e_a0:.1e}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_02_taylor_coefficients() {
    let _guard = serial();
    let mut c = Criterion::new(2, "Taylor coefficients and first-order field", 1);
    for (k, want) in [(1, 1.0 / 2.0), (2, 1.0 / 16.0), (3, 1.0 / 192.0)] {
        let got = dynamics::taylor_coefficient(k);
        c.check(
            (got - want).abs() <= 1e-15,
            format!("c{k}={got:.6e} (expected {want:.6e})"),
        );
    }
    let h = CostFunction::quadratic(0.0);
    let p = SimParams::new(0.1, 0.1, 0.0);
    let taylor = dynamics::taylor_first_order_average(&h, &p);
    let fourier = dynamics::fourier_average(&h, &p);
    let worst = (0..100)
        .map(|i| {
            let x = -3.0 + 6.0 * i as f64 / 99.0;
            let (mut ft, mut ff) = ([0.0], [0.0]);
            taylor.eval(0.0, &[x], &mut ft).unwrap();
            fourier.eval(0.0, &[x], &mut ff).unwrap();
            (ft[0] - ff[0]).abs()
        })
        .fold(0.0, f64::max);
    c.check(
        worst <= 1e-8,
        format!("max field gap {worst:.1e} on 100 points"),
    );
    c.finish();
}

#[test]
fn criterion_03_containment() {
    let _guard = serial();
    let mut c = Criterion::new(3, "equilibria inside [2pi - delta, 2pi + delta]", 10);
    let h = CostFunction::benchmark(0.0);
    for delta in [0.05, 0.1, 0.3, 1.0] {
        let report = find_equilibria(&h, delta, (PI / 2.0, 3.0 * PI), 2000).unwrap();
        let worst = report
            .roots
            .iter()
            .map(|r| (r.x - TAU).abs())
            .fold(0.0, f64::max);
        let ok = !report.roots.is_empty() && worst <= delta + 1e-6;
        c.check(
            ok,
            format!(
                "delta={delta}: {} roots, max |root-2pi|={worst:.4}",
                report.roots.len()
            ),
        );
    }
    c.finish();
}

#[test]
fn criterion_04_symmetry() {
    let _guard = serial();
    let mut c = Criterion::new(4, "symmetric cost keeps x*, asymmetric cost shifts it", 5);
    let x_star = 1.0;
    let h = CostFunction::quadratic(x_star);
    for delta in [0.1, 0.5] {
        let interval = (x_star - 3.0 * delta, x_star + 3.0 * delta);
        let report = find_equilibria(&h, delta, interval, 400).unwrap();
        let stable: Vec<f64> = report.stable_roots().map(|r| r.x).collect();
        let ok = stable.len() == 1 && (stable[0] - x_star).abs() <= 1e-9;
        c.check(
            ok,
            format!("quadratic delta={delta}: stable roots {stable:?}"),
        );
    }
    let bench = CostFunction::benchmark(0.0);
    let report = find_equilibria(&bench, 0.1, (PI / 2.0, 3.0 * PI), 2000).unwrap();
    let stable: Vec<f64> = report
        .roots
        .iter()
        .filter(|r| r.stability == Stability::Stable)
        .map(|r| r.x)
        .collect();
    let ok = !stable.is_empty() && stable.iter().all(|x| (x - TAU).abs() > 1e-6);
    let gap = stable.first().map_or(f64::NAN, |x| x - TAU);
    c.check(
        ok,
        format!("benchmark delta=0.1: stable root - 2pi = {gap:.4e}"),
    );
    c.finish();
}

#[test]
fn criterion_05_saddle_traversal() {
    let _guard = serial();
    let mut c = Criterion::new(5, "saddle traversal at t_end = 600", 30);
    for scheme in [Scheme::Classic, Scheme::FourierAverage] {
        let x = benchmark_run(scheme, 0.0, 0.1, 1.0).last()[0];
        c.check((x - TAU).abs() <= 0.3, format!("{scheme} ends at {x:.4}"));
    }
    let taylor = benchmark_run(Scheme::TaylorFirstOrder, 0.0, 0.1, PI);
    let moved = taylor
        .component(0)
        .iter()
        .map(|x| (x - PI).abs())
        .fold(0.0, f64::max);
    c.check(
        moved < 1e-9,
        format!("taylor1_avg from pi moves {moved:.1e}"),
    );
    c.finish();
}

#[test]
fn criterion_06_averaging_closeness() {
    let _guard = serial();
    let mut c = Criterion::new(6, "averaging closeness", 120);
    let mut errors = Vec::new();
    let mut at_01 = None;
    for gamma in [0.2, 0.1, 0.05, 0.025] {
        let classic = benchmark_run(Scheme::Classic, 0.0, gamma, 1.0);
        let fourier = benchmark_run(Scheme::FourierAverage, 0.0, gamma, 1.0);
        errors.push(tracking_error(&classic, &fourier, 0).unwrap());
        if gamma == 0.1 {
            at_01 = Some((classic, errors[errors.len() - 1]));
        }
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    c.check(
        decreasing,
        format!("sup errors for gamma 0.2..0.025: {}", list(&errors)),
    );
    let (classic, e_fourier) = at_01.unwrap();
    let taylor = benchmark_run(Scheme::TaylorFirstOrder, 0.0, 0.1, 1.0);
    let e_taylor = tracking_error(&classic, &taylor, 0).unwrap();
    c.check(
        e_fourier < e_taylor,
        format!("gamma=0.1 fourier {e_fourier:.17e} vs taylor {e_taylor:.17e}"),
    );
    c.finish();
}

#[test]
fn criterion_07_oscillation_growth() {
    let _guard = serial();
    let mut c = Criterion::new(7, "classic oscillation grows with h0", 60);
    let amplitude =
        |h0: f64| oscillation_amplitude(&benchmark_run(Scheme::Classic, h0, 0.1, 1.0), 0, 10.0);
    let offsets = [-10.0, 10.0, 100.0, 1000.0];
    let amps: Vec<f64> = offsets.iter().map(|&h0| amplitude(h0)).collect();
    let nondecreasing = amps.windows(2).all(|w| w[1] >= w[0]);
    c.check(
        nondecreasing,
        format!("amplitudes at h0 {offsets:?}: {}", list(&amps)),
    );
    let base = amplitude(0.0);
    c.check(
        amps[3] > 10.0 * base,
        format!("h0=1000 {:.4e} vs 10 x h0=0 {:.4e}", amps[3], 10.0 * base),
    );
    c.finish();
}

#[test]
fn criterion_08_hpf_uniformity() {
    let _guard = serial();
    let mut c = Criterion::new(8, "HPF convergence independent of h0", 60);
    let times: Vec<Option<f64>> = [-10.0, 1000.0]
        .iter()
        .map(|&h0| convergence_time(&benchmark_run(Scheme::Hpf, h0, 0.1, 1.0), 0, TAU, 0.5))
        .collect();
    let agree = match (times[0], times[1]) {
        (Some(a), Some(b)) => (a - b).abs() / a.min(b) <= 0.2,
        _ => false,
    };
    c.check(
        agree,
        format!(
            "convergence times h0=-10: {:?}, h0=1000: {:?}",
            times[0], times[1]
        ),
    );
    let p = SimParams::new(0.1, 0.1, 1.0);
    let base = Scheme::Hpf
        .simulate(&CostFunction::benchmark(0.0), &p)
        .unwrap();
    let ybar0 = CostFunction::benchmark(0.0).eval(1.0) + 1000.0;
    let lifted = Scheme::Hpf
        .simulate(&CostFunction::benchmark(1000.0), &p.with_ybar0(ybar0))
        .unwrap();
    let gap = tracking_error(&base, &lifted, 0).unwrap();
    c.check(gap <= 1e-9, format!("offset-equivariance gap {gap:.1e}"));
    c.finish();
}

#[test]
fn criterion_09_support_closed_form() {
    let _guard = serial();
    let mut c = Criterion::new(9, "support oscillator closed form", 5);
    let (gamma, x10) = (0.1, 1.0);
    let h = CostFunction::benchmark(1000.0);
    let p = SimParams::new(gamma, 0.1, x10).with_horizon(1.0);
    let rk4 = integrate(&dynamics::support_oscillator(&h, &p), &[x10], &p).unwrap();
    let worst = rk4
        .times()
        .iter()
        .zip(rk4.states())
        .map(|(&t, s)| (dynamics::support_closed_form(&h, x10, gamma, t).unwrap() - s[0]).abs())
        .fold(0.0, f64::max);
    c.check(
        worst <= 1e-4,
        format!("h0=1000 max |closed form - RK4| = {worst:.1e}"),
    );
    let cst = 3.0;
    let flat = CostFunction::constant(cst);
    let worst = (0..=200)
        .map(|i| {
            let t = i as f64 / 200.0;
            let exact = x10 + gamma * cst * ((TAU * t).cos() - 1.0) / TAU;
            (dynamics::support_closed_form(&flat, x10, gamma, t).unwrap() - exact).abs()
        })
        .fold(0.0, f64::max);
    c.check(
        worst <= 1e-8,
        format!("constant cost max gap to the cosine = {worst:.1e}"),
    );
    c.finish();
}

#[test]
fn criterion_10_delta_star() {
    let _guard = serial();
    let mut c = Criterion::new(10, "delta_star lower bound", 1);
    let linear = delta_star_lower(&ClassKInf::default(), 1.0).unwrap();
    c.check(
        (linear - 2.0 / PI).abs() <= 1e-8,
        format!("alpha=s: {linear:.12} vs 2/pi"),
    );
    let square = delta_star_lower(&ClassKInf::power(2.0), 1.0).unwrap();
    c.check(
        (square - 0.5).abs() <= 1e-8,
        format!("alpha=s^2: {square:.12} vs 1/2"),
    );
    c.finish();
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            found.extend(csv_files(&path));
        } else if path.extension().is_some_and(|e| e == "csv") {
            found.push(path);
        }
    }
    found.sort();
    found
}

#[test]
fn criterion_11_determinism() {
    let _guard = serial();
    let mut c = Criterion::new(11, "fig5 scenario is deterministic", 120);
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/fig5.toml");
    let scenario = Scenario::load(&file).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let outputs: Vec<Vec<(PathBuf, Vec<u8>)>> = ["first", "second"]
        .iter()
        .map(|name| {
            let dir = tmp.path().join(name);
            runner::run(&scenario, &dir).unwrap();
            csv_files(&dir)
                .into_iter()
                .map(|p| (p.strip_prefix(&dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()))
                .collect()
        })
        .collect();
    let count = outputs[0].len();
    c.check(count == 4, format!("{count} CSV files per run"));
    c.check(outputs[0] == outputs[1], "identical bytes across runs");
    c.finish();
}
