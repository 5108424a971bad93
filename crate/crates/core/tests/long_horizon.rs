//! Benchmark runs over horizons long enough for the loop to cross the saddle
//! at pi. With gamma = 0.1 and x0 = 1 the crossing happens after roughly 800
//! periods, so these use 2400.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use seek_core::dynamics::Scheme;
use seek_core::{
    convergence_time, oscillation_amplitude, tau_graph, tracking_error, CostFunction, SimParams,
    Trajectory,
};

const LONG: f64 = 2400.0;

fn bench_params(gamma: f64, t_end: f64) -> SimParams {
    SimParams::new(gamma, 0.1, 1.0).with_horizon(t_end)
}

/// Classic, Fourier-averaged and first-order Taylor runs at gamma = 0.1.
fn long_runs() -> &'static [Trajectory; 3] {
    static RUNS: OnceLock<[Trajectory; 3]> = OnceLock::new();
    RUNS.get_or_init(|| {
        let h = CostFunction::benchmark(0.0);
        let p = bench_params(0.1, LONG);
        [
            Scheme::Classic,
            Scheme::FourierAverage,
            Scheme::TaylorFirstOrder,
        ]
        .map(|s| s.simulate(&h, &p).unwrap())
    })
}

#[test]
fn classic_converges_into_the_two_delta_band() {
    let x = long_runs()[0].last()[0];
    assert!((x - TAU).abs() <= 0.2, "classic ends at {x}");
}

#[test]
fn fourier_average_crosses_the_saddle() {
    let traj = &long_runs()[1];
    let crossed = traj
        .component(0)
        .iter()
        .position(|&x| x > PI + 0.1)
        .expect("never crossed pi");
    assert!(traj.times()[crossed] > 100.0);
    let x = traj.last()[0];
    assert!((x - TAU).abs() <= 0.1, "fourier average ends at {x}");
}

#[test]
fn taylor_average_stalls_at_the_saddle() {
    let x = long_runs()[2].last()[0];
    assert!((x - PI).abs() < 1e-3, "taylor average ends at {x}");
}

#[test]
fn fourier_average_tracks_better_than_taylor() {
    let [classic, fourier, taylor] = long_runs();
    let e_fourier = tracking_error(classic, fourier, 0).unwrap();
    let e_taylor = tracking_error(classic, taylor, 0).unwrap();
    assert!(e_fourier < 0.2, "{e_fourier}");
    assert!(e_taylor > 10.0 * e_fourier, "{e_taylor} vs {e_fourier}");
}

#[test]
fn convergence_time_scales_with_one_over_gamma() {
    let h = CostFunction::benchmark(0.0);
    let fast = Scheme::Classic
        .simulate(&h, &bench_params(0.1, LONG))
        .unwrap();
    let slow = Scheme::Classic
        .simulate(&h, &bench_params(0.05, 2.0 * LONG))
        .unwrap();
    let t_fast = convergence_time(&fast, 0, TAU, 0.5).expect("gamma = 0.1 converges");
    let t_slow = convergence_time(&slow, 0, TAU, 0.5).expect("gamma = 0.05 converges");
    let ratio = t_slow / t_fast;
    assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn hpf_convergence_time_ignores_the_offset() {
    let p = bench_params(0.1, LONG);
    let times: Vec<f64> = [-10.0, 1e3]
        .iter()
        .map(|&h0| {
            let traj = Scheme::Hpf
                .simulate(&CostFunction::benchmark(h0), &p)
                .unwrap();
            convergence_time(&traj, 0, TAU, 0.5).expect("hpf converges")
        })
        .collect();
    let rel = (times[0] - times[1]).abs() / times[0].min(times[1]);
    assert!(rel <= 0.2, "{times:?}");
}

#[test]
fn hpf_average_filter_sits_on_the_tau_graph() {
    let h = CostFunction::benchmark(0.0);
    // the filter lags a0/2 while x_a still drifts, so wait until it settles
    let traj = Scheme::HpfAverage
        .simulate(&h, &bench_params(0.1, LONG))
        .unwrap();
    let end = traj.last();
    let tau = tau_graph(&h, end[0], 0.1).unwrap();
    assert!((end[1] - tau).abs() <= 1e-4, "ybar {} vs {tau}", end[1]);
}

#[test]
fn large_offset_makes_the_classic_loop_oscillate() {
    let p = bench_params(0.1, LONG);
    let run = |h0: f64| {
        Scheme::Classic
            .simulate(&CostFunction::benchmark(h0), &p)
            .unwrap()
    };
    let (calm, wild) = (run(0.0), run(1e3));
    let a_calm = oscillation_amplitude(&calm, 0, 10.0);
    let a_wild = oscillation_amplitude(&wild, 0, 10.0);
    assert!(
        a_wild > 10.0 * a_calm && a_wild > 1.0,
        "{a_wild} vs {a_calm}"
    );
    // near-periodic: consecutive periods at the end almost repeat
    let x = wild.component(0);
    let per = (1.0 / p.dt).round() as usize;
    let n = x.len();
    let drift = (n - per..n)
        .map(|i| (x[i] - x[i - per]).abs())
        .fold(0.0, f64::max);
    assert!(drift < 0.05 * a_wild, "drift {drift} vs amplitude {a_wild}");
}
