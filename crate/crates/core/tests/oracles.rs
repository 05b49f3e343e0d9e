//! Independent reference computations for the kernel, the resolvent link and
//! the decay rate.

use delta_ionization::kernel::{kernel_m, kernel_m_laplace, kernel_prefactor, small_lag_limit};
use delta_ionization::rates::{find_decay_pole, fit_decay_slope, gamma_hat_limit};
use delta_ionization::resolvent::resolvent_y;
use delta_ionization::volterra::{evolve, DriveParams, TimeGrid};
use delta_ionization::C64;
use proptest::prelude::*;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Composite Simpson on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> C64, a: f64, b: f64, n: usize) -> C64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for j in 1..n {
        acc += f(a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// `c ∫_s^∞ e^{−iu} u^{−3/2} du` with the contour turned to `u = s − ix`,
/// where the integrand decays like `e^{−x}`.
fn kernel_by_rotated_contour(s: f64) -> C64 {
    let f = |x: f64| C64::new(-x, -s).exp() * C64::new(s, -x).powf(-1.5);
    let body = simpson(f, 0.0, 1.0, 20_000) + simpson(f, 1.0, 60.0, 60_000);
    kernel_prefactor() * (-I) * body
}

#[test]
fn kernel_representations_agree() {
    for s in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let oracle = kernel_by_rotated_contour(s);
        let value = kernel_m(s).unwrap();
        assert!((oracle - value).norm() < 1e-8, "s = {s}: {oracle} vs {value}");
    }
}

/// `∫₀^∞ e^{−ps} M(s) ds` with `s = u²` to remove the `s^{−1/2}` endpoint.
fn numeric_laplace(p: C64) -> C64 {
    let f = |u: f64| {
        if u == 0.0 {
            2.0 * small_lag_limit()
        } else {
            let s = u * u;
            (-p * s).exp() * kernel_m(s).unwrap() * 2.0 * u
        }
    };
    simpson(f, 0.0, 1.0, 4_000) + simpson(f, 1.0, 7.0, 60_000)
}

#[test]
fn laplace_transform_matches_quadrature() {
    for p in [C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(2.0, -3.0)] {
        let oracle = numeric_laplace(p);
        let closed = kernel_m_laplace(p).value;
        assert!((oracle - closed).norm() < 1e-6, "p = {p}: {oracle} vs {closed}");
    }
}

#[test]
fn volterra_laplace_transform_matches_resolvent() {
    // θ = 1 + 2i∫Y, so pℒθ(p) − 1 = 2i y(p)
    let (r, omega) = (0.3, 1.5);
    let dt = 0.005;
    let trace = evolve(&DriveParams::new(r, omega).unwrap(), &TimeGrid::new(45.0, dt).unwrap()).unwrap();
    let p = 1.0;
    let n = trace.theta.len();
    let mut lt = C64::new(0.0, 0.0);
    for (j, th) in trace.theta.iter().enumerate() {
        let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        lt += w * dt * (-p * trace.grid.time(j)).exp() * th;
    }
    let lhs = p * lt - 1.0;
    let rhs = 2.0 * I * resolvent_y(C64::new(p, 0.0), r, omega).unwrap().y;
    assert!((lhs - rhs).norm() < 1e-5, "{lhs} vs {rhs}");
}

#[test]
fn slope_of_survival_matches_pole() {
    let (r, omega) = (0.3, 1.5);
    let params = DriveParams::new(r, omega).unwrap();
    let pole = find_decay_pole(&params).unwrap();
    let trace = evolve(&params, &TimeGrid::new(300.0, 0.01).unwrap()).unwrap();
    let slope = fit_decay_slope(&trace, 1e-4, 0.5, omega).unwrap();
    let rel = (-slope / pole.gamma_rate - 1.0).abs();
    assert!(rel < 0.05, "slope {slope} vs Gamma {}", pole.gamma_rate);
}

#[test]
fn small_amplitude_rates_approach_limit() {
    let omega = 2.0;
    let hat = gamma_hat_limit(omega).unwrap().gamma_hat;
    let mut last = f64::INFINITY;
    for (r, tol) in [(0.2, 0.15), (0.1, 0.08), (0.05, 0.04)] {
        let gamma = find_decay_pole(&DriveParams::new(r, omega).unwrap()).unwrap().gamma_rate;
        let err = (gamma / (r * r) / hat - 1.0).abs();
        assert!(err < tol && err < last, "r = {r}: {err}");
        last = err;
    }
}

#[test]
fn resolvent_decays_on_vertical_line() {
    let worst = [10.0, 30.0, 100.0, 300.0, 1000.0]
        .iter()
        .map(|&tau| resolvent_y(C64::new(0.5, tau), 0.4, 1.5).unwrap().y.norm() * tau * tau)
        .fold(0.0, f64::max);
    assert!(worst < 10.0, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn survival_never_exceeds_one(r in 0.05f64..1.0, omega in 0.6f64..3.0) {
        let dt = 0.01f64.min(0.2 / omega);
        let steps = (10.0 / dt).round();
        let trace = evolve(&DriveParams::new(r, omega).unwrap(), &TimeGrid::new(steps * dt, dt).unwrap()).unwrap();
        let worst = trace.survival().into_iter().fold(0.0, f64::max);
        prop_assert!(worst <= 1.0 + 1e-4, "{}", worst);
    }
}
