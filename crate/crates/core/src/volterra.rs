//! Time-domain route: the weakly singular Volterra equation
//!
//! ```text
//! Y(t) = η(t) · (1 + ∫₀ᵗ [2i + M(t−s)] Y(s) ds),    η(t) = r sin ωt,
//! θ(t) = 1 + 2i ∫₀ᵗ Y,
//! Θ(k,t) = 2|k| / (√(2π)(1 − i|k|)) ∫₀ᵗ Y(s) e^{i(1+k²)s} ds.
//! ```
//!
//! The kernel is split as `2i + M(s) = a(s)/√s + i`. The singular part is
//! handled by product integration (piecewise-linear `a(t−s)Y(s)` against the
//! exact `s^{-1/2}` weight) and the constant part by the trapezoid rule. Each
//! node is an explicit sweep over history plus an implicit diagonal.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::csv::Table;
use crate::error::{Error, Result};
use crate::kernel::kernel_singular_coefficient;
use crate::quadrature::{gauss_legendre, CompositeRule};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest spectral phase advance `dt·(1 + k_max²)` accepted by [`big_theta`].
pub const SPECTRAL_PHASE_PER_STEP: f64 = 1.0;

/// Drive `η(t) = r sin(ωt)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DriveParams {
    pub r: f64,
    pub omega: f64,
}

impl DriveParams {
    pub fn new(r: f64, omega: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude r = {r} must be positive")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("frequency omega = {omega} must be positive")));
        }
        Ok(DriveParams { r, omega })
    }

    /// The undriven well (r = 0); only useful as a reference case.
    pub fn unperturbed(omega: f64) -> Self {
        DriveParams { r: 0.0, omega }
    }

    pub fn eta(&self, t: f64) -> f64 {
        self.r * (self.omega * t).sin()
    }
}

/// Default step bound resolving the drive and the kernel phase `e^{−is}`.
pub fn max_step(omega: f64) -> f64 {
    0.02f64.min(0.2 / omega)
}

/// Step bound additionally resolving the spectral phase up to `k_max`.
pub fn max_step_with_spectrum(omega: f64, k_max: f64) -> f64 {
    max_step(omega).min(0.2 / (1.0 + k_max * k_max))
}

/// Uniform grid `t_j = j·dt`, `j = 0..=count`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_max = {t_max} must be positive")));
        }
        let count = (t_max / dt).round();
        if (count * dt - t_max).abs() > 1e-9 * t_max {
            return Err(Error::InvalidParameter(format!(
                "t_max = {t_max} is not an integer multiple of dt = {dt}"
            )));
        }
        Ok(TimeGrid {
            dt,
            count: count as usize,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.dt * self.count as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.count + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node index of `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let j = (t / self.dt).round();
        if j < 0.0 || j as usize > self.count || (j * self.dt - t).abs() > 1e-9 * t.abs().max(1.0) {
            None
        } else {
            Some(j as usize)
        }
    }
}

/// Sampled `Y(t)` and `θ(t)` on a uniform grid.
#[derive(Clone, Debug)]
pub struct SurvivalTrace {
    pub grid: TimeGrid,
    pub y_samples: Vec<C64>,
    /// Empty until [`theta_from_y`] has run.
    pub theta: Vec<C64>,
}

impl SurvivalTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.len()).map(|j| self.grid.time(j))
    }

    pub fn survival(&self) -> Vec<f64> {
        self.theta.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["t", "re_theta", "im_theta", "abs_theta_sq", "re_Y", "im_Y"]);
        for j in 0..self.grid.len() {
            let th = self.theta.get(j).copied().unwrap_or(C64::new(f64::NAN, f64::NAN));
            let y = self.y_samples[j];
            t.push(vec![self.grid.time(j), th.re, th.im, th.norm_sqr(), y.re, y.im]);
        }
        t
    }
}

/// `∫₀¹ u^{−1/2}`-type hat integrals: weight of the left node of `[m, m+1]`.
fn left_hat(m: usize) -> f64 {
    if m < 8 {
        let (a, b) = (m as f64, m as f64 + 1.0);
        let dp = 2.0 * (b.sqrt() - a.sqrt());
        let dq = 2.0 / 3.0 * (b.powf(1.5) - a.powf(1.5));
        b * dp - dq
    } else {
        hat_quadrature(m as f64, |u| 1.0 - u)
    }
}

/// Weight of the right node of `[m−1, m]`.
fn right_hat(m: usize) -> f64 {
    debug_assert!(m >= 1);
    if m < 8 {
        let (a, b) = (m as f64 - 1.0, m as f64);
        let dp = 2.0 * (b.sqrt() - a.sqrt());
        let dq = 2.0 / 3.0 * (b.powf(1.5) - a.powf(1.5));
        dq - a * dp
    } else {
        hat_quadrature(m as f64 - 1.0, |u| u)
    }
}

fn hat_quadrature(offset: f64, shape: impl Fn(f64) -> f64) -> f64 {
    thread_local! {
        static RULE: (Vec<f64>, Vec<f64>) = gauss_legendre(16);
    }
    RULE.with(|(x, w)| {
        x.iter()
            .zip(w)
            .map(|(&xi, &wi)| {
                let u = 0.5 * (xi + 1.0);
                0.5 * wi * shape(u) / (offset + u).sqrt()
            })
            .sum()
    })
}

/// Product-integration weights of `∫₀^{t_k} [2i + M(t_k − s)] Y(s) ds`.
///
/// `lag[m]` multiplies `Y_{k−m}` for `0 <= m < k`; `endpoint[k]` multiplies
/// `Y_0`.
#[derive(Clone, Debug)]
pub struct ConvolutionWeights {
    pub lag: Vec<C64>,
    pub endpoint: Vec<C64>,
}

impl ConvolutionWeights {
    pub fn new(grid: &TimeGrid) -> Self {
        let h = grid.dt;
        let sh = h.sqrt();
        let n = grid.count;
        let a: Vec<C64> = (0..=n).into_par_iter().map(|m| kernel_singular_coefficient(m as f64 * h)).collect();
        let mut lag = Vec::with_capacity(n + 1);
        let mut endpoint = vec![C64::new(0.0, 0.0); n + 1];
        lag.push(sh * a[0] * left_hat(0) + I * (h / 2.0));
        for m in 1..=n {
            lag.push(sh * a[m] * (left_hat(m) + right_hat(m)) + I * h);
            endpoint[m] = sh * a[m] * right_hat(m) + I * (h / 2.0);
        }
        ConvolutionWeights { lag, endpoint }
    }

    /// Discrete convolution at node `k` (including the diagonal).
    pub fn apply(&self, y: &[C64], k: usize) -> C64 {
        if k == 0 {
            return C64::new(0.0, 0.0);
        }
        let mut s = self.endpoint[k] * y[0] + self.lag[0] * y[k];
        for j in 1..k {
            s += self.lag[k - j] * y[j];
        }
        s
    }
}

/// A priori envelope `|Y(t)| <= K e^{Ct}` from the weighted-norm contraction.
#[derive(Clone, Copy, Debug)]
pub struct GrowthEnvelope {
    pub k: f64,
    pub c: f64,
}

impl GrowthEnvelope {
    /// Uses `|2i + M(s)| <= 2 + s^{−1/2}/√π` and picks ν with
    /// `r·(2/ν + 1/√ν) = 1/2`, so `K = 2r`, `C = ν`.
    pub fn for_amplitude(r: f64) -> Self {
        let x = (-1.0 + (1.0 + 4.0 / r).sqrt()) / 4.0;
        GrowthEnvelope {
            k: 2.0 * r,
            c: 1.0 / (x * x),
        }
    }

    pub fn bound(&self, t: f64) -> f64 {
        self.k * (self.c * t).exp()
    }
}

/// Marches the integral equation for `Y` on `grid`.
pub fn solve_y(params: &DriveParams, grid: &TimeGrid) -> Result<SurvivalTrace> {
    let limit = max_step(params.omega);
    if grid.dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge {
            dt: grid.dt,
            suggested: limit,
        });
    }
    let weights = ConvolutionWeights::new(grid);
    solve_with_weights(params, grid, &weights)
}

pub fn solve_with_weights(params: &DriveParams, grid: &TimeGrid, weights: &ConvolutionWeights) -> Result<SurvivalTrace> {
    let n = grid.count;
    let guard = (params.r > 0.0).then(|| GrowthEnvelope::for_amplitude(params.r));
    let mut y = vec![C64::new(0.0, 0.0); n + 1];
    y[0] = C64::new(params.eta(0.0), 0.0);
    for k in 1..=n {
        let t = grid.time(k);
        let eta = params.eta(t);
        let mut s = C64::new(1.0, 0.0) + weights.endpoint[k] * y[0];
        for j in 1..k {
            s += weights.lag[k - j] * y[j];
        }
        y[k] = eta * s / (1.0 - eta * weights.lag[0]);
        if let Some(g) = guard {
            let bound = 10.0 * g.bound(t);
            if y[k].norm() > bound || !y[k].is_finite() {
                return Err(Error::Instability {
                    t,
                    value: y[k].norm(),
                    bound,
                });
            }
        }
    }
    Ok(SurvivalTrace {
        grid: *grid,
        y_samples: y,
        theta: Vec::new(),
    })
}

/// Largest discrete residual `|Y_k − η_k(1 + Σ_j w_kj Y_j)|` over the grid.
pub fn discrete_residual(params: &DriveParams, trace: &SurvivalTrace, weights: &ConvolutionWeights) -> f64 {
    (0..trace.grid.len())
        .map(|k| {
            let eta = params.eta(trace.grid.time(k));
            (trace.y_samples[k] - eta * (1.0 + weights.apply(&trace.y_samples, k))).norm()
        })
        .fold(0.0, f64::max)
}

/// `θ(t) = 1 + 2i∫₀ᵗ Y` by the trapezoid rule (exact for piecewise-linear Y).
pub fn theta_from_y(mut trace: SurvivalTrace) -> SurvivalTrace {
    let h = trace.grid.dt;
    let mut theta = Vec::with_capacity(trace.y_samples.len());
    let mut acc = C64::new(1.0, 0.0);
    theta.push(acc);
    for w in trace.y_samples.windows(2) {
        acc += 2.0 * I * (0.5 * h) * (w[0] + w[1]);
        theta.push(acc);
    }
    trace.theta = theta;
    trace
}

/// Convenience: [`solve_y`] followed by [`theta_from_y`].
pub fn evolve(params: &DriveParams, grid: &TimeGrid) -> Result<SurvivalTrace> {
    Ok(theta_from_y(solve_y(params, grid)?))
}

/// Quadrature nodes on `[0, k_max]`; spectra are even in k, so integrals over
/// the real line are twice the half-line sums.
#[derive(Clone, Debug)]
pub struct KGrid {
    pub k_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl KGrid {
    /// Gauss–Legendre panels fine enough for the phase `(1+k²)t`.
    pub fn for_time(k_max: f64, t: f64) -> Self {
        let panels = ((k_max * k_max * t / 3.0).ceil() as usize).max(8);
        let rule = CompositeRule::new(0.0, k_max, panels, 16);
        KGrid {
            k_max,
            nodes: rule.nodes,
            weights: rule.weights,
        }
    }

    /// Uniformly spaced nodes with trapezoid weights.
    pub fn uniform(k_max: f64, count: usize) -> Self {
        assert!(count >= 2);
        let h = k_max / (count - 1) as f64;
        let nodes = (0..count).map(|i| i as f64 * h).collect();
        let weights = (0..count)
            .map(|i| if i == 0 || i == count - 1 { h / 2.0 } else { h })
            .collect();
        KGrid { k_max, nodes, weights }
    }
}

/// `Θ(k, t)` on a k grid at one time.
#[derive(Clone, Debug)]
pub struct MomentumSpectrum {
    pub t: f64,
    pub k_grid: KGrid,
    pub amplitudes: Vec<C64>,
    /// Estimated `∫_{|k|>k_max} |Θ|² dk` from the large-k expansion.
    pub tail: f64,
}

impl MomentumSpectrum {
    /// `∫_ℝ |Θ(k,t)|² dk`, including the tail estimate.
    pub fn ejected_fraction(&self) -> f64 {
        let body: f64 = self
            .amplitudes
            .iter()
            .zip(&self.k_grid.weights)
            .map(|(a, w)| w * a.norm_sqr())
            .sum();
        2.0 * body + self.tail
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["k", "re_Theta", "im_Theta", "abs_Theta_sq"]);
        for (k, a) in self.k_grid.nodes.iter().zip(&self.amplitudes) {
            t.push(vec![*k, a.re, a.im, a.norm_sqr()]);
        }
        t
    }
}

/// `∫₀¹ e^{iθu} du` and `∫₀¹ u e^{iθu} du`.
fn filon_moments(theta: f64) -> (C64, C64) {
    if theta.abs() < 0.1 {
        let x = I * theta;
        let mut term = C64::new(1.0, 0.0);
        let (mut m0, mut m1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for n in 0..20 {
            m0 += term / (n as f64 + 1.0);
            m1 += term / (n as f64 + 2.0);
            term = term * x / (n as f64 + 1.0);
        }
        (m0, m1)
    } else {
        let e = C64::from_polar(1.0, theta);
        let m0 = (e - 1.0) / (I * theta);
        let m1 = e / (I * theta) + (e - 1.0) / (theta * theta);
        (m0, m1)
    }
}

fn theta_prefactor(k: f64) -> C64 {
    let k = k.abs();
    2.0 * k / ((2.0 * PI).sqrt() * C64::new(1.0, -k))
}

/// `|prefactor(k)|² = 2k² / (π(1+k²))`.
fn prefactor_sq(k: f64) -> f64 {
    2.0 * k * k / (PI * (1.0 + k * k))
}

/// Ejected-electron amplitudes `Θ(k, t)` at a grid time `t`.
pub fn big_theta(trace: &SurvivalTrace, k_grid: &KGrid, t: f64) -> Result<MomentumSpectrum> {
    let grid = trace.grid;
    let idx = grid.index_of(t).ok_or_else(|| Error::Domain {
        what: "big_theta",
        detail: format!("t = {t} is not a node of the trace grid"),
    })?;
    let h = grid.dt;
    if h * (1.0 + k_grid.k_max * k_grid.k_max) > SPECTRAL_PHASE_PER_STEP {
        return Err(Error::SpectralResolution {
            k_max: k_grid.k_max,
            dt: h,
            bound: (SPECTRAL_PHASE_PER_STEP / h - 1.0).max(0.0).sqrt(),
        });
    }
    let y = &trace.y_samples;
    let amplitudes: Vec<C64> = k_grid
        .nodes
        .par_iter()
        .map(|&k| {
            if k == 0.0 || idx == 0 {
                return C64::new(0.0, 0.0);
            }
            let lambda = 1.0 + k * k;
            let (m0, m1) = filon_moments(lambda * h);
            let mut left = C64::new(0.0, 0.0); // Σ_{j<idx} e^{iλs_j} Y_j
            let mut right = C64::new(0.0, 0.0); // Σ_{0<j<=idx} e^{iλs_j} Y_j
            for (j, yj) in y.iter().enumerate().take(idx + 1) {
                let term = C64::from_polar(1.0, lambda * grid.time(j)) * yj;
                if j < idx {
                    left += term;
                }
                if j > 0 {
                    right += term;
                }
            }
            let integral = h * ((m0 - m1) * left + m1 * C64::from_polar(1.0, -lambda * h) * right);
            theta_prefactor(k) * integral
        })
        .collect();
    let tail = spectral_tail(trace, idx, k_grid.k_max);
    Ok(MomentumSpectrum {
        t,
        k_grid: k_grid.clone(),
        amplitudes,
        tail,
    })
}

/// `2∫_{k_max}^∞ |Θ|² dk` from `∫₀ᵗ Y e^{iλs} ≈ e^{iλt}(Y/(iλ) + Y'/λ²)`.
fn spectral_tail(trace: &SurvivalTrace, idx: usize, k_max: f64) -> f64 {
    if idx == 0 || k_max <= 0.0 {
        return 0.0;
    }
    let y = &trace.y_samples;
    let h = trace.grid.dt;
    let yt = y[idx];
    let dy = if idx >= 2 {
        (3.0 * y[idx] - 4.0 * y[idx - 1] + y[idx - 2]) / (2.0 * h)
    } else {
        (y[idx] - y[idx - 1]) / h
    };
    let cross = (yt.conj() * dy).im;
    // substitute k = k_max/u, u in (0, 1]
    let rule = CompositeRule::new(0.0, 1.0, 4, 16);
    let half = rule.integrate(|u| {
        let k = k_max / u;
        let lambda = 1.0 + k * k;
        let amp = yt.norm_sqr() / (lambda * lambda) - 2.0 * cross / lambda.powi(3) + dy.norm_sqr() / lambda.powi(4);
        prefactor_sq(k) * amp * k_max / (u * u)
    });
    2.0 * half
}

/// Signed defect `|θ(t)|² + ∫|Θ(k,t)|²dk − 1`.
pub fn unitarity_defect(trace: &SurvivalTrace, spectrum: &MomentumSpectrum) -> f64 {
    let idx = trace.grid.index_of(spectrum.t).expect("spectrum time must lie on the trace grid");
    trace.theta[idx].norm_sqr() + spectrum.ejected_fraction() - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(r: f64, omega: f64, t_max: f64, dt: f64) -> SurvivalTrace {
        evolve(&DriveParams::new(r, omega).unwrap(), &TimeGrid::new(t_max, dt).unwrap()).unwrap()
    }

    #[test]
    fn hat_weights_sum_to_exact_integral() {
        for m in [0usize, 1, 5, 7, 8, 50, 1000] {
            let total = left_hat(m) + right_hat(m + 1);
            let exact = 2.0 * ((m as f64 + 1.0).sqrt() - (m as f64).sqrt());
            assert!((total - exact).abs() < 1e-14, "m = {m}");
        }
        assert!((left_hat(0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((right_hat(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unperturbed_well_stays_bound() {
        let grid = TimeGrid::new(5.0, 0.01).unwrap();
        let tr = theta_from_y(solve_y(&DriveParams::unperturbed(1.5), &grid).unwrap());
        assert!(tr.y_samples.iter().all(|y| y.norm() == 0.0));
        assert!(tr.theta.iter().all(|t| *t == C64::new(1.0, 0.0)));
    }

    #[test]
    fn initial_values() {
        let tr = trace(0.7, 1.3, 2.0, 0.01);
        assert_eq!(tr.y_samples[0], C64::new(0.0, 0.0));
        assert_eq!(tr.theta[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn step_refusal() {
        let p = DriveParams::new(0.3, 1.5).unwrap();
        let err = solve_y(&p, &TimeGrid::new(1.0, 0.05).unwrap()).unwrap_err();
        match err {
            Error::StepTooLarge { suggested, .. } => assert!((suggested - 0.02).abs() < 1e-15),
            e => panic!("unexpected {e:?}"),
        }
        let fast = DriveParams::new(0.3, 20.0).unwrap();
        assert!(solve_y(&fast, &TimeGrid::new(1.0, 0.02).unwrap()).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(DriveParams::new(0.0, 1.0).is_err());
        assert!(DriveParams::new(0.3, -1.0).is_err());
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, 0.3).is_err());
    }

    #[test]
    fn solver_is_fixed_point_of_its_discretization() {
        let p = DriveParams::new(0.5, 1.5).unwrap();
        let grid = TimeGrid::new(10.0, 0.01).unwrap();
        let w = ConvolutionWeights::new(&grid);
        let tr = solve_with_weights(&p, &grid, &w).unwrap();
        assert!(discrete_residual(&p, &tr, &w) < 1e-10);
    }

    #[test]
    fn survival_bounded_by_one() {
        let tr = trace(1.0, 1.5, 20.0, 0.01);
        let max = tr.theta.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(max <= 1.0 + 1e-6, "{max}");
    }

    #[test]
    fn strong_drive_ionizes() {
        let tr = trace(1.0, 1.5, 60.0, 0.01);
        assert!(tr.theta.last().unwrap().norm_sqr() < 0.5);
    }

    #[test]
    fn convergence_order_at_least_three_halves() {
        let p = DriveParams::new(0.3, 1.5).unwrap();
        let sols: Vec<SurvivalTrace> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&dt| theta_from_y(solve_y(&p, &TimeGrid::new(5.0, dt).unwrap()).unwrap()))
            .collect();
        let diff = |a: &SurvivalTrace, b: &SurvivalTrace| {
            let stride = b.grid.count / a.grid.count;
            (0..a.grid.len())
                .map(|j| (a.y_samples[j] - b.y_samples[j * stride]).norm())
                .fold(0.0, f64::max)
        };
        let d1 = diff(&sols[0], &sols[1]);
        let d2 = diff(&sols[1], &sols[2]);
        let q = (d1 / d2).log2();
        assert!(q >= 1.5, "measured order {q} ({d1:e}, {d2:e})");
    }

    #[test]
    fn spectrum_edge_cases() {
        let tr = trace(0.3, 1.5, 2.0, 0.005);
        let kg = KGrid::for_time(6.0, 2.0);
        let at_zero = big_theta(&tr, &kg, 0.0).unwrap();
        assert!(at_zero.amplitudes.iter().all(|a| a.norm() == 0.0));
        assert_eq!(unitarity_defect(&tr, &at_zero), 0.0);
        let s = big_theta(&tr, &KGrid::uniform(6.0, 7), 1.0).unwrap();
        assert_eq!(s.amplitudes[0], C64::new(0.0, 0.0));
        assert!(big_theta(&tr, &kg, 0.0025).is_err());
        let coarse = trace(0.3, 1.5, 2.0, 0.02);
        assert!(matches!(
            big_theta(&coarse, &KGrid::uniform(10.0, 11), 1.0),
            Err(Error::SpectralResolution { .. })
        ));
    }

    #[test]
    fn filon_moments_continuous() {
        let (a0, a1) = filon_moments(0.0999999);
        let (b0, b1) = filon_moments(0.1000001);
        assert!((a0 - b0).norm() < 1e-6 && (a1 - b1).norm() < 1e-6);
    }

    #[test]
    fn growth_envelope_constants() {
        let g = GrowthEnvelope::for_amplitude(0.3);
        let nu = g.c;
        assert!((0.3 * (2.0 / nu + 1.0 / nu.sqrt()) - 0.5).abs() < 1e-12);
    }
}
