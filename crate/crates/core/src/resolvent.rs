//! Resolvent `y(p)` from the bounded solution of the inhomogeneous lattice
//! equation, and its inversion back to the time domain.
//!
//! With `H_n = iω e^{πp_n/(2ω)}/(p_n² + ω²)` the bounded solution of
//! `f_{n+1} + f_{n−1} − D_n f_n = −H_n` is
//!
//! ```text
//! f_n = (v⁺_n Σ_{l<n} v⁻_l H_l + v⁻_n Σ_{l≥n} v⁺_l H_l) / W,
//! y(p_n) = −2i (√(1 − ip_n) − 1) e^{−πp_n/(2ω)} f_n.
//! ```
//!
//! The factor `e^{πp₀/(2ω)}` is common to all `H_l` and cancels in `y`, so
//! the sums run over `H_l e^{−πp₀/(2ω)} = iω iˡ/(p_l² + ω²)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::csv::Table;
use crate::error::{Error, Result};
use crate::kernel::{h1, h2, sqrt_one_minus_ip, sqrt_one_plus_minus_one, sqrt_ratio_at_origin};
use crate::lattice::{LatticePoint, LatticeSolution};
use crate::scaled::Scaled;
use crate::volterra::{DriveParams, SurvivalTrace, TimeGrid};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Requests with |Re p| below this go through the regularized formulas.
pub const BOUNDARY_LAYER: f64 = 1e-6;

/// Extra lattice sites on each side of the requested range.
const MIN_MARGIN: i64 = 30;

/// `iˡ` for integer `l`.
fn i_pow(l: i64) -> C64 {
    match l.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => I,
        2 => C64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// `H_n` together with the bare recurrence source `iω/(p_n² + ω²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceTerm {
    pub n: i64,
    pub h: C64,
    pub rec_source: C64,
}

pub fn source_h(point: &LatticePoint) -> Result<SourceTerm> {
    let omega = point.omega;
    let p = point.p();
    if point.p0 == C64::new(0.0, 0.0) && point.n.abs() == 1 {
        return Err(Error::SingularSource { p_re: p.re, p_im: p.im });
    }
    let denom = p * p + omega * omega;
    if denom.norm() == 0.0 {
        return Err(Error::SingularSource { p_re: p.re, p_im: p.im });
    }
    let rec_source = I * omega / denom;
    Ok(SourceTerm {
        n: point.n,
        h: rec_source * (PI * p / (2.0 * omega)).exp(),
        rec_source,
    })
}

/// `H_l e^{−πp₀/(2ω)}`.
fn reduced_source(p0: C64, l: i64, omega: f64) -> C64 {
    let p = p0 + I * (l as f64 * omega);
    I * omega * i_pow(l) / (p * p + omega * omega)
}

/// How the `l = ±1` terms are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Direct,
    /// `l = ±1` terms combined analytically; valid for `n ∉ {0, 1}`.
    Regularized,
}

/// Lattice solution plus the Green's-function sums for a range of sites.
#[derive(Clone, Debug)]
pub struct ResolventLattice {
    pub sol: LatticeSolution,
    pub route: Route,
    pub wronskian: Scaled,
    pub n_min: i64,
    pub n_max: i64,
    /// `Σ_{l<n} v⁻_l H̃_l` on the lattice window.
    prefix: Vec<Scaled>,
    /// `Σ_{l≥n} v⁺_l H̃_l`.
    suffix: Vec<Scaled>,
    reduced_h: Vec<C64>,
}

impl ResolventLattice {
    pub fn new(p0: C64, r: f64, omega: f64, n_min: i64, n_max: i64, route: Route) -> Result<Self> {
        assert!(n_min <= n_max);
        if route == Route::Direct && p0 == C64::new(0.0, 0.0) && n_min <= 1 && n_max >= -1 {
            return Err(Error::SingularSource { p_re: 0.0, p_im: 0.0 });
        }
        let mut margin = MIN_MARGIN;
        loop {
            let sol = LatticeSolution::build(p0, r, omega, n_min - margin, n_max + margin)?;
            let wronskian = sol.wronskian()?.value;
            let reduced_h: Vec<C64> = (sol.lo..=sol.hi)
                .map(|l| {
                    if route == Route::Regularized && l.abs() == 1 {
                        C64::new(0.0, 0.0)
                    } else {
                        reduced_source(p0, l, omega)
                    }
                })
                .collect();
            let len = reduced_h.len();
            let mut prefix = vec![Scaled::ZERO; len + 1];
            for i in 0..len {
                prefix[i + 1] = prefix[i] + sol.v_minus[i] * reduced_h[i];
            }
            let mut suffix = vec![Scaled::ZERO; len + 1];
            for i in (0..len).rev() {
                suffix[i] = suffix[i + 1] + sol.v_plus[i] * reduced_h[i];
            }
            let out = ResolventLattice {
                sol,
                route,
                wronskian,
                n_min,
                n_max,
                prefix: prefix[..len].to_vec(),
                suffix: suffix[..len].to_vec(),
                reduced_h,
            };
            if out.truncation_error() < 1e-17 || margin >= 960 {
                return Ok(out);
            }
            margin *= 2;
        }
    }

    /// Relative size of the outermost summands against the sums they feed.
    fn truncation_error(&self) -> f64 {
        let s = &self.sol;
        let first = (s.v_minus[0] * self.reduced_h[0]).ln_norm();
        let last = (s.v_plus[s.v_plus.len() - 1] * self.reduced_h[self.reduced_h.len() - 1]).ln_norm();
        let a = self.prefix[(self.n_min - s.lo) as usize].ln_norm();
        let b = self.suffix[(self.n_max - s.lo) as usize].ln_norm();
        ((first - a).exp()).max((last - b).exp())
    }

    fn idx(&self, n: i64) -> usize {
        (n - self.sol.lo) as usize
    }

    /// `q_n e^{−πp₀/(2ω)}` with `q_n = W f_n`.
    fn reduced_q(&self, n: i64) -> Result<Scaled> {
        if !(self.n_min..=self.n_max).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "site {n} outside the solved range [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        let i = self.idx(n);
        let s = &self.sol;
        let (mut a, mut b) = (self.prefix[i], self.suffix[i]);
        if self.route == Route::Regularized {
            match n {
                0 | 1 => return Err(Error::UseShiftedRelation { n }),
                n if n >= 2 => a = a + self.paired_terms(|m| s.v_minus_at(m)),
                _ => b = b + self.paired_terms(|m| s.v_plus_at(m)),
            }
        }
        Ok(s.v_plus[i] * a + s.v_minus[i] * b)
    }

    /// `v_1 H̃_1 + v_{−1} H̃_{−1}` without the `1/p₀` cancellation, using
    /// `v_1 + v_{−1} = D_0 v_0`.
    fn paired_terms(&self, v: impl Fn(i64) -> Scaled) -> Scaled {
        let (p0, omega, r) = (self.sol.p0, self.sol.omega, self.sol.r);
        let den = p0 * p0 + 4.0 * omega * omega;
        let diff = v(1) - v(-1);
        let ratio = sqrt_ratio_at_origin(p0);
        let combo = diff * (I / den) + v(0) * (4.0 * omega / (r * den) * ratio);
        combo * (I * omega)
    }

    /// `f_n` (including the `e^{πp₀/(2ω)}` factor).
    pub fn f(&self, n: i64) -> Result<C64> {
        let e = (PI * self.sol.p0 / (2.0 * self.sol.omega)).exp();
        Ok((self.reduced_q(n)? / self.wronskian).to_complex() * e)
    }

    /// `W f_n`, the combination that stays finite as p₀ → 0.
    pub fn q(&self, n: i64) -> Result<C64> {
        let e = (PI * self.sol.p0 / (2.0 * self.sol.omega)).exp();
        Ok(self.reduced_q(n)?.to_complex() * e)
    }

    pub fn p(&self, n: i64) -> C64 {
        self.sol.p0 + I * (n as f64 * self.sol.omega)
    }

    /// `y(p₀ + inω)`.
    pub fn y(&self, n: i64) -> Result<C64> {
        let (p0, omega) = (self.sol.p0, self.sol.omega);
        let f_red = (self.reduced_q(n)? / self.wronskian).to_complex();
        let link = -2.0 * I * sqrt_one_plus_minus_one(-I * p0 + n as f64 * omega) * i_pow(-n);
        Ok(link * f_red)
    }

    /// Largest residual of `f_{n+1} + f_{n−1} − D_n f_n + H_n`, relative to
    /// `|H_n|`, over the interior of the solved range (reduced units).
    pub fn recurrence_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        let f = |n: i64| -> Result<C64> { Ok((self.reduced_q(n)? / self.wronskian).to_complex()) };
        for n in self.n_min + 1..self.n_max {
            let h = self.reduced_h[self.idx(n)];
            let res = f(n + 1)? + f(n - 1)? - self.sol.d_at(n) * f(n)? + h;
            worst = worst.max(res.norm() / h.norm());
        }
        Ok(worst)
    }
}

/// One evaluated resolvent value.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ResolventSample {
    #[serde(serialize_with = "ser_complex")]
    pub p: C64,
    #[serde(serialize_with = "ser_complex")]
    pub y: C64,
    pub residual: f64,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Refuses `p` on a branch point `i(mω − 1)`.
fn check_branch_point(p: C64, omega: f64) -> Result<()> {
    if p.re == 0.0 {
        let m = (p.im + 1.0) / omega;
        if (m - m.round()).abs() < 1e-14 * m.abs().max(1.0) {
            return Err(Error::BranchPoint { p_re: p.re, p_im: p.im });
        }
    }
    Ok(())
}

/// Values of y on the lattice through `p`, at offsets `−2..=2` around it.
struct LocalValues {
    values: [C64; 5],
}

impl LocalValues {
    fn at(&self, k: i64) -> C64 {
        self.values[(k + 2) as usize]
    }
}

fn local_values(p: C64, r: f64, omega: f64) -> Result<LocalValues> {
    let params = DriveParams::new(r, omega)?;
    check_branch_point(p, omega)?;
    let pt = LatticePoint::from_p(p, omega);
    let n = pt.n;
    let mut values = [C64::new(0.0, 0.0); 5];
    if p.re.abs() >= BOUNDARY_LAYER {
        let lat = ResolventLattice::new(pt.p0, r, omega, n - 2, n + 2, Route::Direct)?;
        for (k, v) in values.iter_mut().enumerate() {
            *v = lat.y(n + k as i64 - 2)?;
        }
    } else {
        let lat = ResolventLattice::new(pt.p0, r, omega, n - 4, n + 4, Route::Regularized)?;
        for (k, v) in values.iter_mut().enumerate() {
            *v = boundary_y(&lat, &params, n + k as i64 - 2)?;
        }
    }
    Ok(LocalValues { values })
}

/// `y` at a boundary-layer site: regularized sums, or the shifted relation
/// for the two sites next to the delicate point.
fn boundary_y(lat: &ResolventLattice, params: &DriveParams, n: i64) -> Result<C64> {
    match n {
        0 => shifted_relation(lat, params, n, -1),
        1 => shifted_relation(lat, params, n, 1),
        _ => lat.y(n),
    }
}

/// `y(p)` from `y(p ± iω)`, `y(p ± 2iω)` by rearranging the functional
/// equation; `dir = +1` uses the upper neighbours, `−1` the lower ones.
pub fn shifted_relation(lat: &ResolventLattice, params: &DriveParams, n: i64, dir: i64) -> Result<C64> {
    let r = params.r;
    let p = lat.p(n);
    let far = lat.p(n + 2 * dir);
    let s = sqrt_one_minus_ip(p).value;
    let rhs = dir as f64 * p * lat.y(n + dir)?
        + r * I / 2.0
        + r * p * h1(far)?
        + r * p * h2(far)? * lat.y(n + 2 * dir)?;
    Ok(rhs / (r * (1.0 + s) / 2.0))
}

/// `|y(p) − r[(h₁+h₂y)(p−iω) − (h₁+h₂y)(p+iω)]|` for a sampler `y_at`.
pub fn fnceq_residual(p: C64, r: f64, omega: f64, y_at: impl Fn(C64) -> Result<C64>) -> Result<f64> {
    let lo = p - I * omega;
    let hi = p + I * omega;
    let g = |q: C64| -> Result<C64> { Ok(h1(q)? + h2(q)? * y_at(q)?) };
    Ok((y_at(p)? - r * (g(lo)? - g(hi)?)).norm())
}

/// Resolvent at `p` with its functional-equation residual.
pub fn resolvent_y(p: C64, r: f64, omega: f64) -> Result<ResolventSample> {
    let loc = local_values(p, r, omega)?;
    let y = loc.at(0);
    let lo = p - I * omega;
    let hi = p + I * omega;
    let g = |q: C64, v: C64| -> Result<C64> { Ok(h1(q)? + h2(q)? * v) };
    let residual = (y - r * (g(lo, loc.at(-1))? - g(hi, loc.at(1))?)).norm();
    Ok(ResolventSample { p, y, residual })
}

/// Two-level Richardson of `y` over p = 1e−2, 1e−3, 1e−4 (error ∝ p, then p²).
pub fn richardson_origin(r: f64, omega: f64) -> Result<C64> {
    let mut y = [C64::new(0.0, 0.0); 3];
    for (slot, p) in y.iter_mut().zip([1e-2, 1e-3, 1e-4]) {
        *slot = resolvent_y(C64::new(p, 0.0), r, omega)?.y;
    }
    let fine = (10.0 * y[2] - y[1]) / 9.0;
    let coarse = (10.0 * y[1] - y[0]) / 9.0;
    Ok((100.0 * fine - coarse) / 99.0)
}

/// `W f_n` near the axis with the `1/p₀` cancellation removed.
pub fn regularized_q(point: &LatticePoint, r: f64) -> Result<C64> {
    if point.n == 0 || point.n == 1 {
        return Err(Error::UseShiftedRelation { n: point.n });
    }
    let lat = ResolventLattice::new(point.p0, r, point.omega, point.n, point.n, Route::Regularized)?;
    lat.q(point.n)
}

/// `count` samples on `Re p = sigma`, `Im p` evenly spread over `[−tau_max, tau_max]`.
pub fn sample_line(sigma: f64, tau_max: f64, count: usize, r: f64, omega: f64) -> Result<Vec<ResolventSample>> {
    assert!(count >= 2);
    (0..count)
        .into_par_iter()
        .map(|j| {
            let tau = -tau_max + 2.0 * tau_max * j as f64 / (count - 1) as f64;
            resolvent_y(C64::new(sigma, tau), r, omega)
        })
        .collect()
}

pub fn samples_table(samples: &[ResolventSample]) -> Table {
    let mut t = Table::new(&["re_p", "im_p", "re_y", "im_y", "residual"]);
    for s in samples {
        t.push(vec![s.p.re, s.p.im, s.y.re, s.y.im, s.residual]);
    }
    t
}

/// Bromwich-line parameters.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BromwichOptions {
    /// Target bound on the truncated-tail contribution.
    pub tol: f64,
    pub p_max_initial: f64,
    pub p_max_limit: f64,
}

impl Default for BromwichOptions {
    fn default() -> Self {
        BromwichOptions {
            tol: 1e-6,
            p_max_initial: 200.0,
            p_max_limit: 1e5,
        }
    }
}

/// Diagnostics of an inversion.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BromwichReport {
    pub sigma: f64,
    pub d_tau: f64,
    pub p_max: f64,
    pub samples: usize,
    /// Estimated contribution of `|Im p| > p_max` to Y.
    pub tail: f64,
}

/// `y − rω/(p² + ω²)`: the resolvent with its leading drive term removed.
struct LineSamples {
    p: Vec<C64>,
    y_hat: Vec<C64>,
}

fn line_samples(params: &DriveParams, sigma: f64, lattices: usize, d_tau: f64, n_p: i64, p_max: f64) -> Result<LineSamples> {
    let (r, omega) = (params.r, params.omega);
    let per: Vec<Result<Vec<(C64, C64)>>> = (0..lattices)
        .into_par_iter()
        .map(|k| {
            let p0 = C64::new(sigma, k as f64 * d_tau);
            let lat = ResolventLattice::new(p0, r, omega, -n_p, n_p, Route::Direct)?;
            let mut out = Vec::new();
            for n in -n_p..=n_p {
                let p = lat.p(n);
                if p.im.abs() > p_max {
                    continue;
                }
                let drive = r * omega / (p * p + omega * omega);
                out.push((p, lat.y(n)? - drive));
            }
            Ok(out)
        })
        .collect();
    let mut p = Vec::new();
    let mut y_hat = Vec::new();
    for chunk in per {
        for (a, b) in chunk? {
            p.push(a);
            y_hat.push(b);
        }
    }
    Ok(LineSamples { p, y_hat })
}

/// Inverts the resolvent on `Re p = σ` at the given times, returning
/// `(Y(t), θ(t))` pairs and diagnostics.
pub fn invert_laplace(params: &DriveParams, times: &[f64], opts: &BromwichOptions) -> Result<(Vec<C64>, Vec<C64>, BromwichReport)> {
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    if !(t_max > 0.0) || times.iter().any(|t| *t < 0.0 || !t.is_finite()) {
        return Err(Error::InvalidParameter("inversion times must be non-negative and not all zero".into()));
    }
    let omega = params.omega;
    let sigma = 0.1f64.max(2.0 / t_max);
    let lattices = (omega / (PI / (4.0 * t_max))).ceil() as usize;
    let d_tau = omega / lattices as f64;
    let growth = (sigma * t_max).exp() / (2.0 * PI);

    let mut p_max = opts.p_max_initial.max(4.0 * omega);
    let (samples, tail) = loop {
        let n_p = (p_max / omega).ceil() as i64 + 1;
        let s = line_samples(params, sigma, lattices, d_tau, n_p, p_max)?;
        // |ŷ| ≲ C|p|^{−5/2}: fit C on the outer tenth of the line
        let c = s
            .p
            .iter()
            .zip(&s.y_hat)
            .filter(|(p, _)| p.im.abs() > 0.9 * p_max)
            .map(|(p, y)| y.norm() * p.norm().powf(2.5))
            .fold(0.0, f64::max);
        let tail = growth * 2.0 * c * (2.0 / 3.0) * p_max.powf(-1.5);
        if tail < opts.tol {
            break (s, tail);
        }
        if p_max >= opts.p_max_limit {
            return Err(Error::BromwichTail {
                tail,
                tol: opts.tol,
                p_max,
            });
        }
        p_max = (2.0 * p_max).min(opts.p_max_limit);
    };

    let (r, omega) = (params.r, params.omega);
    let weight = d_tau / (2.0 * PI);
    let out: Vec<(C64, C64)> = times
        .par_iter()
        .map(|&t| {
            let mut sy = C64::new(0.0, 0.0);
            let mut st = C64::new(0.0, 0.0);
            for (p, yh) in samples.p.iter().zip(&samples.y_hat) {
                let e = C64::from_polar(1.0, p.im * t);
                sy += yh * e;
                st += 2.0 * I * yh / p * e;
            }
            let scale = weight * (sigma * t).exp();
            let y = r * (omega * t).sin() + scale * sy;
            let theta = 1.0 + 2.0 * I * r * (1.0 - (omega * t).cos()) / omega + scale * st;
            (y, theta)
        })
        .collect();
    let report = BromwichReport {
        sigma,
        d_tau,
        p_max,
        samples: samples.p.len(),
        tail,
    };
    let (y, theta) = out.into_iter().unzip();
    Ok((y, theta, report))
}

/// θ(t) (and Y) on a uniform grid by Bromwich inversion of the resolvent.
pub fn invert_laplace_theta(params: &DriveParams, grid: &TimeGrid, opts: &BromwichOptions) -> Result<(SurvivalTrace, BromwichReport)> {
    let times: Vec<f64> = (0..grid.len()).map(|j| grid.time(j)).collect();
    let (y, theta, report) = invert_laplace(params, &times, opts)?;
    Ok((
        SurvivalTrace {
            grid: *grid,
            y_samples: y,
            theta,
        },
        report,
    ))
}
