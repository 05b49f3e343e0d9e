//! Decay pole of the resolvent, the ionization rate, and small-amplitude limits.
//!
//! Poles of `y` in a strip of height ω are zeros of the continued Wronskian
//! `W(p₀)` of the minimal solutions. They lie just left of the imaginary axis,
//! between the horizontal continuation cuts that run leftward from the branch
//! points `i(kω − 1)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::csv::Table;
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::lattice::{LatticeSolution, ANCHOR};
use crate::volterra::{DriveParams, SurvivalTrace};

const MAX_ITERATIONS: usize = 50;

/// Factors `1 − ip₀ + nω` closer than this to their cut raise a flag.
pub const CUT_MARGIN: f64 = 1e-6;

/// Located pole and diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PoleResult {
    /// Pole in normal form, `0 <= Im < ω`.
    pub p_star: (f64, f64),
    /// Pole as found, in the strip of the guess.
    pub p_found: (f64, f64),
    pub gamma_rate: f64,
    /// `|W(p*)|` relative to the largest `|W|` seen during the search.
    pub wronskian_residual: f64,
    pub iterations: usize,
    /// Zeros of W counted by the argument principle on the certifying rectangle.
    pub winding: i64,
    /// Smallest `|Re(1 − ip₀ + nω)|` over factors continued past the axis.
    pub cut_distance: f64,
    pub near_cut: bool,
}

impl PoleResult {
    pub fn p_star(&self) -> C64 {
        C64::new(self.p_star.0, self.p_star.1)
    }
}

/// Closed-form small-r rate coefficient.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LimitEvaluation {
    pub omega: f64,
    pub n_photon: u32,
    pub gamma_hat: f64,
}

/// Smallest `n` with `nω > 1`.
pub fn photon_order(omega: f64) -> u32 {
    (1.0 / omega).floor() as u32 + 1
}

/// `Γ̂(ω) = 2^{2−2n} √(nω−1) / (nω ∏_{m=1}^{n−1} (1 − √(1 − mω))²)`, so that
/// `Γ ≈ Γ̂ r^{2n}` for small r.
pub fn gamma_hat_limit(omega: f64) -> Result<LimitEvaluation> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega = {omega} must be positive")));
    }
    let inv = 1.0 / omega;
    if (inv - inv.round()).abs() < 1e-9 * inv.max(1.0) {
        return Err(Error::Resonance { inv });
    }
    let n = photon_order(omega);
    let nw = n as f64 * omega;
    let product: f64 = (1..n).map(|m| (1.0 - (1.0 - m as f64 * omega).sqrt()).powi(2)).product();
    let gamma_hat = 2f64.powi(2 - 2 * n as i32) * (nw - 1.0).sqrt() / (nw * product);
    Ok(LimitEvaluation {
        omega,
        n_photon: n,
        gamma_hat,
    })
}

/// `2^{1/4}/8 − 2^{3/4}/16`: decay constant along `ω = 1 + r²/√2`.
pub fn resonance_constant() -> f64 {
    2f64.powf(0.25) / 8.0 - 2f64.powf(0.75) / 16.0
}

/// `W(p₀)` of the anchored minimal solutions, continued to Re(p₀) < 0.
pub fn wronskian_value(p0: C64, r: f64, omega: f64) -> Result<C64> {
    let sol = LatticeSolution::build(p0, r, omega, -ANCHOR - 1, ANCHOR + 1)?;
    Ok(sol.wronskian_at(0).to_complex())
}

/// Height of the cut line below `im`: the largest `kω − 1 <= im`.
fn cut_below(im: f64, omega: f64) -> f64 {
    ((im + 1.0) / omega).floor() * omega - 1.0
}

/// Distance of `p₀`'s factors from their cuts; only factors with
/// `Re(1 − ip₀ + nω) < 0` are continued through Re(p₀) = 0.
fn cut_distance(p0: C64, omega: f64) -> f64 {
    let below = cut_below(p0.im, omega);
    (p0.im - below).min(below + omega - p0.im)
}

/// Default starting point `−Γ̂ r^{2n}/2 + i m ω` for strip `m`.
pub fn default_guess(params: &DriveParams, strip: i64) -> Result<C64> {
    let lim = gamma_hat_limit(params.omega)?;
    let re = -lim.gamma_hat * params.r.powi(2 * lim.n_photon as i32) / 2.0;
    Ok(C64::new(re, strip as f64 * params.omega))
}

/// Number of zeros of `W` inside the rectangle, by the argument principle.
pub fn count_zeros(r: f64, omega: f64, re: (f64, f64), im: (f64, f64)) -> Result<i64> {
    let corners = [
        C64::new(re.0, im.0),
        C64::new(re.1, im.0),
        C64::new(re.1, im.1),
        C64::new(re.0, im.1),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let pts: Vec<C64> = (0..=64).map(|j| a + (b - a) * (j as f64 / 64.0)).collect();
        let vals: Vec<C64> = pts
            .par_iter()
            .map(|&p| wronskian_value(p, r, omega))
            .collect::<Result<_>>()?;
        for j in 0..64 {
            total += arg_change(r, omega, pts[j], pts[j + 1], vals[j], vals[j + 1], 0)?;
        }
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn arg_change(r: f64, omega: f64, a: C64, b: C64, wa: C64, wb: C64, depth: u32) -> Result<f64> {
    let d = (wb / wa).arg();
    if d.abs() < PI / 4.0 || depth > 40 {
        return Ok(d);
    }
    let mid = (a + b) / 2.0;
    let wm = wronskian_value(mid, r, omega)?;
    Ok(arg_change(r, omega, a, mid, wa, wm, depth + 1)? + arg_change(r, omega, mid, b, wm, wb, depth + 1)?)
}

struct SecantOutcome {
    root: C64,
    iterations: usize,
    residual: f64,
}

/// Damped complex secant on W, confined to the strip between two cuts.
fn secant(r: f64, omega: f64, guess: C64, strip: (f64, f64)) -> Result<SecantOutcome> {
    let w = |p: C64| wronskian_value(p, r, omega);
    let h = (guess.re.abs() * 0.1).max(1e-6);
    let mut a = guess;
    let mut b = guess + C64::new(-h, 0.5 * h);
    let (mut wa, mut wb) = (w(a)?, w(b)?);
    let mut scale = wa.norm().max(wb.norm());
    for it in 1..=MAX_ITERATIONS {
        let denom = wb - wa;
        if denom.norm() == 0.0 {
            break;
        }
        let mut step = -wb * (b - a) / denom;
        // keep clear of the cut lines bounding the strip
        let room = 0.25 * (b.im - strip.0).min(strip.1 - b.im);
        if step.norm() > room {
            step *= room / step.norm();
        }
        let c = b + step;
        let wc = w(c)?;
        scale = scale.max(wc.norm());
        a = b;
        wa = wb;
        b = c;
        wb = wc;
        if step.norm() <= 1e-15 * b.norm().max(1e-6) || wb.norm() <= 1e-15 * scale {
            return Ok(SecantOutcome {
                root: b,
                iterations: it,
                residual: wb.norm() / scale,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: wb.norm() / scale,
    })
}

/// Shrinks a rectangle holding exactly one zero until it is small.
fn localize(r: f64, omega: f64, mut re: (f64, f64), mut im: (f64, f64)) -> Result<C64> {
    for _ in 0..24 {
        let wide = (re.1 - re.0) >= (im.1 - im.0);
        let halves = if wide {
            let m = 0.5 * (re.0 + re.1);
            [((re.0, m), im), ((m, re.1), im)]
        } else {
            let m = 0.5 * (im.0 + im.1);
            [(re, (im.0, m)), (re, (m, im.1))]
        };
        let first = count_zeros(r, omega, halves[0].0, halves[0].1)?;
        let pick = if first >= 1 { halves[0] } else { halves[1] };
        re = pick.0;
        im = pick.1;
    }
    Ok(C64::new(0.5 * (re.0 + re.1), 0.5 * (im.0 + im.1)))
}

/// Locates the decay pole in the strip containing `guess`.
pub fn find_pole(params: &DriveParams, guess: C64) -> Result<PoleResult> {
    let (r, omega) = (params.r, params.omega);
    if let Some(m) = crate::lattice::resonance_order(omega, 1e-3) {
        return Err(Error::Resonance { inv: m as f64 });
    }
    let lo = cut_below(guess.im, omega);
    let strip = (lo, lo + omega);
    let lim = gamma_hat_limit(omega)?;
    let expected = lim.gamma_hat * r.powi(2 * lim.n_photon as i32);
    let pad = 1e-3 * omega;
    let im_box = (strip.0 + pad, strip.1 - pad);

    let attempt = secant(r, omega, guess, strip).ok().filter(|s| s.root.re < 0.0 && s.root.im > im_box.0 && s.root.im < im_box.1);
    let outcome = match attempt {
        Some(s) => s,
        None => {
            let left = -4.0 * expected.max(1e-12);
            let re_box = (left, -left);
            if count_zeros(r, omega, re_box, im_box)? != 1 {
                return Err(Error::NoConvergence {
                    iterations: MAX_ITERATIONS,
                    residual: f64::NAN,
                });
            }
            let start = localize(r, omega, re_box, im_box)?;
            secant(r, omega, start, strip)?
        }
    };
    let root = outcome.root;
    if root.re >= 0.0 {
        return Err(Error::NoConvergence {
            iterations: outcome.iterations,
            residual: outcome.residual,
        });
    }
    let left = (-4.0 * expected).min(2.0 * root.re);
    let winding = count_zeros(r, omega, (left, -left), im_box)?;
    let distance = cut_distance(root, omega);
    let mut im = root.im.rem_euclid(omega);
    if im >= omega {
        im -= omega;
    }
    Ok(PoleResult {
        p_star: (root.re, im),
        p_found: (root.re, root.im),
        gamma_rate: -2.0 * root.re,
        wronskian_residual: outcome.residual,
        iterations: outcome.iterations,
        winding,
        cut_distance: distance,
        near_cut: distance < CUT_MARGIN,
    })
}

/// [`find_pole`] from [`default_guess`] in strip 0.
pub fn find_decay_pole(params: &DriveParams) -> Result<PoleResult> {
    find_pole(params, default_guess(params, 0)?)
}

/// Least-squares slope of `ln|θ|²` on the part of the trace with
/// `lo < |θ|² < hi`, after averaging over whole drive periods.
pub fn fit_decay_slope(trace: &SurvivalTrace, lo: f64, hi: f64, omega: f64) -> Result<f64> {
    let surv = trace.survival();
    if surv.is_empty() {
        return Err(Error::EmptyWindow("trace has no θ samples".into()));
    }
    let start = surv.iter().position(|&s| s < hi && s > lo);
    let end = surv.iter().rposition(|&s| s > lo && s < hi);
    let (start, end) = match (start, end) {
        (Some(a), Some(b)) if b > a + 2 => (a, b),
        _ => return Err(Error::EmptyWindow(format!("no samples with {lo} < |θ|² < {hi}"))),
    };
    let dt = trace.grid.dt;
    let period = 2.0 * PI / omega;
    let span = (end - start) as f64 * dt;
    let periods = (span / period).floor();
    let log: Vec<f64> = surv[start..=end].iter().map(|s| s.ln()).collect();
    let times: Vec<f64> = (start..=end).map(|j| trace.grid.time(j)).collect();
    if periods < 2.0 {
        let (slope, _) = linear_fit(&times, &log).ok_or_else(|| Error::EmptyWindow("degenerate window".into()))?;
        return Ok(slope);
    }
    // trim to an integer number of periods, then take one-period running means
    let usable = span.min(periods * period);
    let mut cumulative = vec![0.0; log.len()];
    for j in 1..log.len() {
        cumulative[j] = cumulative[j - 1] + 0.5 * dt * (log[j - 1] + log[j]);
    }
    let at = |t: f64| -> f64 {
        let x = t / dt;
        let j = (x.floor() as usize).min(log.len() - 2);
        let frac = x - j as f64;
        // exact integral of the linear interpolant up to t
        cumulative[j] + dt * frac * (log[j] + 0.5 * frac * (log[j + 1] - log[j]))
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut j = 0;
    while j as f64 * dt + period <= usable + 1e-12 {
        let t = j as f64 * dt;
        xs.push(times[j]);
        ys.push((at(t + period) - at(t)) / period);
        j += 1;
    }
    if xs.len() < 2 {
        return Err(Error::EmptyWindow("window shorter than one period".into()));
    }
    let (slope, _) = linear_fit(&xs, &ys).ok_or_else(|| Error::EmptyWindow("degenerate window".into()))?;
    Ok(slope)
}

/// Log–log slope of Γ against r.
pub fn scaling_exponent(omega: f64, r_list: &[f64]) -> Result<f64> {
    if r_list.len() < 3 {
        return Err(Error::InvalidParameter("need at least three amplitudes".into()));
    }
    let gammas: Vec<f64> = r_list
        .par_iter()
        .map(|&r| find_decay_pole(&DriveParams::new(r, omega)?).map(|p| p.gamma_rate))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = r_list.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = gammas.iter().map(|g| g.ln()).collect();
    let (slope, _) = linear_fit(&xs, &ys).ok_or_else(|| Error::InvalidParameter("degenerate amplitude list".into()))?;
    Ok(slope)
}

/// One row of a rate sweep.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub omega: f64,
    pub pole: PoleResult,
    pub gamma_hat: f64,
    /// Fitted `d ln|θ|²/dt`, NaN when no trace was evaluated.
    pub slope_fit: f64,
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&["r", "omega", "re_p_star", "im_p_star", "gamma", "gamma_hat", "slope_fit"]);
    for row in rows {
        t.push(vec![
            row.r,
            row.omega,
            row.pole.p_star.0,
            row.pole.p_star.1,
            row.pole.gamma_rate,
            row.gamma_hat,
            row.slope_fit,
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volterra::TimeGrid;

    #[test]
    fn gamma_hat_examples() {
        assert!((gamma_hat_limit(2.0).unwrap().gamma_hat - 0.5).abs() < 1e-15);
        let two_thirds = gamma_hat_limit(2.0 / 3.0).unwrap();
        assert_eq!(two_thirds.n_photon, 2);
        let by_hand = 0.25 * (1.0f64 / 3.0).sqrt() / (4.0 / 3.0 * (1.0 - (1.0f64 / 3.0).sqrt()).powi(2));
        assert!((two_thirds.gamma_hat - by_hand).abs() < 1e-14);
        assert!((two_thirds.gamma_hat - 0.60602).abs() < 1e-4);
        assert!(matches!(gamma_hat_limit(1.0), Err(Error::Resonance { .. })));
        assert!(matches!(gamma_hat_limit(0.5), Err(Error::Resonance { .. })));
    }

    #[test]
    fn single_photon_matches_golden_rule() {
        for omega in [1.2, 1.5, 3.0] {
            let g = gamma_hat_limit(omega).unwrap();
            assert_eq!(g.n_photon, 1);
            assert!((g.gamma_hat - (omega - 1.0).sqrt() / omega).abs() < 1e-15);
        }
    }

    #[test]
    fn resonance_constant_value() {
        let c = resonance_constant();
        assert!(c > 0.0);
        assert!((c - 0.043539).abs() < 5e-6);
    }

    #[test]
    fn cut_geometry() {
        assert!((cut_below(0.0, 1.5) + 1.0).abs() < 1e-15);
        assert!((cut_below(0.6, 1.5) - 0.5).abs() < 1e-15);
        assert!((cut_distance(C64::new(-0.01, 0.0), 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pole_left_of_axis() {
        let params = DriveParams::new(0.3, 1.5).unwrap();
        let pole = find_decay_pole(&params).unwrap();
        assert!(pole.p_star.0 < 0.0);
        assert!((0.0..1.5).contains(&pole.p_star.1));
        assert_eq!(pole.winding, 1);
        assert!(!pole.near_cut);
        let g = gamma_hat_limit(1.5).unwrap().gamma_hat * 0.09;
        assert!((pole.gamma_rate / g - 1.0).abs() < 0.3, "{} vs {g}", pole.gamma_rate);
    }

    #[test]
    fn resolvent_blows_up_at_pole() {
        let params = DriveParams::new(0.5, 1.5).unwrap();
        let pole = find_decay_pole(&params).unwrap();
        let p = C64::new(pole.p_found.0 + 1e-8, pole.p_found.1);
        let y = crate::resolvent::resolvent_y(p, params.r, params.omega).unwrap().y;
        assert!(y.norm() > 1e6, "{}", y.norm());
    }

    #[test]
    fn strips_agree() {
        let params = DriveParams::new(0.2, 1.5).unwrap();
        let a = find_pole(&params, default_guess(&params, 0).unwrap()).unwrap();
        let b = find_pole(&params, default_guess(&params, 1).unwrap()).unwrap();
        assert!((a.p_star.0 - b.p_star.0).abs() < 1e-8);
        assert!((a.p_found.1 + 1.5 - b.p_found.1).abs() < 1e-8);
    }

    #[test]
    fn resonant_frequency_refused() {
        let params = DriveParams::new(0.1, 0.5002).unwrap();
        assert!(matches!(find_decay_pole(&params), Err(Error::Resonance { .. })));
    }

    fn synthetic(omega: f64, amp: f64, t_max: f64) -> SurvivalTrace {
        let grid = TimeGrid::new(t_max, 0.01).unwrap();
        let theta = (0..grid.len())
            .map(|j| {
                let t = grid.time(j);
                C64::new((-0.05 * t).exp() * (1.0 + amp * (omega * t).cos()), 0.0)
            })
            .collect();
        SurvivalTrace {
            grid,
            y_samples: vec![C64::new(0.0, 0.0); grid.len()],
            theta,
        }
    }

    #[test]
    fn slope_of_pure_exponential() {
        let s = fit_decay_slope(&synthetic(1.5, 0.0, 100.0), 1e-4, 0.5, 1.5).unwrap();
        assert!((s + 0.1).abs() < 1e-6, "{s}");
    }

    #[test]
    fn slope_with_drive_ripple() {
        let s = fit_decay_slope(&synthetic(1.5, 0.1, 100.0), 1e-4, 0.5, 1.5).unwrap();
        assert!((s + 0.1).abs() < 1e-3, "{s}");
    }

    #[test]
    fn empty_window() {
        let tr = synthetic(1.5, 0.0, 1.0);
        assert!(matches!(fit_decay_slope(&tr, 1e-4, 0.5, 1.5), Err(Error::EmptyWindow(_))));
    }
}
