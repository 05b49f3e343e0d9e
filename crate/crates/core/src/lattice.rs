//! Three-term recurrence along the lattice `p₀ + inω`.
//!
//! The homogeneous equation is
//!
//! ```text
//! v_{n+1} + v_{n−1} = D_n v_n,    D_n = (2/r)(√(1 − ip₀ + nω) − 1),
//! ```
//!
//! with minimal solutions `v⁺` (decaying as n → +∞) and `v⁻` (decaying as
//! n → −∞). Their ratios `ρ⁺_n = v⁺_n/v⁺_{n−1}` and `ρ⁻_n = v⁻_n/v⁻_{n+1}`
//! come from backward continued fractions seeded by the large-|n| forms.
//! Both solutions are normalized at the fixed sites `±ANCHOR` to the
//! closed-form asymptotics, so values do not depend on the window.

use std::f64::consts::{E, PI};

use num_complex::Complex64 as C64;

use crate::csv::Table;
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::kernel::sqrt_one_plus_minus_one;
use crate::scaled::Scaled;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Sites where `v±` are pinned to the asymptotic forms.
pub const ANCHOR: i64 = 32;

/// Largest accepted relative Wronskian drift before declaring the pair inconsistent.
pub const WRONSKIAN_TOLERANCE: f64 = 1e-8;

/// A point `p = p₀ + inω` with `Im(p₀) ∈ [0, ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticePoint {
    pub p0: C64,
    pub n: i64,
    pub omega: f64,
}

impl LatticePoint {
    pub fn new(p0: C64, n: i64, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega = {omega} must be positive")));
        }
        if !(0.0..omega).contains(&p0.im) {
            return Err(Error::InvalidParameter(format!(
                "Im(p0) = {} outside [0, {omega})",
                p0.im
            )));
        }
        Ok(LatticePoint { p0, n, omega })
    }

    /// Splits `p` into its normal form.
    pub fn from_p(p: C64, omega: f64) -> Self {
        let n = (p.im / omega).floor();
        let mut im = p.im - n * omega;
        let mut n = n as i64;
        // rounding can leave im == omega
        if im >= omega {
            im -= omega;
            n += 1;
        }
        if im < 0.0 {
            im = 0.0;
        }
        LatticePoint {
            p0: C64::new(p.re, im),
            n,
            omega,
        }
    }

    pub fn p(&self) -> C64 {
        self.p0 + I * (self.n as f64 * self.omega)
    }

    pub fn at(&self, n: i64) -> Self {
        LatticePoint { n, ..*self }
    }
}

/// `D_n` at an arbitrary base point (no normal-form requirement, so it also
/// serves the analytic continuation to Re(p₀) < 0).
pub fn d_coefficient(p0: C64, n: i64, r: f64, omega: f64) -> C64 {
    (2.0 / r) * sqrt_one_plus_minus_one(-I * p0 + n as f64 * omega)
}

/// `D_n = (2/r)(√(1 − ip₀ + nω) − 1)` with the kernel branch.
pub fn coeff_d(point: &LatticePoint, r: f64) -> C64 {
    d_coefficient(point.p0, point.n, r, point.omega)
}

/// Continued-fraction depth from the contraction bound `r/√(ωN) < 0.05`,
/// padded so that `√(Nω)` dominates `1 + |p₀|`.
pub fn required_depth(p0: C64, r: f64, omega: f64) -> usize {
    let contraction = 400.0 * r * r / omega;
    let spread = (4.0 + 2.0 * p0.norm()) / omega;
    contraction.max(spread).max(16.0).ceil() as usize
}

/// `1/ρ̃⁺_n` (n > 0).
pub fn tilde_rho_plus_inv(p0: C64, n: i64, r: f64, omega: f64) -> C64 {
    let n = n as f64;
    let s = (n * omega).sqrt();
    C64::new(2.0 / r * s - 2.0 / r - r / (2.0 * omega * n), 0.0) - (r * r - 2.0 + 2.0 * I * p0) / (2.0 * r * s)
}

/// `1/ρ̃⁻_n` (n < 0).
pub fn tilde_rho_minus_inv(p0: C64, n: i64, r: f64, omega: f64) -> C64 {
    let m = n.unsigned_abs() as f64;
    let s = (m * omega).sqrt();
    -2.0 * I / r * s - 2.0 / r + (I * (2.0 - r * r) + 2.0 * p0) / (2.0 * r * s) + r / (2.0 * omega * m)
}

/// Closed-form `ln ṽ⁺_n` (n > 0).
pub fn log_tilde_v_plus(p0: C64, n: i64, r: f64, omega: f64) -> C64 {
    let n = n as f64;
    let ln = n.ln();
    let real = -0.5 * n * ln + n * (r / 2.0 * (E / omega).sqrt()).ln() + 2.0 * (n / omega).sqrt();
    real + (2.0 * I * p0 + r * r - omega) / (4.0 * omega) * ln
}

/// Closed-form `ln ṽ⁻_n` (n < 0).
pub fn log_tilde_v_minus(p0: C64, n: i64, r: f64, omega: f64) -> C64 {
    let m = n.unsigned_abs() as f64;
    let ln = m.ln();
    let real = -0.5 * m * ln + m * (r / 2.0 * (E / omega).sqrt()).ln();
    let phase = PI * m / 2.0 + 2.0 * (m / omega).sqrt();
    C64::new(real, phase) - (2.0 * I * p0 + r * r + omega) / (4.0 * omega) * ln
}

/// Large-|n| forms of the ratio and of the minimal solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticPrediction {
    pub n: i64,
    pub tilde_rho: C64,
    pub log_tilde_v: C64,
    /// Fitted `K±`, when a lattice solution was supplied.
    pub k_fit: Option<C64>,
}

/// Evaluates `ρ̃±_n` and `ln ṽ±_n`; the sign of `n` selects the branch.
pub fn asymptotic_prediction(n: i64, p0: C64, r: f64, omega: f64) -> Result<AsymptoticPrediction> {
    if n.abs() <= 10 {
        return Err(Error::Domain {
            what: "asymptotic_prediction",
            detail: format!("|n| = {} must exceed 10", n.abs()),
        });
    }
    let (inv, log) = if n > 0 {
        (tilde_rho_plus_inv(p0, n, r, omega), log_tilde_v_plus(p0, n, r, omega))
    } else {
        (tilde_rho_minus_inv(p0, n, r, omega), log_tilde_v_minus(p0, n, r, omega))
    };
    Ok(AsymptoticPrediction {
        n,
        tilde_rho: inv.inv(),
        log_tilde_v: log,
        k_fit: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

/// Ratios `ρ±_n` for `|n|` from `from` up to `to` (inclusive, `from <= to`,
/// both in the direction's half-line), by backward recursion from
/// `to + depth` seeded with `ρ̃`.
pub fn ratio_sweep(p0: C64, r: f64, omega: f64, direction: Direction, from: i64, to: i64, depth: usize) -> Vec<C64> {
    let start = to + depth as i64;
    let site = |m: i64| match direction {
        Direction::Plus => m,
        Direction::Minus => -m,
    };
    let seed_inv = match direction {
        Direction::Plus => tilde_rho_plus_inv(p0, site(start + 1), r, omega),
        Direction::Minus => tilde_rho_minus_inv(p0, site(start + 1), r, omega),
    };
    let mut rho = seed_inv.inv();
    let mut out = vec![C64::new(0.0, 0.0); (to - from + 1) as usize];
    for m in (from..=start).rev() {
        rho = (d_coefficient(p0, site(m), r, omega) - rho).inv();
        if m <= to {
            out[(m - from) as usize] = rho;
        }
    }
    out
}

/// `ρ±_n` at one lattice point by the continued fraction.
///
/// `depth` defaults to [`required_depth`]; smaller explicit depths are refused.
pub fn continued_fraction_rho(point: &LatticePoint, r: f64, direction: Direction, depth: Option<usize>) -> Result<C64> {
    let required = required_depth(point.p0, r, point.omega);
    let depth = depth.unwrap_or(required);
    if depth < required {
        return Err(Error::InsufficientDepth { depth, required });
    }
    let m = match direction {
        Direction::Plus => point.n,
        Direction::Minus => -point.n,
    };
    // the tail seed needs a large index; pad the start accordingly
    let to = m.max(ANCHOR);
    Ok(ratio_sweep(point.p0, r, point.omega, direction, m, to, depth)[0])
}

/// Minimal solutions, ratios and coefficients on a window `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct LatticeSolution {
    pub p0: C64,
    pub r: f64,
    pub omega: f64,
    pub lo: i64,
    pub hi: i64,
    pub depth: usize,
    pub d: Vec<C64>,
    pub rho_plus: Vec<C64>,
    pub rho_minus: Vec<C64>,
    pub v_plus: Vec<Scaled>,
    pub v_minus: Vec<Scaled>,
    /// ω within 1e−3 of some 1/m (m ≤ 10) while p₀ is near the axis.
    pub near_resonance: bool,
}

/// Wronskian with its constancy diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WronskianCheck {
    pub value: Scaled,
    /// `max_n |W_n − W_0| / |W_0|` over the checked range.
    pub constancy: f64,
}

/// `m` if `ω` lies within `tol` of `1/m` for some `m ≤ 10`.
pub fn resonance_order(omega: f64, tol: f64) -> Option<u32> {
    (1..=10).find(|&m| (omega - 1.0 / m as f64).abs() < tol)
}

impl LatticeSolution {
    /// Builds the solution on `[lo, hi]`, widened to contain `±(ANCHOR+1)`.
    pub fn build(p0: C64, r: f64, omega: f64, lo: i64, hi: i64) -> Result<Self> {
        Self::build_with_depth(p0, r, omega, lo, hi, None)
    }

    /// Symmetric window `[−n, n]` around the base point of `point`.
    pub fn minimal_solutions(point: &LatticePoint, r: f64, n: i64) -> Result<Self> {
        Self::build(point.p0, r, point.omega, -n, n)
    }

    pub fn build_with_depth(p0: C64, r: f64, omega: f64, lo: i64, hi: i64, depth: Option<usize>) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude r = {r} must be positive")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega = {omega} must be positive")));
        }
        if !(p0.re.is_finite() && p0.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite base point".into()));
        }
        let required = required_depth(p0, r, omega);
        let depth = depth.unwrap_or(required);
        if depth < required {
            return Err(Error::InsufficientDepth { depth, required });
        }
        let lo = lo.min(-ANCHOR - 1);
        let hi = hi.max(ANCHOR + 1);
        let len = (hi - lo + 1) as usize;
        let idx = |n: i64| (n - lo) as usize;

        let d: Vec<C64> = (lo..=hi).map(|n| d_coefficient(p0, n, r, omega)).collect();

        // ρ⁺ on [lo, hi]: backward from hi + depth
        let mut rho_plus = vec![C64::new(0.0, 0.0); len];
        {
            let start = hi + depth as i64;
            let mut rho = tilde_rho_plus_inv(p0, start + 1, r, omega).inv();
            for n in (lo..=start).rev() {
                let dn = if n <= hi { d[idx(n)] } else { d_coefficient(p0, n, r, omega) };
                rho = (dn - rho).inv();
                if n <= hi {
                    rho_plus[idx(n)] = rho;
                }
            }
        }
        // ρ⁻ on [lo, hi]: forward from lo − depth
        let mut rho_minus = vec![C64::new(0.0, 0.0); len];
        {
            let start = lo - depth as i64;
            let mut rho = tilde_rho_minus_inv(p0, start - 1, r, omega).inv();
            for n in start..=hi {
                let dn = if n >= lo { d[idx(n)] } else { d_coefficient(p0, n, r, omega) };
                rho = (dn - rho).inv();
                if n >= lo {
                    rho_minus[idx(n)] = rho;
                }
            }
        }

        // v⁺: ratios upward from the anchor, recurrence downward
        let mut v_plus = vec![Scaled::ZERO; len];
        v_plus[idx(ANCHOR)] = Scaled::from_log(log_tilde_v_plus(p0, ANCHOR, r, omega));
        for n in ANCHOR + 1..=hi {
            v_plus[idx(n)] = v_plus[idx(n - 1)] * rho_plus[idx(n)];
        }
        for n in (lo + 1..=ANCHOR).rev() {
            v_plus[idx(n - 1)] = v_plus[idx(n)] * d[idx(n)] - v_plus[idx(n + 1)];
        }
        // v⁻: mirror image
        let mut v_minus = vec![Scaled::ZERO; len];
        v_minus[idx(-ANCHOR)] = Scaled::from_log(log_tilde_v_minus(p0, -ANCHOR, r, omega));
        for n in (lo..-ANCHOR).rev() {
            v_minus[idx(n)] = v_minus[idx(n + 1)] * rho_minus[idx(n)];
        }
        for n in -ANCHOR..hi {
            v_minus[idx(n + 1)] = v_minus[idx(n)] * d[idx(n)] - v_minus[idx(n - 1)];
        }

        let near_resonance = resonance_order(omega, 1e-3).is_some() && p0.re.abs() < 1e-2;
        Ok(LatticeSolution {
            p0,
            r,
            omega,
            lo,
            hi,
            depth,
            d,
            rho_plus,
            rho_minus,
            v_plus,
            v_minus,
            near_resonance,
        })
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.lo..=self.hi).contains(&n)
    }

    fn idx(&self, n: i64) -> usize {
        assert!(self.contains(n), "site {n} outside window [{}, {}]", self.lo, self.hi);
        (n - self.lo) as usize
    }

    pub fn d_at(&self, n: i64) -> C64 {
        self.d[self.idx(n)]
    }

    pub fn v_plus_at(&self, n: i64) -> Scaled {
        self.v_plus[self.idx(n)]
    }

    pub fn v_minus_at(&self, n: i64) -> Scaled {
        self.v_minus[self.idx(n)]
    }

    /// `W_n = v⁺_n v⁻_{n+1} − v⁻_n v⁺_{n+1}`.
    pub fn wronskian_at(&self, n: i64) -> Scaled {
        let i = self.idx(n);
        self.v_plus[i] * self.v_minus[i + 1] - self.v_minus[i] * self.v_plus[i + 1]
    }

    /// `W_0` with constancy checked over `[lo/2, hi/2]`.
    pub fn wronskian(&self) -> Result<WronskianCheck> {
        let check = self.wronskian_over(self.lo / 2, self.hi / 2);
        if !(check.constancy <= WRONSKIAN_TOLERANCE) {
            return Err(Error::InconsistentSolutions { drift: check.constancy });
        }
        Ok(check)
    }

    /// `W_0` and its largest relative deviation over `[from, to]`.
    pub fn wronskian_over(&self, from: i64, to: i64) -> WronskianCheck {
        let w0 = self.wronskian_at(0);
        let constancy = if w0.is_zero() {
            f64::INFINITY
        } else {
            (from..to)
                .map(|n| ((self.wronskian_at(n) - w0) / w0).norm())
                .fold(0.0, f64::max)
        };
        WronskianCheck { value: w0, constancy }
    }

    /// Largest relative residual of the homogeneous recurrence on the interior.
    pub fn recurrence_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for v in [&self.v_plus, &self.v_minus] {
            for i in 1..v.len() - 1 {
                let res = v[i + 1] + v[i - 1] - v[i] * self.d[i];
                let scale = [v[i + 1], v[i - 1], v[i] * self.d[i]]
                    .iter()
                    .map(|s| s.ln_norm())
                    .fold(f64::NEG_INFINITY, f64::max);
                if !res.is_zero() {
                    worst = worst.max((res.ln_norm() - scale).exp());
                }
            }
        }
        worst
    }

    /// `max_n |J(ρ)_n − ρ_n|` for the stored ratios beyond the anchors.
    pub fn fixed_point_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in ANCHOR..self.hi {
            let i = self.idx(n);
            worst = worst.max(((self.d[i] - self.rho_plus[i + 1]).inv() - self.rho_plus[i]).norm());
        }
        for n in self.lo + 1..=-ANCHOR {
            let i = self.idx(n);
            worst = worst.max(((self.d[i] - self.rho_minus[i - 1]).inv() - self.rho_minus[i]).norm());
        }
        worst
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "n",
            "re_D",
            "im_D",
            "re_v_plus",
            "im_v_plus",
            "exp_v_plus",
            "re_v_minus",
            "im_v_minus",
            "exp_v_minus",
        ]);
        for (i, n) in (self.lo..=self.hi).enumerate() {
            let (vp, vm) = (self.v_plus[i], self.v_minus[i]);
            t.push(vec![
                n as f64,
                self.d[i].re,
                self.d[i].im,
                vp.mantissa().re,
                vp.mantissa().im,
                vp.exponent() as f64,
                vm.mantissa().re,
                vm.mantissa().im,
                vm.exponent() as f64,
            ]);
        }
        t
    }
}

/// Fitted `K±` in `ln v± = ln ṽ± + K± + o(1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KFit {
    pub k: C64,
    /// Change of the fitted constant between the two halves of the range.
    pub drift: f64,
    /// `|d(end) − d(start)|` of the raw difference `ln v − ln ṽ`.
    pub raw_drift: f64,
}

/// Fits `ln v±_n − ln ṽ±_n ≈ K + α n^{−1/2} + β n^{−1}` over `|n| ∈ [from, to]`.
pub fn fit_asymptotic_constant(sol: &LatticeSolution, direction: Direction, from: i64, to: i64) -> Result<KFit> {
    if from <= 10 || to <= from + 4 {
        return Err(Error::InvalidParameter(format!("bad fit range [{from}, {to}]")));
    }
    let site = |m: i64| if direction == Direction::Plus { m } else { -m };
    if !sol.contains(site(to)) {
        return Err(Error::InvalidParameter(format!("fit range {to} outside lattice window")));
    }
    let mut xs = Vec::new();
    let mut re = Vec::new();
    let mut im = Vec::new();
    let mut prev_im: Option<f64> = None;
    for m in from..=to {
        let n = site(m);
        let (v, pred) = match direction {
            Direction::Plus => (sol.v_plus_at(n), log_tilde_v_plus(sol.p0, n, sol.r, sol.omega)),
            Direction::Minus => (sol.v_minus_at(n), log_tilde_v_minus(sol.p0, n, sol.r, sol.omega)),
        };
        let diff = v.ln() - pred;
        // unwrap the phase so the imaginary part is continuous in m
        let mut phase = diff.im;
        if let Some(p) = prev_im {
            phase -= 2.0 * PI * ((phase - p) / (2.0 * PI)).round();
        } else {
            phase -= 2.0 * PI * (phase / (2.0 * PI)).round();
        }
        prev_im = Some(phase);
        xs.push(m as f64);
        re.push(diff.re);
        im.push(phase);
    }
    let basis: [fn(f64) -> f64; 3] = [|_| 1.0, |x| x.powf(-0.5), |x| 1.0 / x];
    let fit = |lo: usize, hi: usize| -> Result<C64> {
        let a = least_squares(&xs[lo..hi], &re[lo..hi], &basis).ok_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
        })?;
        let b = least_squares(&xs[lo..hi], &im[lo..hi], &basis).ok_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
        })?;
        Ok(C64::new(a[0], b[0]))
    };
    let count = xs.len();
    let mid = count / 2;
    let k = fit(0, count)?;
    let drift = (fit(0, mid + 1)? - fit(mid, count)?).norm();
    let raw_drift = C64::new(re[count - 1] - re[0], im[count - 1] - im[0]).norm();
    Ok(KFit { k, drift, raw_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const R: f64 = 0.3;
    const OMEGA: f64 = 1.5;

    fn p0() -> C64 {
        C64::new(0.1, 0.0)
    }

    fn rel(a: Scaled, b: Scaled) -> f64 {
        ((a - b) / b).norm()
    }

    #[test]
    fn d_examples() {
        let origin = LatticePoint::new(C64::new(0.0, 0.0), 0, 1.0).unwrap();
        assert_eq!(coeff_d(&origin, 1.0), C64::new(0.0, 0.0));
        let d3 = coeff_d(&origin.at(3), 2.0);
        assert!((d3 - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(coeff_d(&origin.at(-10), 1.0).im < 0.0);
    }

    #[test]
    fn normal_form() {
        let pt = LatticePoint::from_p(C64::new(0.2, -0.4), 1.5);
        assert_eq!(pt.n, -1);
        assert!((pt.p0 - C64::new(0.2, 1.1)).norm() < 1e-15);
        assert!((pt.p() - C64::new(0.2, -0.4)).norm() < 1e-15);
        assert!(LatticePoint::new(C64::new(0.0, 1.5), 0, 1.5).is_err());
    }

    #[test]
    fn depth_robustness() {
        let pt = LatticePoint::new(p0(), 0, OMEGA).unwrap();
        for dir in [Direction::Plus, Direction::Minus] {
            let n = required_depth(pt.p0, R, OMEGA);
            let a = continued_fraction_rho(&pt, R, dir, Some(n)).unwrap();
            let b = continued_fraction_rho(&pt, R, dir, Some(2 * n)).unwrap();
            assert!((a - b).norm() <= 1e-12 * b.norm(), "{dir:?}");
        }
        assert!(matches!(
            continued_fraction_rho(&pt, R, Direction::Plus, Some(2)),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn ratio_bound_beyond_depth() {
        // |ρ_j| stays below r/√(ωN) once √(Nω) dominates
        let n0 = 200;
        let rhos = ratio_sweep(p0(), R, OMEGA, Direction::Plus, n0, 400, 64);
        let bound = R / (OMEGA * n0 as f64).sqrt();
        assert!(rhos.iter().all(|r| r.norm() < bound));
    }

    #[test]
    fn asymptotic_ratio_error_decays() {
        let rhos = ratio_sweep(p0(), R, OMEGA, Direction::Plus, 100, 10_000, 64);
        let worst = (100..=10_000)
            .step_by(50)
            .map(|n| {
                let err = (rhos[(n - 100) as usize].inv() - tilde_rho_plus_inv(p0(), n, R, OMEGA)).norm();
                err * (n as f64).powf(1.5)
            })
            .fold(0.0, f64::max);
        assert!(worst < 10.0, "{worst}");
    }

    #[test]
    fn asymptotic_prediction_leading_terms() {
        let a = asymptotic_prediction(10_000, C64::new(0.0, 0.0), R, OMEGA).unwrap();
        let lead = 2.0 / R * (10_000.0 * OMEGA).sqrt();
        assert!(((a.tilde_rho.inv().re - lead) / lead).abs() < 0.01);
        let b = asymptotic_prediction(-10_000, C64::new(0.0, 0.0), R, OMEGA).unwrap();
        let inv = b.tilde_rho.inv();
        assert!(inv.im.abs() > 10.0 * inv.re.abs());
        assert!(asymptotic_prediction(5, C64::new(0.0, 0.0), R, OMEGA).is_err());
    }

    #[test]
    fn closed_form_steps_match_ratio() {
        for n in [200i64, 1000, 5000] {
            let step = (log_tilde_v_plus(p0(), n, R, OMEGA) - log_tilde_v_plus(p0(), n - 1, R, OMEGA)).exp();
            let rho = tilde_rho_plus_inv(p0(), n, R, OMEGA).inv();
            let err = ((step - rho) / rho).norm();
            assert!(err * (n as f64).powf(1.5) < 5.0, "n = {n}: {err}");
        }
    }

    #[test]
    fn window_independence() {
        let a = LatticeSolution::build(p0(), R, OMEGA, -60, 60).unwrap();
        let b = LatticeSolution::build(p0(), R, OMEGA, -80, 80).unwrap();
        assert!(rel(a.v_plus_at(0), b.v_plus_at(0)) < 1e-10);
        assert!(rel(a.v_minus_at(0), b.v_minus_at(0)) < 1e-10);
    }

    #[test]
    fn recurrence_and_fixed_point() {
        let sol = LatticeSolution::build(p0(), R, OMEGA, -100, 100).unwrap();
        assert!(sol.recurrence_residual() < 1e-12, "{}", sol.recurrence_residual());
        assert!(sol.fixed_point_defect() < 1e-12);
    }

    #[test]
    fn wronskian_constant_and_nonzero() {
        let sol = LatticeSolution::build(p0(), R, OMEGA, -100, 100).unwrap();
        let w = sol.wronskian().unwrap();
        assert!(w.constancy < 1e-10, "{}", w.constancy);
        assert!(!w.value.is_zero());
        for p in [C64::new(0.0, 0.3), C64::new(2.0, 1.0), C64::new(1e-3, 0.0)] {
            let s = LatticeSolution::build(p, R, OMEGA, -50, 50).unwrap();
            assert!(s.wronskian().unwrap().value.ln_norm() > -50.0);
        }
    }

    #[test]
    fn dependent_pair_has_zero_wronskian() {
        let mut sol = LatticeSolution::build(p0(), R, OMEGA, -40, 40).unwrap();
        let c = C64::new(0.7, -1.3);
        sol.v_minus = sol.v_plus.iter().map(|v| *v * c).collect();
        let w = sol.wronskian_at(0);
        let scale = (sol.v_plus_at(0) * sol.v_plus_at(1) * c).norm();
        assert!(w.norm() <= 1e-14 * scale);
    }

    #[test]
    fn asymptotic_constant_converges() {
        let sol = LatticeSolution::build(p0(), R, OMEGA, -400, 400).unwrap();
        for dir in [Direction::Plus, Direction::Minus] {
            let fit = fit_asymptotic_constant(&sol, dir, 200, 400).unwrap();
            assert!(fit.drift < 1e-3, "{dir:?}: {fit:?}");
        }
    }

    #[test]
    fn dominant_growth_in_wrong_direction() {
        let sol = LatticeSolution::build(p0(), R, OMEGA, -200, 200).unwrap();
        let w = sol.wronskian_at(0);
        assert!(sol.v_plus_at(-200).ln_norm() > 100.0);
        assert!(sol.v_minus_at(200).ln_norm() > 100.0);
        // v⁺_n v⁻_{n+1} carries the whole Wronskian deep in the v⁻-decay region
        let lead = sol.v_plus_at(-199) * sol.v_minus_at(-198) / w;
        assert!((lead.to_complex() - 1.0).norm() < 1e-3);
    }

    #[test]
    fn half_lipschitz_across_axis() {
        let y0 = 0.4;
        let at = |eps: f64| LatticeSolution::build(C64::new(eps, y0), R, OMEGA, -40, 40).unwrap().v_plus_at(0);
        let base = at(0.0);
        for eps in [1e-4, 1e-6] {
            let diff = (at(eps) - base).norm();
            assert!(diff <= 10.0 * eps.sqrt() * base.norm(), "eps = {eps}: {diff}");
        }
    }

    #[test]
    fn dump_columns() {
        let sol = LatticeSolution::build(p0(), R, OMEGA, -40, 40).unwrap();
        let t = sol.table();
        assert_eq!(t.len(), (sol.hi - sol.lo + 1) as usize);
    }

    proptest! {
        #[test]
        fn wronskian_constant_on_right_half_plane(re in 0.0f64..2.0, im in 0.0f64..1.5, r in 0.1f64..0.8) {
            let sol = LatticeSolution::build(C64::new(re, im), r, OMEGA, -60, 60).unwrap();
            let w = sol.wronskian_over(-30, 30);
            prop_assert!(w.constancy < 1e-10);
        }
    }
}
