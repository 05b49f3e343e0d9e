//! Memory kernel of the delta well and its Laplace transform.
//!
//! The continuum acts back on the bound amplitude through
//!
//! ```text
//! M(s) = (2i/π) ∫₀^∞ u² e^{−is(1+u²)} / (1+u²) du
//!      = (1+i)/(2√(2π)) ∫_s^∞ e^{−iu} u^{−3/2} du,
//! ```
//!
//! whose transform is `ℒM(p) = −i/p + i√(1−ip)/p = 1/(1 + √(1−ip))`.
//! The time-domain kernel splits exactly as `M(s) = a(s)/√s − i` with `a`
//! entire, which is what the product-integration weights in
//! [`crate::volterra`] rely on.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Default absolute tolerance for kernel values.
pub const KERNEL_TOL: f64 = 1e-10;

/// Crossover between the power series and the continued fraction.
const SERIES_LIMIT: f64 = 4.0;

/// `(1+i)/(2√(2π))`, the normalization of the second representation of M.
pub fn kernel_prefactor() -> C64 {
    C64::new(1.0, 1.0) / (2.0 * (2.0 * PI).sqrt())
}

/// Square root with its cut along the positive imaginary axis.
///
/// On the closed lower half-plane this is the principal root, and the
/// negative real axis is approached from below, so `√(−1) = −i`. Crossing
/// the negative real axis upward continues analytically (Re < 0, Im < 0).
pub fn branch_sqrt(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    let r = z.norm();
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let t = ((r + x.abs()) / 2.0).sqrt();
    if x >= 0.0 {
        C64::new(t, y / (2.0 * t))
    } else {
        let u = y.abs() / (2.0 * t);
        if y < 0.0 {
            C64::new(u, -t)
        } else {
            C64::new(-u, -t)
        }
    }
}

/// `√(1 − ip)` on the branch that is fixed on the closed right half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchedSqrt {
    pub value: C64,
}

/// `√(1 − ip)`; for Re(p) ≥ 0 the real part is ≥ 0 and the imaginary part
/// ≤ 0. For Re(p) < 0 the value is the analytic continuation across the
/// imaginary axis.
pub fn sqrt_one_minus_ip(p: C64) -> BranchedSqrt {
    BranchedSqrt {
        value: branch_sqrt(C64::new(1.0, 0.0) - I * p),
    }
}

/// `√(1 + w) − 1` on the same branch, without cancellation for small `w`.
pub fn sqrt_one_plus_minus_one(w: C64) -> C64 {
    let s = branch_sqrt(C64::new(1.0, 0.0) + w);
    if w.norm() < 0.5 {
        w / (s + 1.0)
    } else {
        s - 1.0
    }
}

/// Upper incomplete gamma combination `F(s)` with
/// `∫_s^∞ e^{−iu} u^{−3/2} du = e^{−is} s^{−1/2} F(s)`, via the Lentz
/// continued fraction of Γ(−1/2, is).
fn incomplete_gamma_cf(s: f64) -> C64 {
    let z = C64::new(0.0, s);
    let tiny = 1e-300;
    let b0 = z + 1.5;
    let mut f = b0;
    let mut c = b0;
    let mut d = C64::new(0.0, 0.0);
    for k in 1..500 {
        let kf = k as f64;
        let a = -kf * (kf + 0.5);
        let b = z + 2.0 * kf + 1.5;
        d = b + a * d;
        if d.norm() < tiny {
            d = C64::new(tiny, 0.0);
        }
        c = b + a / c;
        if c.norm() < tiny {
            c = C64::new(tiny, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    f.inv()
}

/// `φ(s) = ∫₀¹ t^{−1/2} e^{−ist} dt` by its power series.
fn fresnel_series(s: f64) -> C64 {
    let x = C64::new(0.0, -s);
    let mut term = C64::new(1.0, 0.0); // (−is)^k / k!
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..200 {
        let add = term / (k as f64 + 0.5);
        sum += add;
        if add.norm() < 1e-18 * sum.norm() {
            break;
        }
        term = term * x / (k as f64 + 1.0);
    }
    sum
}

/// Regular coefficient `a(s)` of the split `M(s) = a(s)/√s − i`, for s ≥ 0.
pub fn kernel_singular_coefficient(s: f64) -> C64 {
    let c = kernel_prefactor();
    if s <= SERIES_LIMIT {
        2.0 * c * (C64::from_polar(1.0, -s) + I * s * fresnel_series(s))
    } else {
        c * C64::from_polar(1.0, -s) * incomplete_gamma_cf(s) + I * s.sqrt()
    }
}

/// Memory kernel M(s) for s > 0.
pub fn kernel_m(s: f64) -> Result<C64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain {
            what: "kernel_m",
            detail: format!("lag s = {s} must be positive"),
        });
    }
    Ok(kernel_singular_coefficient(s) / s.sqrt() - I)
}

/// Value of ℒM with a flag for the removable point p = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceEval {
    pub value: C64,
    pub removable_singularity: bool,
}

/// `ℒM(p) = −i/p + i√(1−ip)/p`, evaluated as `1/(1 + √(1−ip))`.
pub fn kernel_m_laplace(p: C64) -> LaplaceEval {
    let s = sqrt_one_minus_ip(p).value;
    LaplaceEval {
        value: (s + 1.0).inv(),
        removable_singularity: p.re == 0.0 && p.im == 0.0,
    }
}

/// `h₁(p) = −i/(2p)`.
pub fn h1(p: C64) -> Result<C64> {
    if p.norm() == 0.0 {
        return Err(Error::PoleAtOrigin);
    }
    Ok(-I / (2.0 * p))
}

/// `h₂(p) = (1 + √(1−ip))/(2p)`.
pub fn h2(p: C64) -> Result<C64> {
    if p.norm() == 0.0 {
        return Err(Error::PoleAtOrigin);
    }
    Ok((1.0 + sqrt_one_minus_ip(p).value) / (2.0 * p))
}

/// `(√(1 − ip) − 1)/p`, continuous at p = 0 where it equals −i/2.
pub fn sqrt_ratio_at_origin(p: C64) -> C64 {
    -I / (sqrt_one_minus_ip(p).value + 1.0)
}

/// Limit of `√s · M(s)` as s → 0⁺.
pub fn small_lag_limit() -> C64 {
    C64::new(1.0, 1.0) * FRAC_1_SQRT_2 / PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn sqrt_examples() {
        assert!(close(sqrt_one_minus_ip(C64::new(0.0, 0.0)).value, C64::new(1.0, 0.0), 1e-15));
        assert!(close(sqrt_one_minus_ip(C64::new(0.0, 2.0)).value, C64::new(3f64.sqrt(), 0.0), 1e-15));
        // 1 − ip = −1 on the axis: Re ≥ 0, Im ≤ 0 picks −i
        assert!(close(sqrt_one_minus_ip(C64::new(0.0, -2.0)).value, C64::new(0.0, -1.0), 1e-15));
    }

    #[test]
    fn continuation_is_continuous_across_axis() {
        for im in [-3.0, -1.5, -0.5, 0.7, 2.5] {
            let on = sqrt_one_minus_ip(C64::new(0.0, im)).value;
            let left = sqrt_one_minus_ip(C64::new(-1e-9, im)).value;
            let right = sqrt_one_minus_ip(C64::new(1e-9, im)).value;
            assert!(close(on, left, 1e-7) && close(on, right, 1e-7), "im = {im}");
        }
    }

    proptest! {
        #[test]
        fn branch_rule_on_right_half_plane(re in 0.0f64..50.0, im in -50.0f64..50.0) {
            let p = C64::new(re, im);
            let s = sqrt_one_minus_ip(p).value;
            let target = C64::new(1.0, 0.0) - I * p;
            prop_assert!((s * s - target).norm() <= 1e-13 * target.norm().max(1.0));
            prop_assert!(s.re >= 0.0);
            prop_assert!(s.im <= 0.0);
        }

        #[test]
        fn h1_identity(re in -10.0f64..10.0, im in -10.0f64..10.0) {
            prop_assume!(re.abs() + im.abs() > 1e-6);
            let p = C64::new(re, im);
            prop_assert!(close(2.0 * p * h1(p).unwrap(), -I, 1e-15));
        }
    }

    #[test]
    fn h_examples() {
        assert!(close(h1(I).unwrap(), C64::new(-0.5, 0.0), 1e-15));
        let expected = C64::new(0.0, -(1.0 + 2f64.sqrt()) / 2.0);
        assert!(close(h2(I).unwrap(), expected, 1e-15));
        assert_eq!(h1(C64::new(0.0, 0.0)), Err(Error::PoleAtOrigin));
        assert_eq!(h2(C64::new(0.0, 0.0)), Err(Error::PoleAtOrigin));
    }

    #[test]
    fn laplace_examples() {
        let at_i = kernel_m_laplace(I);
        assert!(close(at_i.value, C64::new(2f64.sqrt() - 1.0, 0.0), 1e-15));
        let at_zero = kernel_m_laplace(C64::new(0.0, 0.0));
        assert!(at_zero.removable_singularity);
        assert!(close(at_zero.value, C64::new(0.5, 0.0), 1e-15));
        let near = kernel_m_laplace(C64::new(1e-9, 0.0));
        assert!(close(near.value, C64::new(0.5, 0.0), 1e-9));
        // equals the two-term closed form away from the origin
        let p = C64::new(2.0, -3.0);
        let closed = -I / p + I * sqrt_one_minus_ip(p).value / p;
        assert!(close(kernel_m_laplace(p).value, closed, 1e-15));
    }

    #[test]
    fn laplace_decays_like_inverse_sqrt() {
        for tau in [10.0, 100.0, 1e3, 1e4] {
            let v = kernel_m_laplace(C64::new(1.0, tau)).value;
            assert!(v.norm() * tau.sqrt() < 1.5, "tau = {tau}");
        }
    }

    #[test]
    fn kernel_domain() {
        assert!(kernel_m(0.0).is_err());
        assert!(kernel_m(-1.0).is_err());
    }

    #[test]
    fn small_lag_behaviour() {
        let s = 1e-10;
        let v = kernel_m(s).unwrap() * s.sqrt();
        assert!(close(v, small_lag_limit(), 1e-5));
        assert!((small_lag_limit().re - 0.398_942_280_4).abs() < 1e-9);
    }

    #[test]
    fn series_and_continued_fraction_agree_at_crossover() {
        let c = kernel_prefactor();
        for s in [3.0, 4.0, 5.0, 8.0] {
            let series = 2.0 * c * (C64::from_polar(1.0, -s) + I * s * fresnel_series(s));
            let cf = c * C64::from_polar(1.0, -s) * incomplete_gamma_cf(s) + I * s.sqrt();
            assert!(close(series, cf, 1e-12), "s = {s}: {series} vs {cf}");
        }
    }

    #[test]
    fn large_lag_ibp_bound() {
        // one integration by parts: |∫_s^∞ e^{−iu}u^{−3/2}| ≤ 2 s^{−3/2}
        let s: f64 = 100.0;
        let bound = kernel_prefactor().norm() * 2.0 * s.powf(-1.5);
        assert!(kernel_m(s).unwrap().norm() <= bound);
    }
}
