//! Complex numbers with an explicit binary exponent.
//!
//! Minimal solutions of the lattice recurrence decay like `1/sqrt(|n|!)`, so a
//! window of a few hundred sites spans far more than the f64 exponent range.
//! [`Scaled`] keeps a mantissa with modulus in `[1, 2)` and an `i64` exponent.

use std::f64::consts::LN_2;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

/// Value = `mantissa · 2^exponent`, with `1 <= |mantissa| < 2` unless zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    mantissa: C64,
    exponent: i64,
}

/// Exact power of two for exponents in the normal f64 range.
fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Binary exponent of a finite positive normal or subnormal double.
fn ilogb(x: f64) -> i64 {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        // subnormal: scale up first
        ilogb(x * pow2(64)) - 64
    } else {
        biased - 1023
    }
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: C64 { re: 0.0, im: 0.0 },
        exponent: 0,
    };

    pub const ONE: Scaled = Scaled {
        mantissa: C64 { re: 1.0, im: 0.0 },
        exponent: 0,
    };

    pub fn new(z: C64) -> Self {
        Self::from_parts(z, 0)
    }

    /// Builds `z · 2^e` and renormalizes.
    pub fn from_parts(z: C64, e: i64) -> Self {
        let m = z.norm();
        if m == 0.0 {
            return Self::ZERO;
        }
        assert!(m.is_finite(), "non-finite mantissa in Scaled::from_parts");
        let k = ilogb(m);
        let mut mant = if k.abs() <= 1000 {
            z * pow2(-k)
        } else {
            // two-step scaling keeps the factor representable
            z * pow2(-k / 2) * pow2(-(k - k / 2))
        };
        let mut exp = e + k;
        // hypot rounding can land just outside [1, 2)
        let n = mant.norm();
        if n >= 2.0 {
            mant /= 2.0;
            exp += 1;
        } else if n < 1.0 {
            mant *= 2.0;
            exp -= 1;
        }
        Scaled {
            mantissa: mant,
            exponent: exp,
        }
    }

    /// `exp(log)` for a complex logarithm of arbitrary real part.
    pub fn from_log(log: C64) -> Self {
        let e = (log.re / LN_2).floor();
        let frac = log.re - e * LN_2;
        Self::from_parts(C64::from_polar(frac.exp(), log.im), e as i64)
    }

    pub fn mantissa(&self) -> C64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    /// Natural logarithm of the modulus.
    pub fn ln_norm(&self) -> f64 {
        self.mantissa.norm().ln() + self.exponent as f64 * LN_2
    }

    /// Principal complex logarithm (imaginary part in (−π, π]).
    pub fn ln(&self) -> C64 {
        C64::new(self.ln_norm(), self.mantissa.arg())
    }

    pub fn norm(&self) -> f64 {
        self.to_complex().norm()
    }

    /// Converts to an ordinary complex number; underflows to zero and
    /// overflows to infinity.
    pub fn to_complex(&self) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        if self.exponent > 1023 {
            return C64::new(
                f64::INFINITY * self.mantissa.re.signum(),
                f64::INFINITY * self.mantissa.im.signum(),
            );
        }
        if self.exponent < -1074 - 2 {
            return C64::new(0.0, 0.0);
        }
        let half = self.exponent / 2;
        self.mantissa * pow2(half.max(-1022)) * pow2((self.exponent - half).max(-1022))
    }

    /// Like [`Scaled::to_complex`] but refuses values outside the f64 range.
    pub fn try_to_complex(&self) -> Option<C64> {
        if self.is_zero() {
            return Some(C64::new(0.0, 0.0));
        }
        if self.exponent > 1023 || self.exponent < -1022 {
            None
        } else {
            Some(self.to_complex())
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self::from_parts(self.mantissa.inv(), -self.exponent)
    }

    pub fn scale(&self, z: C64) -> Self {
        Self::from_parts(self.mantissa * z, self.exponent)
    }
}

impl From<C64> for Scaled {
    fn from(z: C64) -> Self {
        Scaled::new(z)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Scaled) -> Scaled {
        if self.is_zero() || rhs.is_zero() {
            return Scaled::ZERO;
        }
        Scaled::from_parts(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Mul<C64> for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: C64) -> Scaled {
        self.scale(rhs)
    }
}

impl Div for Scaled {
    type Output = Scaled;
    fn div(self, rhs: Scaled) -> Scaled {
        self * rhs.recip()
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, rhs: Scaled) -> Scaled {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = big.exponent - small.exponent;
        if shift > 60 {
            return big;
        }
        Scaled::from_parts(big.mantissa + small.mantissa * pow2(-shift), big.exponent)
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Sub for Scaled {
    type Output = Scaled;
    fn sub(self, rhs: Scaled) -> Scaled {
        self + (-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mantissa_is_normalized() {
        for z in [C64::new(3.0, -4.0), C64::new(1e-300, 0.0), C64::new(0.0, 7e250)] {
            let s = Scaled::new(z);
            let m = s.mantissa().norm();
            assert!((1.0..2.0).contains(&m), "{m}");
            assert!((s.to_complex() - z).norm() <= 1e-15 * z.norm());
        }
    }

    #[test]
    fn survives_factorial_range() {
        // 1/sqrt(400!) ~ 1e-434 is far below f64
        let mut v = Scaled::ONE;
        for j in 1..=400 {
            v = v * C64::new(1.0 / (j as f64).sqrt(), 0.0);
        }
        let expected: f64 = -(1..=400).map(|j| (j as f64).ln()).sum::<f64>() / 2.0;
        assert!((v.ln_norm() - expected).abs() < 1e-10);
        assert_eq!(v.to_complex(), C64::new(0.0, 0.0));
        assert!(v.try_to_complex().is_none());
    }

    #[test]
    fn from_log_roundtrip() {
        let l = C64::new(-2000.5, 1.25);
        let s = Scaled::from_log(l);
        assert!((s.ln() - l).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3) {
            let x = C64::new(a, b);
            let y = C64::new(c, d);
            let sx = Scaled::new(x);
            let sy = Scaled::new(y);
            let tol = 1e-13 * (x.norm() + y.norm()).max(1.0);
            prop_assert!(((sx + sy).to_complex() - (x + y)).norm() <= tol);
            prop_assert!(((sx - sy).to_complex() - (x - y)).norm() <= tol);
            prop_assert!(((sx * sy).to_complex() - x * y).norm() <= 1e-13 * (x.norm() * y.norm()).max(1e-300));
            if y.norm() > 1e-6 {
                prop_assert!(((sx / sy).to_complex() - x / y).norm() <= 1e-13 * (x / y).norm().max(1e-300));
            }
        }
    }
}
