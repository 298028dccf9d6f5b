//! Double-double ("dd") arithmetic: an unevaluated sum of two `f64`s giving
//! roughly 106 bits of significand.
//!
//! The transform plans precompute their recurrence tables in this extended
//! precision so that table entries are accurate to the last `f64` ulp; the
//! same arithmetic backs several test oracles (series sums, direct transforms).
//! Only the handful of operations those uses need are implemented.

/// A double-double value `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Like `two_sum` but requires `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via FMA: `a * b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// pi to double-double precision.
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Exact ratio of two machine integers.
    pub fn from_ratio(num: i64, den: i64) -> Dd {
        Dd::from_f64(num as f64) / Dd::from_f64(den as f64)
    }

    /// cos(x) for |x| <= pi/2 + eps, by Taylor series in dd arithmetic.
    ///
    /// Callers are expected to have range-reduced the argument exactly
    /// (e.g. by index symmetries of Chebyshev angles).
    pub fn cos_half_range(self) -> Dd {
        let x2 = self * self;
        // cos x = sum_s (-1)^s x^{2s} / (2s)!; 24 terms is ample for |x| <= 1.6.
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for s in 1..=24 {
            let d = (2 * s - 1) * (2 * s);
            term = term * x2 / Dd::from_f64(d as f64);
            if s % 2 == 1 {
                sum = sum - term;
            } else {
                sum = sum + term;
            }
            if term.hi.abs() < 1e-35 * sum.hi.abs().max(1e-300) {
                break;
            }
        }
        sum
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, mut e) = two_sum(self.hi, rhs.hi);
        e += self.lo + rhs.lo;
        let (hi, lo) = quick_two_sum(s1, e);
        Dd { hi, lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, mut e) = two_prod(self.hi, rhs.hi);
        e += self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r2 = r - rhs * Dd::from_f64(q2);
        let q3 = r2.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd::new(hi, lo + q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_keeps_small_residue() {
        let big = Dd::from_f64(1e16);
        let x = (big + Dd::ONE) - big;
        assert_eq!(x.to_f64(), 1.0);
        assert_eq!(x.hi, 1.0);
    }

    #[test]
    fn mul_is_error_free_for_exact_products() {
        let a = Dd::from_f64(1.0 + 2f64.powi(-30));
        let b = a * a;
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60 needs more than 53 bits
        let expect = Dd::new(1.0 + 2f64.powi(-29), 2f64.powi(-60));
        let err = (b - expect).to_f64();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn div_recovers_ratio() {
        let x = Dd::from_ratio(1, 3);
        let back = x * Dd::from_f64(3.0);
        assert!((back - Dd::ONE).to_f64().abs() < 1e-31);
    }

    #[test]
    fn cos_matches_f64_cos() {
        for i in 0..50 {
            let t = 0.031 * i as f64;
            let c = Dd::from_f64(t).cos_half_range().to_f64();
            assert!(
                (c - t.cos()).abs() <= 2.0 * f64::EPSILON * t.cos().abs().max(0.1),
                "cos mismatch at {t}: {c} vs {}",
                t.cos()
            );
        }
    }

    #[test]
    fn cos_of_dd_half_pi_is_tiny() {
        let half = Dd::PI / Dd::from_f64(2.0);
        let c = half.cos_half_range();
        assert!(c.to_f64().abs() < 1e-30, "cos(pi/2) = {}", c.to_f64());
    }
}
