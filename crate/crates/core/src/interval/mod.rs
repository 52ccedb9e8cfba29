//! Outward-rounded interval arithmetic.
//!
//! [`Interval`] is the atom of every certified computation in the crate. Its
//! endpoints are binary64 values and every operation returns an interval that
//! contains the exact real result for every choice of points in the operands.
//!
//! The empty interval is a distinguished value. It is produced by invalid
//! operations (NaN inputs, division through zero via the `/` operator, domain
//! errors) and poisons every result it touches, so a certifier that sees an
//! empty interval knows its input was corrupt.

mod decimal;
mod logmag;
mod matrix;
pub(crate) mod round;

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

pub use decimal::{exact_decimal, parse_decimal};
pub use logmag::{log10_of_exp, LogMagnitude, Sign};
pub use matrix::{inf_norm, IntervalMatrix};

use round::{
    add_down, add_up, div_down, div_up, mul_down, mul_up, sqrt_down, sqrt_up, sub_down, sub_up,
    widen_down, widen_up,
};

/// Slack applied to libm transcendental results.
const LIBM_ULPS: u32 = 2;

/// Endpoint precision in bits. Only binary64 endpoints are implemented.
pub const PRECISION_BITS: u32 = 53;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("non-finite value {0}: corrupt certificate data")]
    NonFinite(f64),
    #[error("malformed interval [{lo}, {hi}]")]
    Inverted { lo: f64, hi: f64 },
    #[error("negative radius {0}")]
    NegativeRadius(f64),
    #[error("possible singularity: divisor {0} contains zero")]
    PossibleSingularity(Interval),
    #[error("exp overflow for argument {0}; evaluate in the log domain with LogMagnitude")]
    Overflow(Interval),
    #[error("argument {0} outside the function domain")]
    Domain(Interval),
    #[error("empty interval operand")]
    Empty,
    #[error("cannot parse decimal {0:?}")]
    Decimal(String),
}

/// A closed real interval `[lo, hi]`.
#[derive(Clone, Copy)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval { lo: f64::NAN, hi: f64::NAN };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Build `[lo, hi]`, rejecting NaN and inverted endpoints.
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() {
            return Err(IntervalError::NonFinite(lo));
        }
        if hi.is_nan() {
            return Err(IntervalError::NonFinite(hi));
        }
        if lo > hi {
            return Err(IntervalError::Inverted { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[x, x]`. NaN yields the empty interval.
    pub fn point(x: f64) -> Self {
        if x.is_nan() {
            Self::EMPTY
        } else {
            Interval { lo: x, hi: x }
        }
    }

    /// Midpoint-radius constructor. The result contains `[mid - rad, mid + rad]`.
    pub fn make(mid: f64, rad: f64) -> Result<Self, IntervalError> {
        if !mid.is_finite() {
            return Err(IntervalError::NonFinite(mid));
        }
        if !rad.is_finite() {
            return Err(IntervalError::NonFinite(rad));
        }
        if rad < 0.0 {
            return Err(IntervalError::NegativeRadius(rad));
        }
        Ok(Interval { lo: sub_down(mid, rad), hi: add_up(mid, rad) })
    }

    /// Ball around an interval midpoint: `mid ± rad` with both enclosures
    /// taken outward.
    pub fn ball(mid: Interval, rad: Interval) -> Result<Self, IntervalError> {
        if mid.is_empty() || rad.is_empty() {
            return Err(IntervalError::Empty);
        }
        if rad.lo < 0.0 {
            return Err(IntervalError::NegativeRadius(rad.lo));
        }
        Ok(Interval { lo: sub_down(mid.lo, rad.hi), hi: add_up(mid.hi, rad.hi) })
    }

    /// Tightest enclosure of a decimal literal.
    pub fn from_decimal(s: &str) -> Result<Self, IntervalError> {
        parse_decimal(s)
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lo.is_nan() || self.hi.is_nan()
    }

    pub fn is_point(&self) -> bool {
        !self.is_empty() && self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Errors on the empty interval. Certifiers call this at their boundary
    /// so a poisoned computation fails loudly.
    pub fn checked(self) -> Result<Self, IntervalError> {
        if self.is_empty() {
            Err(IntervalError::Empty)
        } else {
            Ok(self)
        }
    }

    pub fn mid(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        if m.is_finite() {
            m
        } else {
            self.lo / 2.0 + self.hi / 2.0
        }
    }

    /// Upper bound on the radius about [`Interval::mid`].
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        sub_up(self.hi, m).max(sub_up(m, self.lo))
    }

    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// `max |x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// `min |x|` over the interval.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `other ⊆ self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        !self.is_empty() && !other.is_empty() && self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Self::EMPTY;
        }
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            Self::EMPTY
        } else {
            Interval { lo, hi }
        }
    }

    /// Pointwise maximum.
    pub fn max(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Self::EMPTY;
        }
        Interval { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Pointwise minimum.
    pub fn min(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Self::EMPTY;
        }
        Interval { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    /// Range of `|x|`.
    pub fn abs(&self) -> Interval {
        if self.is_empty() {
            return Self::EMPTY;
        }
        Interval { lo: self.mig(), hi: self.mag() }
    }

    /// Checked division; errors when the divisor contains zero.
    pub fn try_div(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        if self.is_empty() || rhs.is_empty() {
            return Err(IntervalError::Empty);
        }
        if rhs.contains_zero() {
            return Err(IntervalError::PossibleSingularity(*rhs));
        }
        let (a, b) = (self, rhs);
        let lo = div_down(a.lo, b.lo)
            .min(div_down(a.lo, b.hi))
            .min(div_down(a.hi, b.lo))
            .min(div_down(a.hi, b.hi));
        let hi = div_up(a.lo, b.lo)
            .max(div_up(a.lo, b.hi))
            .max(div_up(a.hi, b.lo))
            .max(div_up(a.hi, b.hi));
        Ok(Interval { lo, hi })
    }

    pub fn recip(&self) -> Result<Interval, IntervalError> {
        Interval::ONE.try_div(self)
    }

    /// Range of `x²`, tighter than `x * x` when the interval straddles zero.
    pub fn sqr(&self) -> Interval {
        if self.is_empty() {
            return Self::EMPTY;
        }
        let lo = self.mig();
        let hi = self.mag();
        Interval { lo: mul_down(lo, lo), hi: mul_up(hi, hi) }
    }

    /// Square root restricted to the nonnegative part; empty if `hi < 0`.
    pub fn sqrt(&self) -> Interval {
        if self.is_empty() || self.hi < 0.0 {
            return Self::EMPTY;
        }
        Interval { lo: sqrt_down(self.lo.max(0.0)), hi: sqrt_up(self.hi) }
    }

    /// Natural exponential. Overflow of the upper endpoint is an error: large
    /// arguments belong in [`LogMagnitude`].
    pub fn exp(&self) -> Result<Interval, IntervalError> {
        if self.is_empty() {
            return Err(IntervalError::Empty);
        }
        if self.lo == 0.0 && self.hi == 0.0 {
            return Ok(Interval::ONE);
        }
        let hi = self.hi.exp();
        if !hi.is_finite() {
            return Err(IntervalError::Overflow(*self));
        }
        let lo = widen_down(self.lo.exp(), LIBM_ULPS).max(0.0);
        let hi = widen_up(hi, LIBM_ULPS);
        // exp is positive everywhere; an underflowed upper endpoint saturates
        // to the smallest positive subnormal.
        let hi = if hi <= 0.0 { f64::from_bits(1) } else { hi };
        Ok(Interval { lo, hi })
    }

    /// Natural logarithm of a positive interval.
    pub fn ln(&self) -> Result<Interval, IntervalError> {
        if self.is_empty() {
            return Err(IntervalError::Empty);
        }
        if self.lo <= 0.0 {
            return Err(IntervalError::Domain(*self));
        }
        if self.lo == 1.0 && self.hi == 1.0 {
            return Ok(Interval::ZERO);
        }
        Ok(Interval {
            lo: widen_down(self.lo.ln(), LIBM_ULPS),
            hi: widen_up(self.hi.ln(), LIBM_ULPS),
        })
    }

    /// Integer power by binary exponentiation on the endpoints.
    pub fn powi(&self, n: u32) -> Interval {
        if self.is_empty() {
            return Self::EMPTY;
        }
        if n == 0 {
            return Interval::ONE;
        }
        if n.is_multiple_of(2) {
            let a = self.abs();
            return Interval { lo: pow_down_nonneg(a.lo, n), hi: pow_up_nonneg(a.hi, n) };
        }
        // Odd powers are monotone.
        let lo = if self.lo >= 0.0 {
            pow_down_nonneg(self.lo, n)
        } else {
            -pow_up_nonneg(-self.lo, n)
        };
        let hi = if self.hi >= 0.0 {
            pow_up_nonneg(self.hi, n)
        } else {
            -pow_down_nonneg(-self.hi, n)
        };
        Interval { lo, hi }
    }

    /// Real power `x^s` for a nonnegative base. Integer and half-integer
    /// exponents go through `powi` and `sqrt` and stay tight; other exponents
    /// use `exp(s ln x)`.
    pub fn powf(&self, s: f64) -> Result<Interval, IntervalError> {
        if self.is_empty() {
            return Err(IntervalError::Empty);
        }
        if !s.is_finite() {
            return Err(IntervalError::NonFinite(s));
        }
        if self.lo < 0.0 {
            return Err(IntervalError::Domain(*self));
        }
        if s >= 0.0 && s.fract() == 0.0 && s <= u32::MAX as f64 {
            return Ok(self.powi(s as u32));
        }
        let twice = 2.0 * s;
        if s > 0.0 && twice.fract() == 0.0 && twice <= u32::MAX as f64 {
            let whole = (twice as u32) / 2;
            return Ok(self.powi(whole) * self.sqrt());
        }
        if self.lo == 0.0 {
            return Err(IntervalError::Domain(*self));
        }
        (Interval::point(s) * self.ln()?).exp()
    }

    /// Interval enclosure of `ln 10`.
    pub fn ln10() -> Interval {
        Interval { lo: std::f64::consts::LN_10.next_down(), hi: std::f64::consts::LN_10.next_up() }
    }

    /// Interval enclosure of `π`.
    pub fn pi() -> Interval {
        Interval { lo: std::f64::consts::PI.next_down(), hi: std::f64::consts::PI.next_up() }
    }

    pub fn scale(&self, k: f64) -> Interval {
        *self * Interval::point(k)
    }
}

fn pow_up_nonneg(x: f64, mut n: u32) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul_up(acc, base);
        }
        n >>= 1;
        if n > 0 {
            base = mul_up(base, base);
        }
    }
    acc
}

fn pow_down_nonneg(x: f64, mut n: u32) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul_down(acc, base);
        }
        n >>= 1;
        if n > 0 {
            base = mul_down(base, base);
        }
    }
    acc
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        (self.is_empty() && other.is_empty()) || (self.lo == other.lo && self.hi == other.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "[empty]");
        }
        match f.precision() {
            Some(p) => write!(f, "[{:.*e}, {:.*e}]", p, self.lo, p, self.hi),
            None => write!(f, "[{:e}, {:e}]", self.lo, self.hi),
        }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        if self.is_empty() {
            return Self::EMPTY;
        }
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Self::EMPTY;
        }
        poison_nan(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Self::EMPTY;
        }
        poison_nan(sub_down(self.lo, rhs.hi), sub_up(self.hi, rhs.lo))
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Self::EMPTY;
        }
        let (a, b) = (self, rhs);
        if a.lo >= 0.0 && b.lo >= 0.0 {
            return poison_nan(mul_down(a.lo, b.lo), mul_up(a.hi, b.hi));
        }
        let lo = mul_down(a.lo, b.lo)
            .min(mul_down(a.lo, b.hi))
            .min(mul_down(a.hi, b.lo))
            .min(mul_down(a.hi, b.hi));
        let hi = mul_up(a.lo, b.lo)
            .max(mul_up(a.lo, b.hi))
            .max(mul_up(a.hi, b.lo))
            .max(mul_up(a.hi, b.hi));
        poison_nan(lo, hi)
    }
}

/// Division through the operator poisons to [`Interval::EMPTY`] when the
/// divisor contains zero. Use [`Interval::try_div`] to get the error.
impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        self.try_div(&rhs).unwrap_or(Self::EMPTY)
    }
}

impl Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Interval> for Interval {
    fn sum<I: Iterator<Item = &'a Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |acc, x| acc + *x)
    }
}

#[inline]
fn poison_nan(lo: f64, hi: f64) -> Interval {
    if lo.is_nan() || hi.is_nan() {
        Interval::EMPTY
    } else {
        Interval { lo, hi }
    }
}

/// The four arithmetic operations, as a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Apply `op` with full error reporting (empty operands, division by an
/// interval containing zero).
pub fn arith(op: ArithOp, a: Interval, b: Interval) -> Result<Interval, IntervalError> {
    let a = a.checked()?;
    let b = b.checked()?;
    let r = match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.try_div(&b)?,
    };
    r.checked()
}

/// `exp` of an interval; see [`Interval::exp`].
pub fn exp_iv(a: Interval) -> Result<Interval, IntervalError> {
    a.exp()
}

/// Midpoint-radius constructor; see [`Interval::make`].
pub fn make_interval(mid: f64, rad: f64) -> Result<Interval, IntervalError> {
    Interval::make(mid, rad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn make_interval_examples() {
        let a = make_interval(5.0, 1.0e-32).unwrap();
        assert!(a.lo() < 5.0 && a.hi() > 5.0);
        assert_eq!(a.lo(), 5.0f64.next_down());
        assert_eq!(a.hi(), 5.0f64.next_up());
        assert_eq!(make_interval(0.0, 0.0).unwrap(), iv(0.0, 0.0));
        assert_eq!(make_interval(1.0, 0.5).unwrap(), iv(0.5, 1.5));
    }

    #[test]
    fn make_interval_rejects_corrupt_input() {
        assert!(matches!(make_interval(f64::NAN, 0.0), Err(IntervalError::NonFinite(_))));
        assert!(matches!(make_interval(1.0, f64::INFINITY), Err(IntervalError::NonFinite(_))));
        assert!(matches!(make_interval(1.0, -1e-3), Err(IntervalError::NegativeRadius(_))));
    }

    #[test]
    fn arith_examples() {
        assert_eq!(arith(ArithOp::Add, iv(1.0, 2.0), iv(3.0, 4.0)).unwrap(), iv(4.0, 6.0));
        assert_eq!(arith(ArithOp::Mul, iv(-1.0, 2.0), iv(3.0, 4.0)).unwrap(), iv(-4.0, 8.0));
        assert_eq!(arith(ArithOp::Div, iv(1.0, 1.0), iv(0.25, 0.5)).unwrap(), iv(2.0, 4.0));
        assert_eq!(arith(ArithOp::Sub, iv(1.0, 2.0), iv(3.0, 4.0)).unwrap(), iv(-3.0, -1.0));
    }

    #[test]
    fn division_through_zero_is_a_singularity() {
        let err = arith(ArithOp::Div, iv(1.0, 1.0), iv(-0.5, 0.5)).unwrap_err();
        assert!(matches!(err, IntervalError::PossibleSingularity(_)));
        assert!((iv(1.0, 1.0) / iv(0.0, 1.0)).is_empty());
    }

    #[test]
    fn empty_poisons() {
        let e = Interval::EMPTY;
        assert!((e + Interval::ONE).is_empty());
        assert!((Interval::ONE * e).is_empty());
        assert!(e.sqr().is_empty());
        assert!(arith(ArithOp::Add, e, Interval::ONE).is_err());
        assert!(Interval::point(f64::NAN).is_empty());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
    }

    #[test]
    fn exp_examples() {
        assert_eq!(exp_iv(Interval::ZERO).unwrap(), Interval::ONE);
        // e^0.16 and e^-60 from a 50-digit reference evaluation.
        let a = exp_iv(Interval::point(0.16)).unwrap();
        assert!(a.contains(1.173_510_870_991_810_2));
        assert!(a.width() < 1e-14);
        let b = exp_iv(Interval::point(-60.0)).unwrap();
        assert!(b.contains(8.756_510_762_696_520e-27));
        assert!(matches!(exp_iv(Interval::point(800.0)), Err(IntervalError::Overflow(_))));
    }

    #[test]
    fn exp_underflow_stays_positive() {
        let a = Interval::point(-2000.0).exp().unwrap();
        assert_eq!(a.lo(), 0.0);
        assert!(a.hi() > 0.0);
    }

    #[test]
    fn powers() {
        assert_eq!(iv(-2.0, 3.0).powi(2), iv(0.0, 9.0));
        assert_eq!(iv(-2.0, 3.0).powi(3), iv(-8.0, 27.0));
        let p = Interval::point(4.0).powf(3.5).unwrap();
        assert_eq!(p, Interval::point(128.0));
        let q = Interval::point(2.0).powf(3.5).unwrap();
        assert!(q.contains(11.313_708_498_984_761));
        let r = Interval::point(3.0).powf(0.3).unwrap();
        assert!(r.contains(3f64.powf(0.3)));
        assert!(Interval::point(-1.0).powf(0.5).is_err());
    }

    #[test]
    fn sqr_straddling_zero() {
        assert_eq!(iv(-3.0, 2.0).sqr(), iv(0.0, 9.0));
        assert_eq!(iv(-3.0, -2.0).sqr(), iv(4.0, 9.0));
    }

    #[test]
    fn sqrt_and_ln() {
        assert_eq!(Interval::point(16.0).sqrt(), Interval::point(4.0));
        assert!(iv(-2.0, -1.0).sqrt().is_empty());
        assert_eq!(Interval::ONE.ln().unwrap(), Interval::ZERO);
        assert!(iv(0.0, 1.0).ln().is_err());
        let l = Interval::point(10.0).ln().unwrap();
        assert!(l.contains(std::f64::consts::LN_10));
    }
}
