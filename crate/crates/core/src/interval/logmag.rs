//! Base-10 log-domain magnitudes for quantities far below binary64 underflow
//! (the torus image-overlap terms sit near `10^-1714`).

use std::fmt;

use super::{Interval, IntervalError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

/// `sign · 10^log10`, with `log10` carried as an interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMagnitude {
    sign: Sign,
    log10: Interval,
}

impl LogMagnitude {
    pub fn zero() -> Self {
        LogMagnitude { sign: Sign::Zero, log10: Interval::EMPTY }
    }

    /// Positive quantity `10^log10`.
    pub fn from_log10(log10: Interval) -> Result<Self, IntervalError> {
        let log10 = log10.checked()?;
        Ok(LogMagnitude { sign: Sign::Positive, log10 })
    }

    /// Log-domain image of a linear interval that does not straddle zero.
    pub fn from_interval(x: Interval) -> Result<Self, IntervalError> {
        let x = x.checked()?;
        if x.lo() == 0.0 && x.hi() == 0.0 {
            return Ok(Self::zero());
        }
        if x.contains_zero() {
            return Err(IntervalError::Domain(x));
        }
        let sign = if x.lo() > 0.0 { Sign::Positive } else { Sign::Negative };
        let log10 = x.abs().ln()?.try_div(&Interval::ln10())?;
        Ok(LogMagnitude { sign, log10 })
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Enclosure of the base-10 logarithm (empty for zero).
    pub fn log10(&self) -> Interval {
        self.log10
    }

    /// Representative value of the base-10 logarithm, `-inf` for zero.
    pub fn log10_value(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.log10.mid()
        }
    }

    /// Product of two magnitudes.
    pub fn mul(&self, other: &LogMagnitude) -> LogMagnitude {
        let sign = match (self.sign, other.sign) {
            (Sign::Zero, _) | (_, Sign::Zero) => return Self::zero(),
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        };
        LogMagnitude { sign, log10: self.log10 + other.log10 }
    }

    /// Multiply by a positive linear factor.
    pub fn scale(&self, factor: Interval) -> Result<LogMagnitude, IntervalError> {
        let f = LogMagnitude::from_interval(factor)?;
        Ok(self.mul(&f))
    }

    /// Sum of two nonnegative magnitudes,
    /// `log10(10^a + 10^b) = max + log10(1 + 10^(min - max))`, evaluated on each
    /// endpoint pair (the map is increasing in both arguments).
    pub fn add(&self, other: &LogMagnitude) -> Result<LogMagnitude, IntervalError> {
        if self.sign == Sign::Negative || other.sign == Sign::Negative {
            return Err(IntervalError::Domain(Interval::point(-1.0)));
        }
        if self.is_zero() {
            return Ok(*other);
        }
        if other.is_zero() {
            return Ok(*self);
        }
        let lo = log_sum_exp10(self.log10.lo(), other.log10.lo())?;
        let hi = log_sum_exp10(self.log10.hi(), other.log10.hi())?;
        Ok(LogMagnitude { sign: Sign::Positive, log10: lo.hull(&hi) })
    }

    /// Promote to the linear domain. Values below the subnormal range
    /// saturate to `[0, smallest positive subnormal]`.
    pub fn to_interval(&self) -> Result<Interval, IntervalError> {
        match self.sign {
            Sign::Zero => Ok(Interval::ZERO),
            Sign::Positive => (self.log10 * Interval::ln10()).exp(),
            Sign::Negative => Ok(-(self.log10 * Interval::ln10()).exp()?),
        }
    }
}

fn log_sum_exp10(a: f64, b: f64) -> Result<Interval, IntervalError> {
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    let ratio = ((Interval::point(small) - Interval::point(big)) * Interval::ln10()).exp()?;
    let correction = (Interval::ONE + ratio).ln()?.try_div(&Interval::ln10())?;
    Ok(Interval::point(big) + correction)
}

impl fmt::Display for LogMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Zero => write!(f, "0"),
            Sign::Positive => write!(f, "10^{:.4}", self.log10.mid()),
            Sign::Negative => write!(f, "-10^{:.4}", self.log10.mid()),
        }
    }
}

/// Base-10 magnitude of `exp(-x)`: `log10 = -x / ln 10`, no underflow.
pub fn log10_of_exp(neg_exponent: Interval) -> Result<LogMagnitude, IntervalError> {
    let x = neg_exponent.checked()?;
    if !x.hi().is_finite() {
        return Err(IntervalError::NonFinite(x.hi()));
    }
    if x.lo() == 0.0 && x.hi() == 0.0 {
        return LogMagnitude::from_log10(Interval::ZERO);
    }
    LogMagnitude::from_log10((-x).try_div(&Interval::ln10())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log10_of_exp_examples() {
        let zero = log10_of_exp(Interval::ZERO).unwrap();
        assert_eq!(zero.sign(), Sign::Positive);
        assert_eq!(zero.log10(), Interval::ZERO);

        let tenth = log10_of_exp(Interval::ln10()).unwrap();
        assert!(tenth.log10().contains(-1.0));
        assert!(tenth.log10().width() < 1e-14);

        // π²/0.05² from interval inputs; reference -1714.52589198446282.
        let sigma = Interval::from_decimal("0.05").unwrap();
        let x = Interval::pi().sqr() / sigma.sqr();
        let m = log10_of_exp(x).unwrap();
        assert!(m.log10().contains(-1714.525_891_984_462_8));
    }

    #[test]
    fn addition_in_log_domain() {
        let a = LogMagnitude::from_log10(Interval::point(-2000.0)).unwrap();
        let two_a = a.add(&a).unwrap();
        let expect = -2000.0 + 2f64.log10();
        assert!(two_a.log10().contains(expect));
        assert!(two_a.log10().width() < 1e-11);
        assert_eq!(a.add(&LogMagnitude::zero()).unwrap(), a);
    }

    #[test]
    fn promotion_saturates_below_subnormals() {
        let a = LogMagnitude::from_log10(Interval::point(-1714.0)).unwrap();
        let x = a.to_interval().unwrap();
        assert_eq!(x.lo(), 0.0);
        assert!(x.hi() > 0.0 && x.hi() < 1e-320);
    }

    #[test]
    fn round_trip_with_linear_domain() {
        let x = Interval::point(3.5e-7);
        let back = LogMagnitude::from_interval(x).unwrap().to_interval().unwrap();
        assert!(back.contains(3.5e-7));
        assert!(back.width() < 1e-20);
        assert!(LogMagnitude::from_interval(Interval::new(-1.0, 1.0).unwrap()).is_err());
    }
}
