//! Decimal literals to tight intervals.
//!
//! Certificate files store coefficients as decimal strings (up to 32
//! significant digits). A literal is enclosed by the binary64 value nearest to
//! it when that value is exact, and otherwise by the one-ulp interval between
//! the two binary64 neighbours that bracket it.

use std::cmp::Ordering;

use super::{Interval, IntervalError};

/// Sign-free normalized decimal: `digits × 10^scale`, with no leading or
/// trailing zeros in `digits`. Zero has empty `digits`.
#[derive(Debug, PartialEq, Eq)]
struct Normalized {
    negative: bool,
    digits: Vec<u8>,
    scale: i64,
}

impl Normalized {
    fn parse(s: &str) -> Option<Normalized> {
        let s = s.trim();
        let (negative, body) = match s.as_bytes().first()? {
            b'+' => (false, &s[1..]),
            b'-' => (true, &s[1..]),
            _ => (false, s),
        };
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut digits: Vec<u8> =
            int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
        let mut scale = exponent.checked_sub(frac_part.len() as i64)?;
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        digits.drain(..lead);
        while digits.last() == Some(&0) {
            digits.pop();
            scale += 1;
        }
        if digits.is_empty() {
            scale = 0;
        }
        Some(Normalized { negative, digits, scale })
    }

    fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Compare magnitudes.
    fn cmp_abs(&self, other: &Normalized) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        // Position of the leading digit.
        let lead_a = self.digits.len() as i64 + self.scale;
        let lead_b = other.digits.len() as i64 + other.scale;
        lead_a.cmp(&lead_b).then_with(|| {
            let n = self.digits.len().max(other.digits.len());
            let pad = |d: &Vec<u8>, i: usize| d.get(i).copied().unwrap_or(0);
            (0..n)
                .map(|i| pad(&self.digits, i).cmp(&pad(&other.digits, i)))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    }
}

/// Exact decimal expansion of a finite binary64 value, in scientific form
/// with trailing zeros removed. Parsing the result with [`parse_decimal`]
/// gives back the point interval `[x, x]`.
pub fn exact_decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    // 767 significant digits suffice for every binary64 value.
    let full = format!("{:.800e}", x);
    let (mantissa, exponent) = full.split_once('e').expect("scientific format");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exponent}")
}

/// Tightest binary64 interval containing the decimal literal `s`.
pub fn parse_decimal(s: &str) -> Result<Interval, IntervalError> {
    let dec = Normalized::parse(s).ok_or_else(|| IntervalError::Decimal(s.to_string()))?;
    let x: f64 = s.trim().parse().map_err(|_| IntervalError::Decimal(s.to_string()))?;
    if !x.is_finite() {
        return Err(IntervalError::NonFinite(x));
    }
    if dec.is_zero() {
        return Ok(Interval::ZERO);
    }
    if x == 0.0 {
        // Underflow to zero: the literal sits below the smallest subnormal.
        let tiny = f64::from_bits(1);
        return Ok(if dec.negative {
            Interval { lo: -tiny, hi: 0.0 }
        } else {
            Interval { lo: 0.0, hi: tiny }
        });
    }
    let nearest = Normalized::parse(&exact_decimal(x)).expect("exact expansion parses");
    match dec.cmp_abs(&nearest) {
        Ordering::Equal => Ok(Interval::point(x)),
        // |literal| > |x|: the literal lies further from zero than x.
        Ordering::Greater if x > 0.0 => Ok(Interval { lo: x, hi: x.next_up() }),
        Ordering::Greater => Ok(Interval { lo: x.next_down(), hi: x }),
        Ordering::Less if x > 0.0 => Ok(Interval { lo: x.next_down(), hi: x }),
        Ordering::Less => Ok(Interval { lo: x, hi: x.next_up() }),
    }
}
