//! Gevrey-weighted spectral spaces and sparse coefficient vectors.
//!
//! A [`WeightedSpace`] fixes the squared weight
//! `w_j² = (1 + j²)^s · e^{2τj}` and the norm `‖c‖² = Σ_j w_j² |c_j|²`.
//! The profile space uses `(s, τ) = (6, 0.08)` and the stronger source
//! space `(7, 0.081)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::interval::{log10_of_exp, Interval, LogMagnitude};

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSpace {
    s: f64,
    tau: Interval,
}

impl WeightedSpace {
    pub fn new(s: f64, tau: Interval) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidParameter(format!("polynomial power {s} must be >= 0")));
        }
        let tau = tau.checked()?;
        if tau.lo() <= 0.0 {
            return Err(Error::InvalidParameter(format!("analyticity radius {tau} must be > 0")));
        }
        Ok(WeightedSpace { s, tau })
    }

    /// Profile space: `s = 6`, `τ = 0.08`.
    pub fn profile() -> Self {
        WeightedSpace { s: 6.0, tau: Interval::from_decimal("0.08").expect("literal") }
    }

    /// Source space: `s = 7`, `τ' = 0.081`.
    pub fn source() -> Self {
        WeightedSpace { s: 7.0, tau: Interval::from_decimal("0.081").expect("literal") }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn tau(&self) -> Interval {
        self.tau
    }

    /// Squared weight of mode `j`.
    pub fn weight_sq(&self, j: usize) -> Result<Interval> {
        weight_sq(j, self)
    }
}

/// `(1 + j²)^s · e^{2τj}`. Errors for `j = 0` and on overflow; use
/// [`log_weight_sq`] for very large `j`.
pub fn weight_sq(j: usize, space: &WeightedSpace) -> Result<Interval> {
    if j == 0 {
        return Err(Error::ModeOutOfRange { index: 0, max: usize::MAX });
    }
    let jj = Interval::point(j as f64);
    let poly = (Interval::ONE + jj.sqr()).powf(space.s)?;
    let expo = (Interval::point(2.0) * space.tau * jj).exp()?;
    let w = poly * expo;
    if !w.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "weight of mode {j} overflows binary64; use the log-domain weight"
        )));
    }
    Ok(w)
}

/// Log-domain squared weight, valid for any `j ≥ 1`.
pub fn log_weight_sq(j: usize, space: &WeightedSpace) -> Result<LogMagnitude> {
    if j == 0 {
        return Err(Error::ModeOutOfRange { index: 0, max: usize::MAX });
    }
    let jj = Interval::point(j as f64);
    let log_poly = LogMagnitude::from_interval(Interval::ONE + jj.sqr())?;
    let log_poly = LogMagnitude::from_log10(log_poly.log10() * Interval::point(space.s))?;
    let expo = log10_of_exp(-(Interval::point(2.0) * space.tau * jj))?;
    Ok(log_poly.mul(&expo))
}

/// Sparse mode-indexed interval coefficients. Absent modes are exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    entries: BTreeMap<usize, Interval>,
    max_mode: usize,
}

impl CoefficientVector {
    pub fn new(max_mode: usize) -> Self {
        assert!(max_mode >= 1, "max_mode must be positive");
        CoefficientVector { entries: BTreeMap::new(), max_mode }
    }

    pub fn from_entries(
        max_mode: usize,
        entries: impl IntoIterator<Item = (usize, Interval)>,
    ) -> Result<Self> {
        let mut v = Self::new(max_mode);
        for (j, c) in entries {
            v.insert(j, c)?;
        }
        Ok(v)
    }

    /// Point coefficients `values[j-1]` for `j = 1..=values.len()`.
    pub fn from_points(values: &[f64]) -> Self {
        let mut v = Self::new(values.len().max(1));
        for (i, &x) in values.iter().enumerate() {
            if x != 0.0 {
                v.entries.insert(i + 1, Interval::point(x));
            }
        }
        v
    }

    pub fn insert(&mut self, j: usize, c: Interval) -> Result<()> {
        if j == 0 || j > self.max_mode {
            return Err(Error::ModeOutOfRange { index: j, max: self.max_mode });
        }
        self.entries.insert(j, c);
        Ok(())
    }

    /// Accumulate into mode `j`.
    pub fn add_to(&mut self, j: usize, c: Interval) -> Result<()> {
        if j == 0 || j > self.max_mode {
            return Err(Error::ModeOutOfRange { index: j, max: self.max_mode });
        }
        let slot = self.entries.entry(j).or_insert(Interval::ZERO);
        *slot = *slot + c;
        Ok(())
    }

    pub fn get(&self, j: usize) -> Interval {
        self.entries.get(&j).copied().unwrap_or(Interval::ZERO)
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    /// Largest index with a stored entry.
    pub fn support_max(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (usize, Interval)> + '_ {
        self.entries.iter().map(|(&j, &c)| (j, c))
    }

    /// Entries that are not the point zero.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, Interval)> + '_ {
        self.iter().filter(|(_, c)| *c != Interval::ZERO)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_poisoned(&self) -> bool {
        self.entries.values().any(Interval::is_empty)
    }

    pub fn scale(&self, factor: Interval) -> Self {
        CoefficientVector {
            entries: self.entries.iter().map(|(&j, &c)| (j, c * factor)).collect(),
            max_mode: self.max_mode,
        }
    }

    /// Copy restricted to modes in `range`.
    pub fn restrict(&self, range: std::ops::RangeInclusive<usize>) -> Self {
        CoefficientVector {
            entries: self.entries.range(range).map(|(&j, &c)| (j, c)).collect(),
            max_mode: self.max_mode,
        }
    }

    /// Entrywise sum over the union of supports.
    pub fn add(&self, other: &CoefficientVector) -> Self {
        let mut out = self.clone();
        out.max_mode = self.max_mode.max(other.max_mode);
        for (j, c) in other.iter() {
            let slot = out.entries.entry(j).or_insert(Interval::ZERO);
            *slot = *slot + c;
        }
        out
    }

    pub fn midpoints(&self) -> BTreeMap<usize, f64> {
        self.iter().map(|(j, c)| (j, c.mid())).collect()
    }
}

/// `Σ_j w_j² |c_j|²`, accumulated from the highest mode down.
pub fn norm_sq(c: &CoefficientVector, space: &WeightedSpace) -> Result<Interval> {
    let mut acc = Interval::ZERO;
    for (j, cj) in c.iter().rev() {
        if cj == Interval::ZERO {
            continue;
        }
        acc = acc + weight_sq(j, space)? * cj.sqr();
    }
    Ok(acc)
}

/// Weighted norm. A poisoned coefficient gives the empty interval.
pub fn norm(c: &CoefficientVector, space: &WeightedSpace) -> Result<Interval> {
    Ok(norm_sq(c, space)?.sqrt())
}

/// `k^{7/2} (1 + k²)^{-1/2} e^{-gap·k}`: the source-to-profile weight ratio
/// times the recovery growth, with `gap = τ' - τ`.
pub fn norm_ratio_multiplier(k: usize, gap: Interval) -> Result<Interval> {
    if k == 0 {
        return Err(Error::ModeOutOfRange { index: 0, max: usize::MAX });
    }
    let kk = Interval::point(k as f64);
    let growth = kk.powf(3.5)? / (Interval::ONE + kk.sqr()).sqrt();
    Ok(growth * (-(gap * kk)).exp()?)
}

/// Default gap between the source and profile radii.
pub fn radius_gap() -> Interval {
    WeightedSpace::source().tau() - WeightedSpace::profile().tau()
}

/// Log-domain form of [`norm_ratio_multiplier`], usable far past underflow.
pub fn log10_norm_ratio_multiplier(k: usize, gap: Interval) -> Result<LogMagnitude> {
    if k == 0 {
        return Err(Error::ModeOutOfRange { index: 0, max: usize::MAX });
    }
    let kk = Interval::point(k as f64);
    let growth = kk.powf(3.5)? / (Interval::ONE + kk.sqr()).sqrt();
    Ok(LogMagnitude::from_interval(growth)?.mul(&log10_of_exp(gap * kk)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        // 64·e^0.16 and 128·e^0.162, 50-digit reference values.
        let x = weight_sq(1, &WeightedSpace::profile()).unwrap();
        assert!(x.contains(75.104_695_743_475_855));
        assert!(x.width() < 1e-12);
        let y = weight_sq(1, &WeightedSpace::source()).unwrap();
        assert!(y.contains(150.510_110_889_087_96));
        assert!(matches!(weight_sq(0, &WeightedSpace::profile()), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn weight_overflow_falls_back_to_log_domain() {
        let x = WeightedSpace::profile();
        assert!(weight_sq(10_000, &x).is_err());
        let l = log_weight_sq(10_000, &x).unwrap();
        // log10((1+1e8)^6 e^1600) = 48.0000000261 + 694.8744...
        let expect = 6.0 * (1.0f64 + 1e8).log10() + 1600.0 / std::f64::consts::LN_10;
        assert!((l.log10_value() - expect).abs() < 1e-9);
    }

    #[test]
    fn weights_increase() {
        let x = WeightedSpace::profile();
        let mut prev = weight_sq(1, &x).unwrap();
        for j in 2..500 {
            let w = weight_sq(j, &x).unwrap();
            assert!(w.lo() > prev.hi());
            prev = w;
        }
    }

    #[test]
    fn norm_examples() {
        let x = WeightedSpace::profile();
        let c = CoefficientVector::from_entries(2, [(1, Interval::ONE)]).unwrap();
        let n = norm(&c, &x).unwrap();
        assert!(n.contains(8.666_296_541_399_668));
        let empty = CoefficientVector::new(5);
        assert_eq!(norm(&empty, &x).unwrap(), Interval::ZERO);
        let two = CoefficientVector::from_entries(2, [(1, Interval::ONE), (2, Interval::ZERO)])
            .unwrap();
        assert_eq!(norm(&two, &x).unwrap(), n);
    }

    #[test]
    fn poisoned_coefficient_poisons_the_norm() {
        let c = CoefficientVector::from_entries(3, [(2, Interval::EMPTY)]).unwrap();
        assert!(norm(&c, &WeightedSpace::profile()).unwrap().is_empty());
    }

    #[test]
    fn insert_checks_range() {
        let mut c = CoefficientVector::new(3);
        assert!(c.insert(0, Interval::ONE).is_err());
        assert!(c.insert(4, Interval::ONE).is_err());
        c.insert(3, Interval::ONE).unwrap();
        assert_eq!(c.support_max(), Some(3));
    }

    #[test]
    fn multiplier_examples() {
        let gap = radius_gap();
        let m1 = norm_ratio_multiplier(1, gap).unwrap();
        assert!(m1.contains(0.706_400_027_840_929_9));
        let m = norm_ratio_multiplier(2500, gap).unwrap();
        assert!(m.contains(25_651_560.017_843_654));
        let far = log10_norm_ratio_multiplier(1_000_000, gap).unwrap();
        assert!(far.log10().contains(-419.294_481_903_252_04));
        let linear = norm_ratio_multiplier(1_000_000, gap).unwrap();
        assert!(linear.hi() < 1e-300);
    }
}
