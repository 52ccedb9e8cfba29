//! Lipschitz-type constants feeding the closure inequality.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::basis::BasisModel;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::spectral::{norm_ratio_multiplier, weight_sq, WeightedSpace};

#[derive(Clone, Debug)]
pub struct RecoveryConstant {
    /// `sup_k k^{7/2} (1+k²)^{-1/2} e^{-(τ'-τ)k}`.
    pub mapping: Interval,
    pub argmax: usize,
    /// Modes `1..=scan_limit` were evaluated; beyond it the multiplier is
    /// certified decreasing.
    pub scan_limit: usize,
    pub kernel_cap: Interval,
    /// `kernel_cap · mapping`.
    pub with_kernel_cap: Interval,
}

/// Upper bound on `ln(m(k+1)/m(k))` for `k ≥ 2`, which is decreasing in `k`:
/// `ln(1+1/k) ≤ 1/k`, `ln(1 + x) ≥ x/(1+x)` and
/// `(k + 1/2)/(k² + 2k + 2) ≥ 1/(k+2)` give
/// `ln(m(k+1)/m(k)) ≤ 3.5/k - 1/(k+2) - gap`.
fn log_ratio_bound(k: usize, gap: Interval) -> Interval {
    let kk = Interval::point(k as f64);
    Interval::point(3.5) / kk - Interval::ONE / (kk + Interval::point(2.0)) - gap
}

/// Sup over `k ≥ 1` of [`norm_ratio_multiplier`], by a finite scan up to a
/// point past which the multiplier is certified decreasing.
pub fn recovery_mapping_constant(
    tau: Interval,
    tau_prime: Interval,
    kernel_cap: Interval,
) -> Result<RecoveryConstant> {
    let gap = (tau_prime - tau).checked()?;
    if gap.lo() <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "radius gap τ' - τ = {gap} must be positive"
        )));
    }
    // The continuous maximizer sits near 2.5/gap.
    let mut scan_limit = ((5.0 / gap.mid()).ceil() as usize).saturating_add(16).max(2);
    let mut tries = 0;
    while log_ratio_bound(scan_limit, gap).hi() >= 0.0 {
        scan_limit = scan_limit.checked_mul(2).ok_or_else(|| {
            Error::InvalidParameter(format!("gap {gap} too small to scan"))
        })?;
        tries += 1;
        if tries > 40 || scan_limit > 50_000_000 {
            return Err(Error::InvalidParameter(format!("gap {gap} too small to scan")));
        }
    }
    let values = (1..=scan_limit)
        .into_par_iter()
        .map(|k| norm_ratio_multiplier(k, gap))
        .collect::<Result<Vec<Interval>>>()?;
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    let mut argmax = 1;
    let mut best_mid = f64::NEG_INFINITY;
    for (i, v) in values.iter().enumerate() {
        lo = lo.max(v.lo());
        hi = hi.max(v.hi());
        if v.mid() > best_mid {
            best_mid = v.mid();
            argmax = i + 1;
        }
    }
    let mapping = Interval::new(lo, hi)?;
    let kernel_cap = kernel_cap.checked()?;
    Ok(RecoveryConstant {
        mapping,
        argmax,
        scan_limit,
        kernel_cap,
        with_kernel_cap: kernel_cap * mapping,
    })
}

/// Bound `C` with `‖Q(u, v)‖_X ≤ C ‖u‖_Y ‖v‖_Y` for `u, v` supported on
/// `1..=n`, by Cauchy-Schwarz on the weighted tensor:
///
/// `C² = Σ_{k,l ≤ n} Σ_j (w^X_j C_klj / (w^Y_k w^Y_l))²`.
pub fn convolution_constant(
    model: &dyn BasisModel,
    n: usize,
    x: &WeightedSpace,
    y: &WeightedSpace,
) -> Result<Interval> {
    if n == 0 {
        return Err(Error::InvalidParameter("truncation must be at least 1".into()));
    }
    let wx: Vec<Interval> =
        std::iter::once(Ok(Interval::ZERO)).chain((1..=2 * n).map(|j| weight_sq(j, x))).collect::<Result<_>>()?;
    let wy: Vec<Interval> =
        std::iter::once(Ok(Interval::ZERO)).chain((1..=n).map(|k| weight_sq(k, y))).collect::<Result<_>>()?;
    let rows = (1..=n)
        .into_par_iter()
        .map(|k| {
            let mut acc = Interval::ZERO;
            for l in 1..=n {
                let mut pair = Interval::ZERO;
                for j in model.selection(k, l) {
                    let c = model.interaction(k, l, j);
                    if c == Interval::ZERO {
                        continue;
                    }
                    pair = pair + wx[j] * c.sqr();
                }
                acc = acc + pair / (wy[k] * wy[l]);
            }
            acc
        })
        .collect::<Vec<Interval>>();
    let total: Interval = rows.into_iter().sum();
    let c = total.sqrt().checked()?;
    Ok(c)
}

/// Round `x > 0` up to `digits` significant decimal digits: the binary64
/// nearest to the smallest `m · 10^e` whose nearest binary64 is `≥ x`.
/// Values already on the decimal grid are returned unchanged.
pub fn round_up_significant(x: f64, digits: i32) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return x;
    }
    let e = x.log10().floor() as i32 - digits + 1;
    let grid = |m: f64| -> f64 { format!("{m}e{e}").parse().expect("decimal literal") };
    let estimate = (x / 10f64.powi(e)).ceil().max(1.0);
    let mut m = estimate - 1.0;
    while m < 1.0 || grid(m) < x {
        m += 1.0;
    }
    let r = grid(m);
    if r.is_finite() { r } else { x }
}

#[derive(Clone, Debug)]
pub struct LipschitzReport {
    /// `C_rec_map · C_conv`.
    pub product: Interval,
    /// Constant used downstream: the larger of the declared value and the
    /// product rounded up to two significant digits.
    pub k: Interval,
    pub declared: Option<Interval>,
}

pub fn lipschitz_constant(
    c_rec_map: Interval,
    c_conv: Interval,
    declared: Option<Interval>,
) -> Result<LipschitzReport> {
    for (name, v) in [("C_rec_map", c_rec_map), ("C_conv", c_conv)] {
        let v = v.checked()?;
        if v.lo() < 0.0 {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be nonnegative")));
        }
    }
    let product = c_rec_map * c_conv;
    let rounded = round_up_significant(product.hi(), 2);
    let k = match declared {
        Some(d) if d.checked()?.hi() >= rounded => d,
        _ => Interval::point(rounded),
    };
    Ok(LipschitzReport { product, k, declared })
}

/// Nonnegative per-mode energies `E_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergySpectrum {
    energies: BTreeMap<usize, Interval>,
}

impl EnergySpectrum {
    pub fn new(energies: BTreeMap<usize, Interval>) -> Result<Self> {
        for (&j, e) in &energies {
            let e = e.checked()?;
            if j == 0 {
                return Err(Error::ModeOutOfRange { index: 0, max: usize::MAX });
            }
            if e.lo() < 0.0 {
                return Err(Error::InvalidParameter(format!("energy of mode {j} is negative: {e}")));
            }
        }
        Ok(EnergySpectrum { energies })
    }

    pub fn energies(&self) -> &BTreeMap<usize, Interval> {
        &self.energies
    }
}

/// `C · Σ_j j^{7/2} sqrt(E_j)`.
pub fn stretching_penalty(spectrum: &EnergySpectrum, c: Interval) -> Result<Interval> {
    let mut sum = Interval::ZERO;
    for (&j, e) in spectrum.energies.iter().rev() {
        sum = sum + Interval::point(j as f64).powf(3.5)? * e.sqrt();
    }
    Ok(c * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::reference_model;

    #[test]
    fn mapping_constant_for_large_gap() {
        let r = recovery_mapping_constant(Interval::ZERO, Interval::point(0.5), Interval::ONE)
            .unwrap();
        assert_eq!(r.argmax, 5);
        assert!(r.mapping.contains(4.499_581_644_243_556));
    }

    #[test]
    fn mapping_constant_rejects_nonpositive_gap() {
        let t = Interval::point(0.08);
        assert!(recovery_mapping_constant(t, t, Interval::ONE).is_err());
        assert!(recovery_mapping_constant(t, Interval::point(0.07), Interval::ONE).is_err());
    }

    #[test]
    fn log_ratio_bound_is_an_upper_bound() {
        let gap = Interval::point(0.001);
        for k in [2usize, 5, 100, 2500, 6000] {
            let m0 = norm_ratio_multiplier(k, gap).unwrap().mid();
            let m1 = norm_ratio_multiplier(k + 1, gap).unwrap().mid();
            assert!((m1 / m0).ln() <= log_ratio_bound(k, gap).hi() + 1e-12, "k={k}");
        }
    }

    #[test]
    fn lipschitz_examples() {
        let zero = lipschitz_constant(Interval::ZERO, Interval::point(5.0), None).unwrap();
        assert_eq!(zero.k, Interval::ZERO);
        let one = lipschitz_constant(Interval::ONE, Interval::ONE, None).unwrap();
        assert_eq!(one.k, Interval::ONE);
        let a = Interval::from_decimal("2.5652e7").unwrap();
        let b = Interval::from_decimal("4.2872e-4").unwrap();
        let k = lipschitz_constant(a, b, None).unwrap();
        assert!(k.product.contains(10_997.525_44));
        assert_eq!(k.k, Interval::point(11_000.0));
        assert!(lipschitz_constant(Interval::point(-1.0), b, None).is_err());
    }

    #[test]
    fn rounding_up() {
        assert_eq!(round_up_significant(10_997.525_44, 2), 11_000.0);
        assert_eq!(round_up_significant(1.0, 2), 1.0);
        assert_eq!(round_up_significant(0.0, 2), 0.0);
        assert!(round_up_significant(1.234e-7, 2) >= 1.234e-7);
    }

    #[test]
    fn convolution_constant_is_zero_without_coupling() {
        let m = reference_model(0, 0.0).unwrap();
        let c = convolution_constant(&m, 8, &WeightedSpace::profile(), &WeightedSpace::source())
            .unwrap();
        assert_eq!(c, Interval::ZERO);
    }

    #[test]
    fn stretching_penalty_examples() {
        let mut e = BTreeMap::new();
        e.insert(4, Interval::point(4.0));
        let s = EnergySpectrum::new(e).unwrap();
        assert_eq!(stretching_penalty(&s, Interval::ONE).unwrap(), Interval::point(256.0));
        let mut bad = BTreeMap::new();
        bad.insert(1, Interval::point(-1.0));
        assert!(EnergySpectrum::new(bad).is_err());
    }
}
