//! Newton-Kantorovich closure and the transfer to the periodic torus.
//!
//! Closure holds when `2 δ M K < 1`. Periodizing the profile on `T³` adds the
//! contribution of the lattice images `Σ_{n ≠ 0} exp(-π² |n|² / σ²)` (plus
//! projector and pressure corrections proportional to it) to the residual.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::interval::{log10_of_exp, Interval, LogMagnitude};

#[derive(Clone, Copy, Debug)]
pub struct ClosureReport {
    pub product: Interval,
    /// `1 - product`.
    pub margin: Interval,
    /// `product < 1` holds for every point of the enclosure.
    pub verified: bool,
}

fn nonnegative(name: &str, x: Interval) -> Result<Interval> {
    let x = x.checked()?;
    if x.lo() < 0.0 {
        return Err(Error::InvalidParameter(format!("{name} = {x} must be nonnegative")));
    }
    Ok(x)
}

fn closure(sum: Interval, m: Interval, k: Interval) -> ClosureReport {
    let product = Interval::point(2.0) * sum * m * k;
    let margin = Interval::ONE - product;
    ClosureReport { product, margin, verified: product.hi() < 1.0 }
}

/// `2 δ M K < 1`.
pub fn nk_closure(delta: Interval, m: Interval, k: Interval) -> Result<ClosureReport> {
    let delta = nonnegative("delta", delta)?;
    let m = nonnegative("M", m)?;
    let k = nonnegative("K", k)?;
    Ok(closure(delta, m, k))
}

/// `2 (δ + ε) M K < 1`.
pub fn torus_closure(
    delta: Interval,
    eps: Interval,
    m: Interval,
    k: Interval,
) -> Result<ClosureReport> {
    let delta = nonnegative("delta", delta)?;
    let eps = nonnegative("eps", eps)?;
    let m = nonnegative("M", m)?;
    let k = nonnegative("K", k)?;
    Ok(closure(delta + eps, m, k))
}

/// Largest sup-norm radius summed explicitly.
const MAX_EXPLICIT_RADIUS: usize = 64;

#[derive(Clone, Debug)]
pub struct OverlapBound {
    /// `exp(-π²/σ²)`, a single nearest image.
    pub nearest_image: LogMagnitude,
    /// Upper bound on `Σ_{n ≠ 0} exp(-π² |n|²/σ²)` (zero for radius 0).
    pub total: LogMagnitude,
    /// Images with `‖n‖_∞ ≤ explicit_radius` are summed term by term.
    pub explicit_radius: usize,
    /// Bound on the images past `explicit_radius`.
    pub tail: LogMagnitude,
}

/// Bound the lattice-image sum for a Gaussian of width `sigma`.
///
/// Images with `1 ≤ ‖n‖_∞ ≤ R` are summed exactly (grouped by `|n|²`); the
/// radius is raised above `lattice_radius` if needed until the remainder
/// admits a geometric bound. For `‖n‖_∞ = m > R`: `|n|² ≥ (R+1) m`, and the
/// shell holds `24m² + 2 ≤ 26m²` points, so the remainder is at most
/// `Σ_{m > R} 26 m² q^m` with `q = exp(-a (R+1))`, `a = π²/σ²`, whose term
/// ratio is at most `((R+2)/(R+1))² q`. A radius of 0 sums over no images.
pub fn image_overlap_bound(sigma: Interval, lattice_radius: usize) -> Result<OverlapBound> {
    let sigma = sigma.checked()?;
    if sigma.lo() <= 0.0 {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    let a = Interval::pi().sqr() / sigma.sqr();
    let nearest_image = log10_of_exp(a)?;
    if lattice_radius == 0 {
        return Ok(OverlapBound {
            nearest_image,
            total: LogMagnitude::zero(),
            explicit_radius: 0,
            tail: LogMagnitude::zero(),
        });
    }
    let ratio = |r: usize| -> Result<Interval> {
        let growth = Interval::point((r + 2) as f64) / Interval::point((r + 1) as f64);
        Ok(growth.sqr() * (-(a.scale((r + 1) as f64))).exp()?)
    };
    let mut radius = lattice_radius;
    while ratio(radius)?.hi() >= 1.0 {
        radius += 1;
        if radius > MAX_EXPLICIT_RADIUS {
            return Err(Error::InvalidParameter(format!(
                "sigma = {sigma} is too wide for the image-sum bound"
            )));
        }
    }

    let mut shells: BTreeMap<u64, u64> = BTreeMap::new();
    let r = radius as i64;
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                if x == 0 && y == 0 && z == 0 {
                    continue;
                }
                *shells.entry((x * x + y * y + z * z) as u64).or_default() += 1;
            }
        }
    }
    let mut total = LogMagnitude::zero();
    // Smallest terms first.
    for (&s, &count) in shells.iter().rev() {
        let term = log10_of_exp(a.scale(s as f64))?.scale(Interval::point(count as f64))?;
        total = total.add(&term)?;
    }

    let m0 = (radius + 1) as f64;
    let first = log10_of_exp(a.scale((radius + 1) as f64 * m0))?
        .scale(Interval::point(26.0 * m0 * m0))?;
    let rho = ratio(radius)?;
    let tail = first.scale(Interval::ONE / (Interval::ONE - rho))?;
    let total = total.add(&tail)?;
    Ok(OverlapBound { nearest_image, total, explicit_radius: radius, tail })
}

#[derive(Clone, Debug)]
pub struct TransferReport {
    pub overlap: OverlapBound,
    /// Projector correction `projector_bound · ε_ov`.
    pub eps_projector: LogMagnitude,
    /// Pressure correction `pressure_factor · ε_ov`.
    pub eps_pressure: LogMagnitude,
    /// Sum of the three components, each promoted to binary64.
    pub eps_total: Interval,
    pub declared: Option<Interval>,
    /// Whether the computed bound sits below the declared value.
    pub consistent_with_declared: Option<bool>,
}

impl TransferReport {
    /// The value to feed the torus closure: the declared constant when the
    /// computed bound supports it, else the computed bound.
    pub fn effective(&self) -> Interval {
        match (self.declared, self.consistent_with_declared) {
            (Some(d), Some(true)) => d,
            _ => self.eps_total,
        }
    }
}

pub fn transfer_error(
    sigma: Interval,
    projector_bound: Interval,
    pressure_factor: Interval,
    lattice_radius: usize,
    declared: Option<Interval>,
) -> Result<TransferReport> {
    let projector_bound = projector_bound.checked()?;
    if projector_bound.lo() < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "projector bound {projector_bound} must be at least 1"
        )));
    }
    let pressure_factor = nonnegative("pressure factor", pressure_factor)?;
    let overlap = image_overlap_bound(sigma, lattice_radius)?;
    let scaled = |f: Interval| -> Result<LogMagnitude> {
        if overlap.total.is_zero() || f.hi() == 0.0 {
            Ok(LogMagnitude::zero())
        } else {
            Ok(overlap.total.scale(Interval::point(f.hi()))?)
        }
    };
    let eps_projector = scaled(projector_bound)?;
    let eps_pressure = scaled(pressure_factor)?;
    let eps_total = overlap.total.to_interval()?
        + eps_projector.to_interval()?
        + eps_pressure.to_interval()?;
    let consistent_with_declared = declared.map(|d| eps_total.hi() <= d.lo());
    Ok(TransferReport {
        overlap,
        eps_projector,
        eps_pressure,
        eps_total,
        declared,
        consistent_with_declared,
    })
}
