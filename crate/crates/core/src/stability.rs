//! Bounds on the inverse linearization.
//!
//! On the finite block, the Rump criterion: with `R ≈ mid(J)^{-1}` and
//! `E = I - R J`, `‖E‖ < 1` certifies every `J` in the interval matrix is
//! invertible with `‖J^{-1}‖ ≤ ‖R‖ / (1 - ‖E‖)`.
//!
//! Beyond the block, diffusion has to beat the interaction envelope
//! `Inter_j = C_prof · j^{7/2} · Σ_k |c_k| e^{-τ(j-k)}`; the coercivity gap is
//! `γ = inf_{j > N} (ν j² - Inter_j)`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::certificate::ProfileCertificate;
use crate::error::{Error, Result};
use crate::interval::{inf_norm, Interval, IntervalMatrix};

#[derive(Clone, Debug)]
pub struct InverseReport {
    pub r_norm: Interval,
    pub e_norm: Interval,
    /// Bound on `‖J^{-1}‖`; `[0, +inf]` when not verified.
    pub m: Interval,
    pub verified: bool,
    pub diagnostic: Option<String>,
}

/// `‖R‖ / (1 - ‖E‖)`, defined when `‖E‖ < 1`.
pub fn rump_bound(r_norm: Interval, e_norm: Interval) -> Result<Interval> {
    let r_norm = r_norm.checked()?;
    let e_norm = e_norm.checked()?;
    if e_norm.hi() >= 1.0 {
        return Err(Error::Certification(format!(
            "contraction ‖I - RJ‖ ≤ {} is not below 1",
            e_norm.hi()
        )));
    }
    Ok(r_norm.try_div(&(Interval::ONE - e_norm))?)
}

pub fn certify_inverse(jac: &IntervalMatrix) -> Result<InverseReport> {
    if !jac.is_square() {
        return Err(Error::InvalidParameter(format!(
            "Jacobian must be square, got {}x{}",
            jac.rows(),
            jac.cols()
        )));
    }
    if jac.has_empty() {
        return Err(Error::Certification("Jacobian holds an empty interval".into()));
    }
    let n = jac.rows();
    let mid = DMatrix::from_row_slice(n, n, &jac.midpoints());
    let unverified = |msg: String| InverseReport {
        r_norm: Interval::EMPTY,
        e_norm: Interval::EMPTY,
        m: Interval::new(0.0, f64::INFINITY).expect("valid"),
        verified: false,
        diagnostic: Some(msg),
    };
    let Some(inv) = mid.try_inverse() else {
        return Ok(unverified("midpoint matrix is numerically singular".into()));
    };
    if inv.iter().any(|x| !x.is_finite()) {
        return Ok(unverified("approximate inverse has non-finite entries".into()));
    }
    let r_values: Vec<f64> =
        (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| inv[(i, k)]).collect();
    let r = IntervalMatrix::from_points(n, n, &r_values);
    let e = r.mul(jac).identity_minus();
    let r_norm = inf_norm(&r);
    let e_norm = inf_norm(&e);
    match rump_bound(r_norm, e_norm) {
        Ok(m) => Ok(InverseReport { r_norm, e_norm, m, verified: true, diagnostic: None }),
        Err(err) => Ok(InverseReport {
            r_norm,
            e_norm,
            m: Interval::new(0.0, f64::INFINITY).expect("valid"),
            verified: false,
            diagnostic: Some(err.to_string()),
        }),
    }
}

/// `C_prof · j^{7/2} · Σ_k |c_k| e^{-rate·(j-k)}` for a mode `j` beyond the
/// profile's support.
pub fn interaction_envelope(
    cert: &ProfileCertificate,
    c_prof: Interval,
    j: usize,
    rate: Interval,
) -> Result<Interval> {
    let support = cert.coefficients().support_max().unwrap_or(0);
    if j <= support {
        return Err(Error::InvalidParameter(format!(
            "envelope mode {j} must lie beyond the profile support {support}"
        )));
    }
    let mut sum = Interval::ZERO;
    for (k, ck) in cert.coefficients().nonzero() {
        let decay = (-(rate.scale((j - k) as f64))).exp()?;
        sum = sum + ck.abs() * decay;
    }
    Ok(c_prof * Interval::point(j as f64).powf(3.5)? * sum)
}

#[derive(Clone, Debug)]
pub struct CoercivityReport {
    /// Enclosure of the minimum of `ν j² - Inter_j` over the window.
    pub gamma: Interval,
    pub argmin: usize,
    pub j_min: usize,
    pub j_max: usize,
    /// `ν j² - Inter_j` for each `j` in the window.
    pub window_values: Vec<Interval>,
    /// Whether `Inter_j` is certified nonincreasing past the window.
    pub monotone_tail_verified: bool,
    pub verified: bool,
}

/// Evaluate `ν j² - Inter_j` on `j_min..=j_min+window` and certify that the
/// minimum extends to all `j > j_min + window`.
///
/// Past the window `ν j²` increases and `Inter_{j+1}/Inter_j =
/// ((j+1)/j)^{7/2} e^{-rate}` decreases in `j`, so the ratio at the window
/// end being below 1 settles the tail.
pub fn certify_tail_coercivity(
    cert: &ProfileCertificate,
    nu: Interval,
    truncation: usize,
    c_prof: Interval,
    j_min: usize,
    window: usize,
    rate: Interval,
) -> Result<CoercivityReport> {
    if j_min <= truncation {
        return Err(Error::InvalidParameter(format!(
            "coercivity window start {j_min} must exceed the truncation {truncation}"
        )));
    }
    let nu = nu.checked()?;
    if nu.lo() <= 0.0 {
        return Err(Error::InvalidParameter(format!("viscosity {nu} must be positive")));
    }
    let j_max = j_min + window;
    let window_values = (j_min..=j_max)
        .into_par_iter()
        .map(|j| {
            let diffusion = nu * Interval::point(j as f64).sqr();
            Ok(diffusion - interaction_envelope(cert, c_prof, j, rate)?)
        })
        .collect::<Result<Vec<Interval>>>()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    let mut argmin = j_min;
    for (i, v) in window_values.iter().enumerate() {
        if v.is_empty() {
            return Err(Error::Certification(format!("empty enclosure at j={}", j_min + i)));
        }
        lo = lo.min(v.lo());
        if v.hi() < hi {
            hi = v.hi();
            argmin = j_min + i;
        }
    }
    let gamma = Interval::new(lo, hi)?;
    let jj = Interval::point(j_max as f64);
    let ratio = ((jj + Interval::ONE) / jj).powf(3.5)? * (-rate).exp()?;
    let monotone_tail_verified = ratio.hi() < 1.0;
    Ok(CoercivityReport {
        gamma,
        argmin,
        j_min,
        j_max,
        window_values,
        monotone_tail_verified,
        verified: monotone_tail_verified && gamma.lo() > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{Ball, Decimal};
    use std::collections::BTreeMap;

    fn cert_with(modes: &[(usize, &str)]) -> ProfileCertificate {
        let modes: BTreeMap<usize, Ball> =
            modes.iter().map(|&(j, m)| (j, Ball::parse(m, "0").unwrap())).collect();
        ProfileCertificate::new(
            Ball::parse("0.005", "0").unwrap(),
            Decimal::parse("0.05").unwrap(),
            Decimal::parse("0.08").unwrap(),
            modes,
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn rump_bound_example() {
        let m = rump_bound(Interval::point(482.540), Interval::from_decimal("1.2435e-4").unwrap())
            .unwrap();
        assert!((m.mid() - 482.600_011_311_406_57).abs() < 1e-9);
        assert!(rump_bound(Interval::ONE, Interval::ONE).is_err());
    }

    #[test]
    fn identity_is_its_own_inverse() {
        let rep = certify_inverse(&IntervalMatrix::identity(4)).unwrap();
        assert!(rep.verified);
        assert_eq!(rep.e_norm, Interval::ZERO);
        assert_eq!(rep.m, Interval::ONE);
    }

    #[test]
    fn singular_midpoint_is_reported() {
        let j = IntervalMatrix::from_points(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let rep = certify_inverse(&j).unwrap();
        assert!(!rep.verified);
        assert!(rep.diagnostic.is_some());
        assert!(certify_inverse(&IntervalMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn wide_matrix_fails_contraction() {
        let wide = Interval::new(-1.0, 3.0).unwrap();
        let j = IntervalMatrix::from_intervals(1, 1, vec![wide]);
        let rep = certify_inverse(&j).unwrap();
        assert!(!rep.verified);
    }

    #[test]
    fn envelope_single_mode() {
        let cert = cert_with(&[(450, "5")]);
        let v = interaction_envelope(&cert, Interval::ONE, 451, Interval::point(0.08)).unwrap();
        // 5 · 451^3.5 · e^-0.08
        assert!((v.mid() / (5.0 * 1_798_350_491.800_826_3) - 1.0).abs() < 1e-13);
        assert!(interaction_envelope(&cert, Interval::ONE, 450, Interval::point(0.08)).is_err());
    }

    #[test]
    fn coercivity_requires_window_past_truncation() {
        let cert = cert_with(&[(1, "1")]);
        let nu = Interval::from_decimal("0.005").unwrap();
        assert!(certify_tail_coercivity(&cert, nu, 450, Interval::ONE, 450, 10, Interval::point(0.08))
            .is_err());
    }
}
