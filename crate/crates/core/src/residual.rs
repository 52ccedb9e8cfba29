//! Certified enclosure of the residual `δ = ‖G(c)‖_X`.
//!
//! For coefficients supported on `1..=N` the residual lives on `1..=2N`
//! (the interaction tensor only reaches `j ≤ k + l`), so the finite and tail
//! parts are exact finite sums evaluated in interval arithmetic. There is no
//! spatial quadrature, so the quadrature slot of the report is exactly zero.

use std::collections::BTreeMap;

use crate::certificate::ProfileCertificate;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::operator::{apply_g, OperatorConfig};
use crate::spectral::{norm_sq, weight_sq, WeightedSpace};

#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Norm of the residual on modes `1..=N`.
    pub delta_fin: Interval,
    /// Norm of the residual on modes `N+1..=2N`.
    pub delta_tail: Interval,
    /// Error from spatial quadrature; zero because none is used.
    pub quadrature: Interval,
    /// `sqrt(delta_fin² + delta_tail²)`.
    pub delta: Interval,
    /// Residual coefficients per mode.
    pub per_mode: BTreeMap<usize, Interval>,
    pub truncation: usize,
}

pub fn certify_residual(
    cert: &ProfileCertificate,
    cfg: &OperatorConfig,
    space: &WeightedSpace,
) -> Result<ResidualReport> {
    let n = cfg.truncation();
    let g = apply_g(cert.coefficients(), cfg)?;
    let fin_sq = norm_sq(&g.restrict(1..=n), space)?;
    let tail_sq = norm_sq(&g.restrict(n + 1..=2 * n), space)?;
    let delta = (fin_sq + tail_sq).sqrt();
    if delta.is_empty() || !delta.is_finite() {
        return Err(Error::Certification(format!("residual enclosure is not finite: {delta}")));
    }
    Ok(ResidualReport {
        delta_fin: fin_sq.sqrt(),
        delta_tail: tail_sq.sqrt(),
        quadrature: Interval::ZERO,
        delta,
        per_mode: g.iter().collect(),
        truncation: n,
    })
}

/// Exponential envelope `|c_k| ≤ amplitude · e^{-rate·k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientEnvelope {
    pub amplitude: Interval,
    pub rate: Interval,
}

impl CoefficientEnvelope {
    /// Smallest amplitude that dominates every coefficient at `rate`.
    pub fn fit(cert: &ProfileCertificate, rate: Interval) -> Result<Self> {
        let mut amp = 0.0f64;
        for (k, ck) in cert.coefficients().nonzero() {
            let scaled = Interval::point(ck.mag()) * (rate.scale(k as f64)).exp()?;
            amp = amp.max(scaled.hi());
        }
        Ok(CoefficientEnvelope { amplitude: Interval::point(amp), rate })
    }

    /// Errors naming the first mode that escapes the envelope.
    pub fn check(&self, cert: &ProfileCertificate) -> Result<()> {
        for (k, ck) in cert.coefficients().nonzero() {
            let scaled = Interval::point(ck.mag()) * (self.rate.scale(k as f64)).exp()?;
            if scaled.hi() > self.amplitude.lo() {
                return Err(Error::Certification(format!(
                    "mode {k} ({ck}) exceeds the envelope {}·e^(-{}·k)",
                    self.amplitude, self.rate
                )));
            }
        }
        Ok(())
    }
}

/// Upper bound on the squared tail `Σ_{j=N+1}^{2N} w_j² |G(c)_j|²` using only
/// an envelope of the coefficients:
///
/// `|G(c)_j| ≤ B (1 + 2 max_k |K_rec(k)|) A² Σ_{s=j}^{2N} n_N(s) e^{-rate·s}`,
///
/// where `B` bounds `|C_klj|` and `n_N(s)` counts pairs `k + l = s` with
/// `1 ≤ k, l ≤ N`.
pub fn tail_envelope_bound(
    cert: &ProfileCertificate,
    cfg: &OperatorConfig,
    space: &WeightedSpace,
    envelope: &CoefficientEnvelope,
) -> Result<Interval> {
    envelope.check(cert)?;
    let n = cfg.truncation();
    if let Some(j) = cert.coefficients().support_max() {
        if j > n {
            return Err(Error::ModeOutOfRange { index: j, max: n });
        }
    }
    let model = cfg.model();
    let mut kmax = Interval::ZERO;
    for k in 1..=n {
        kmax = kmax.max(&model.recovery(k).abs());
    }
    let lead = model.interaction_bound()
        * (Interval::ONE + kmax.scale(2.0))
        * envelope.amplitude.sqr();
    // suffix[s] = Σ_{t ≥ s} n_N(t) e^{-rate·t}
    let mut suffix = vec![Interval::ZERO; 2 * n + 2];
    for s in (2..=2 * n).rev() {
        let pairs = (s - 1).min(n) + 1 - (s.saturating_sub(n)).max(1);
        let term = (-(envelope.rate.scale(s as f64))).exp()?.scale(pairs as f64);
        suffix[s] = suffix[s + 1] + term;
    }
    let mut total = Interval::ZERO;
    for j in (n + 1..=2 * n).rev() {
        let bound = lead * suffix[j];
        total = total + weight_sq(j, space)? * bound.sqr();
    }
    Ok(Interval::new(0.0, total.hi())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::reference_model;
    use crate::certificate::{Ball, Decimal};
    use std::sync::Arc;

    fn single_mode_cert() -> ProfileCertificate {
        let mut modes = BTreeMap::new();
        modes.insert(1, Ball::parse("1", "0").unwrap());
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
    fn single_mode_without_coupling() {
        let cert = single_mode_cert();
        let model = Arc::new(reference_model(0, 0.0).unwrap());
        let cfg = OperatorConfig::new(model, cert.nu().enclosure(), 1).unwrap();
        let r = certify_residual(&cert, &cfg, &WeightedSpace::profile()).unwrap();
        // 1.505 · 8 · e^0.08
        assert!(r.delta.contains(13.042_776_294_806_501));
        assert_eq!(r.delta_tail, Interval::ZERO);
        assert_eq!(r.quadrature, Interval::ZERO);
    }

    #[test]
    fn tail_bound_dominates_true_tail() {
        let cert = single_mode_cert();
        let model = Arc::new(reference_model(0, 1.0).unwrap());
        let cfg = OperatorConfig::new(model, cert.nu().enclosure(), 1).unwrap();
        let x = WeightedSpace::profile();
        let r = certify_residual(&cert, &cfg, &x).unwrap();
        let env = CoefficientEnvelope::fit(&cert, x.tau()).unwrap();
        let bound = tail_envelope_bound(&cert, &cfg, &x, &env).unwrap();
        assert!(r.delta_tail.sqr().hi() <= bound.hi());
    }

    #[test]
    fn envelope_check_names_the_violating_mode() {
        let cert = single_mode_cert();
        let env = CoefficientEnvelope { amplitude: Interval::ONE, rate: Interval::point(0.08) };
        let err = env.check(&cert).unwrap_err().to_string();
        assert!(err.contains("mode 1"), "{err}");
    }
}
