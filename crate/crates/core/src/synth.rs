//! Seeded synthetic profiles for testing the certifiers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificate::{Ball, Decimal, ProfileCertificate};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::residual::CoefficientEnvelope;

/// Shape of a synthetic profile: `|c_j| ≤ fill · amplitude · e^{-rate·j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub modes: usize,
    pub amplitude: f64,
    pub rate: f64,
    /// Fraction of the envelope actually used, in `(0, 1)`.
    pub fill: f64,
    pub nu: String,
    pub sigma: String,
    pub tau: String,
}

impl SynthSpec {
    pub fn new(modes: usize) -> Self {
        SynthSpec {
            modes,
            amplitude: 1e-3,
            rate: 0.5,
            fill: 0.9,
            nu: "0.005".into(),
            sigma: "0.05".into(),
            tau: "0.08".into(),
        }
    }

    pub fn envelope(&self) -> CoefficientEnvelope {
        CoefficientEnvelope {
            amplitude: Interval::point(self.amplitude),
            rate: Interval::point(self.rate),
        }
    }
}

/// Random certificate with modes `1..=spec.modes`, each coefficient a
/// 12-digit decimal drawn uniformly inside the envelope. Same seed, same
/// certificate.
pub fn synthesize_profile(spec: &SynthSpec, seed: u64) -> Result<ProfileCertificate> {
    if spec.modes == 0 {
        return Err(Error::InvalidParameter("a synthetic profile needs at least one mode".into()));
    }
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if !ok(spec.amplitude) || !ok(spec.rate) || !(spec.fill > 0.0 && spec.fill < 1.0) {
        return Err(Error::InvalidParameter(format!("bad synthetic envelope {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = BTreeMap::new();
    for j in 1..=spec.modes {
        let bound = spec.fill * spec.amplitude * (-spec.rate * j as f64).exp();
        let value: f64 = rng.random_range(-bound..=bound);
        modes.insert(j, Ball::parse(&format!("{value:.11e}"), "0")?);
    }
    let cert = ProfileCertificate::new(
        Ball::parse(&spec.nu, "0")?,
        Decimal::parse(&spec.sigma)?,
        Decimal::parse(&spec.tau)?,
        modes,
        BTreeMap::new(),
    )?;
    spec.envelope().check(&cert)?;
    Ok(cert)
}
