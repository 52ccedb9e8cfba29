//! Spectral data of the Galerkin basis.
//!
//! The audit only needs, per mode, a diffusion eigenvalue, a drift rate, the
//! interaction tensor `C_klj` and the velocity-recovery kernel `K_rec(k)`.
//! [`BasisModel`] abstracts these so the closure checks can run against any
//! basis; [`ReferenceModel`] is a concrete, documented choice.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Cap on the recovery kernel relative to `k^{7/2}`.
pub const RECOVERY_KERNEL_CAP: f64 = 200.0;

pub trait BasisModel: Send + Sync {
    fn name(&self) -> String;

    /// Diffusion eigenvalue `λ_j ≥ 0`.
    fn diffusion(&self, j: usize) -> Interval;

    /// Linear drift/stretching rate `d_j`.
    fn drift(&self, j: usize) -> Interval;

    /// Interaction coefficient `C_klj`: weight of `c_k c_l` in output mode `j`.
    fn interaction(&self, k: usize, l: usize, j: usize) -> Interval;

    /// Bound on `|C_klj|` over all indices.
    fn interaction_bound(&self) -> Interval;

    /// Recovery kernel `K_rec(k)` mapping a vorticity mode to its velocity mode.
    fn recovery(&self, k: usize) -> Interval;

    /// Output modes `j ≥ 1` where `C_klj` may be nonzero.
    fn selection(&self, k: usize, l: usize) -> RangeInclusive<usize> {
        k.abs_diff(l).max(1)..=k + l
    }
}

/// Reference basis:
///
/// * `λ_j = j²`, `d_j = j/2`
/// * `C_klj = coupling / (1 + |j - k - l|)` when `|k - l| ≤ j ≤ k + l`, else 0
/// * `K_rec(k) = coupling_rec · k^{7/2}`
///
/// The formulas are deterministic; the seed is carried for bookkeeping so
/// that runs can be labelled and reproduced alongside randomized inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceModel {
    seed: u64,
    coupling: Interval,
    coupling_rec: Interval,
}

impl ReferenceModel {
    pub fn new(seed: u64, coupling: f64) -> Result<Self> {
        Self::with_couplings(seed, coupling, 1.0)
    }

    pub fn with_couplings(seed: u64, coupling: f64, coupling_rec: f64) -> Result<Self> {
        for (name, v) in [("coupling", coupling), ("coupling_rec", coupling_rec)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(ReferenceModel {
            seed,
            coupling: Interval::point(coupling),
            coupling_rec: Interval::point(coupling_rec),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coupling(&self) -> Interval {
        self.coupling
    }

    pub fn coupling_rec(&self) -> Interval {
        self.coupling_rec
    }
}

pub fn reference_model(seed: u64, coupling: f64) -> Result<ReferenceModel> {
    ReferenceModel::new(seed, coupling)
}

impl BasisModel for ReferenceModel {
    fn name(&self) -> String {
        format!(
            "reference(coupling={}, coupling_rec={}, seed={})",
            self.coupling.mid(),
            self.coupling_rec.mid(),
            self.seed
        )
    }

    fn diffusion(&self, j: usize) -> Interval {
        Interval::point(j as f64).sqr()
    }

    fn drift(&self, j: usize) -> Interval {
        Interval::point(j as f64).scale(0.5)
    }

    fn interaction(&self, k: usize, l: usize, j: usize) -> Interval {
        if j < k.abs_diff(l) || j > k + l || j == 0 {
            return Interval::ZERO;
        }
        let distance = (k + l - j) as f64;
        self.coupling / Interval::point(1.0 + distance)
    }

    fn interaction_bound(&self) -> Interval {
        self.coupling.abs()
    }

    fn recovery(&self, k: usize) -> Interval {
        let growth = Interval::point(k as f64).powf(3.5).expect("k^3.5 is finite for usize k");
        self.coupling_rec * growth
    }
}

/// `|K_rec(k)|`, checked against the cap `|K_rec(k)| ≤ 200 · k^{7/2}`.
///
/// Both sides carry the rounding of `k^{7/2}`, so a kernel sitting exactly on
/// the cap is accepted; anything whose upper bound passes the cap's upper
/// bound is rejected.
pub fn recovery_kernel_bound(model: &dyn BasisModel, k: usize) -> Result<Interval> {
    if k == 0 {
        return Err(Error::ModeOutOfRange { index: 0, max: usize::MAX });
    }
    let value = model.recovery(k).checked()?.abs();
    let cap = Interval::point(k as f64).powf(3.5)?.scale(RECOVERY_KERNEL_CAP);
    if value.hi() > cap.hi() {
        return Err(Error::Certification(format!(
            "recovery kernel at k={k} is {value}, above the cap {RECOVERY_KERNEL_CAP}·k^3.5 = {cap}"
        )));
    }
    Ok(value)
}
