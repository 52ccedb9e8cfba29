//! The truncated profile operator
//!
//! ```text
//! G(c)_j = (1 + d_j + ν λ_j) c_j  +  Σ_{k,l} C_klj c_k c_l  +  2 Σ_{k,l} C_klj K_rec(k) c_k c_l
//! ```
//!
//! i.e. `G(c) = L c + Q(c, c) + 2 Q(K c, c)`, and its analytic Jacobian on
//! modes `1..=N`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::BasisModel;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix};
use crate::spectral::CoefficientVector;

#[derive(Clone)]
pub struct OperatorConfig {
    model: Arc<dyn BasisModel>,
    nu: Interval,
    truncation: usize,
}

impl OperatorConfig {
    pub fn new(model: Arc<dyn BasisModel>, nu: Interval, truncation: usize) -> Result<Self> {
        let nu = nu.checked()?;
        if nu.lo() <= 0.0 {
            return Err(Error::InvalidParameter(format!("viscosity {nu} must be positive")));
        }
        if truncation == 0 {
            return Err(Error::InvalidParameter("truncation must be at least 1".into()));
        }
        Ok(OperatorConfig { model, nu, truncation })
    }

    pub fn model(&self) -> &dyn BasisModel {
        self.model.as_ref()
    }

    pub fn nu(&self) -> Interval {
        self.nu
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Diagonal linear symbol `1 + d_j + ν λ_j`.
    pub fn linear_symbol(&self, j: usize) -> Interval {
        Interval::ONE + self.model.drift(j) + self.nu * self.model.diffusion(j)
    }

    fn check_support(&self, c: &CoefficientVector) -> Result<()> {
        if c.is_poisoned() {
            return Err(Error::Certification("coefficient vector holds an empty interval".into()));
        }
        match c.support_max() {
            Some(j) if j > self.truncation => {
                Err(Error::ModeOutOfRange { index: j, max: self.truncation })
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Debug for OperatorConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorConfig")
            .field("model", &self.model.name())
            .field("nu", &self.nu)
            .field("truncation", &self.truncation)
            .finish()
    }
}

pub fn apply_linear(c: &CoefficientVector, cfg: &OperatorConfig) -> Result<CoefficientVector> {
    cfg.check_support(c)?;
    let mut out = CoefficientVector::new(cfg.truncation);
    for (j, cj) in c.nonzero() {
        out.insert(j, cfg.linear_symbol(j) * cj)?;
    }
    Ok(out)
}

/// `(K c)_k = K_rec(k) c_k`.
pub fn recover_velocity(c: &CoefficientVector, cfg: &OperatorConfig) -> Result<CoefficientVector> {
    cfg.check_support(c)?;
    let mut out = CoefficientVector::new(cfg.truncation);
    for (k, ck) in c.nonzero() {
        out.insert(k, cfg.model.recovery(k) * ck)?;
    }
    Ok(out)
}

/// Dense accumulation of `Σ_{k,l} C_klj a(k) u_k v_l` on modes `1..=2N`.
///
/// Work is split by `k`; partial sums are then added in increasing `k` so
/// the rounding is independent of thread scheduling.
fn contract(
    u: &CoefficientVector,
    v: &CoefficientVector,
    cfg: &OperatorConfig,
    factor: impl Fn(usize) -> Interval + Sync,
) -> Vec<Interval> {
    let size = 2 * cfg.truncation + 1;
    let us: Vec<(usize, Interval)> = u.nonzero().collect();
    let vs: Vec<(usize, Interval)> = v.nonzero().collect();
    let model = cfg.model();
    let partials: Vec<Vec<Interval>> = us
        .par_iter()
        .map(|&(k, uk)| {
            let mut acc = vec![Interval::ZERO; size];
            let uk = uk * factor(k);
            for &(l, vl) in &vs {
                let p = uk * vl;
                for j in model.selection(k, l) {
                    let cklj = model.interaction(k, l, j);
                    if cklj != Interval::ZERO {
                        acc[j] = acc[j] + cklj * p;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Interval::ZERO; size];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t = *t + p;
        }
    }
    total
}

fn dense_to_vector(dense: Vec<Interval>, max_mode: usize) -> CoefficientVector {
    let mut out = CoefficientVector::new(max_mode);
    for (j, x) in dense.into_iter().enumerate().skip(1) {
        if x != Interval::ZERO {
            out.insert(j, x).expect("dense index within range");
        }
    }
    out
}

/// `Q(u, v)_j = Σ_{k,l} C_klj u_k v_l`, on modes `1..=2N`.
pub fn apply_quadratic(
    u: &CoefficientVector,
    v: &CoefficientVector,
    cfg: &OperatorConfig,
) -> Result<CoefficientVector> {
    cfg.check_support(u)?;
    cfg.check_support(v)?;
    Ok(dense_to_vector(contract(u, v, cfg, |_| Interval::ONE), 2 * cfg.truncation))
}

/// `G(c) = L c + Q(c, c) + 2 Q(K c, c)`, on modes `1..=2N`.
pub fn apply_g(c: &CoefficientVector, cfg: &OperatorConfig) -> Result<CoefficientVector> {
    let linear = apply_linear(c, cfg)?;
    let model = cfg.model();
    let dense = contract(c, c, cfg, |k| Interval::ONE + model.recovery(k).scale(2.0));
    let mut out = dense_to_vector(dense, 2 * cfg.truncation);
    for (j, x) in linear.iter() {
        out.add_to(j, x)?;
    }
    Ok(out)
}

/// Analytic Jacobian `∂G_j/∂c_m` for `j, m` in `1..=N`, row `j-1`, column `m-1`:
///
/// ```text
/// J_jm = (1 + d_j + ν λ_j) δ_jm
///      + Σ_l C_mlj c_l (1 + 2 K_rec(m)) + Σ_k C_kmj c_k (1 + 2 K_rec(k))
/// ```
pub fn assemble_jacobian(c: &CoefficientVector, cfg: &OperatorConfig) -> Result<IntervalMatrix> {
    cfg.check_support(c)?;
    let n = cfg.truncation;
    let model = cfg.model();
    let cs: Vec<(usize, Interval)> = c.nonzero().collect();
    let weighted: Vec<(usize, Interval)> = cs
        .iter()
        .map(|&(k, ck)| (k, ck * (Interval::ONE + model.recovery(k).scale(2.0))))
        .collect();
    let columns: Vec<Vec<Interval>> = (1..=n)
        .into_par_iter()
        .map(|m| {
            let mut col = vec![Interval::ZERO; n + 1];
            col[m] = cfg.linear_symbol(m);
            let own = Interval::ONE + model.recovery(m).scale(2.0);
            for &(l, cl) in &cs {
                let p = cl * own;
                for j in model.selection(m, l) {
                    if j > n {
                        break;
                    }
                    let cmlj = model.interaction(m, l, j);
                    if cmlj != Interval::ZERO {
                        col[j] = col[j] + cmlj * p;
                    }
                }
            }
            for &(k, wk) in &weighted {
                for j in model.selection(k, m) {
                    if j > n {
                        break;
                    }
                    let ckmj = model.interaction(k, m, j);
                    if ckmj != Interval::ZERO {
                        col[j] = col[j] + ckmj * wk;
                    }
                }
            }
            col
        })
        .collect();
    let mut jac = IntervalMatrix::zeros(n, n);
    for (mi, col) in columns.into_iter().enumerate() {
        for (j, x) in col.into_iter().enumerate().skip(1) {
            jac[(j - 1, mi)] = x;
        }
    }
    Ok(jac)
}
