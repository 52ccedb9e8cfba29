//! Shared helpers for the integration suites: a multiprecision oracle built
//! on astro-float and seeded profile generators.

#![allow(dead_code)]

use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use nkcert::certificate::ProfileCertificate;
use nkcert::interval::IntervalMatrix;
use nkcert::synth::{synthesize_profile, SynthSpec};
use nkcert::Interval;

/// Working precision of the oracle, in bits.
pub const P: usize = 256;

pub struct Oracle {
    cc: Consts,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { cc: Consts::new().expect("constants cache") }
    }
}

/// Exact conversion. `BigFloat::from_f64` misreads subnormals, so those are
/// scaled into the normal range first and scaled back exactly.
pub fn big(x: f64) -> BigFloat {
    if x.is_subnormal() {
        let scale = 2f64.powi(128);
        return BigFloat::from_f64(x * scale, P).div(&BigFloat::from_f64(scale, P), P, NEAR);
    }
    BigFloat::from_f64(x, P)
}

pub fn cmp(a: &BigFloat, b: &BigFloat) -> Ordering {
    match a.cmp(b).expect("comparable") {
        0 => Ordering::Equal,
        s if s < 0 => Ordering::Less,
        _ => Ordering::Greater,
    }
}

/// `lo ≤ x ≤ hi` for the exact value of `x`.
pub fn encloses(iv: Interval, x: &BigFloat) -> bool {
    cmp(&big(iv.lo()), x) != Ordering::Greater && cmp(x, &big(iv.hi())) != Ordering::Greater
}

/// Both directed roundings of a value lie inside `iv`.
pub fn encloses_pair(iv: Interval, down: &BigFloat, up: &BigFloat) -> bool {
    encloses(iv, down) && encloses(iv, up)
}

const DN: RoundingMode = RoundingMode::Down;
const UP: RoundingMode = RoundingMode::Up;
const NEAR: RoundingMode = RoundingMode::ToEven;

impl Oracle {
    pub fn decimal(&mut self, text: &str) -> BigFloat {
        BigFloat::parse(text, Radix::Dec, P, NEAR, &mut self.cc)
    }

    /// `exp(x)` rounded down and up.
    pub fn exp(&mut self, x: f64) -> (BigFloat, BigFloat) {
        let b = big(x);
        (b.exp(P, DN, &mut self.cc), b.exp(P, UP, &mut self.cc))
    }

    pub fn exp_near(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(P, NEAR, &mut self.cc)
    }

    pub fn ln(&mut self, x: f64) -> (BigFloat, BigFloat) {
        let b = big(x);
        (b.ln(P, DN, &mut self.cc), b.ln(P, UP, &mut self.cc))
    }

    pub fn sqrt(x: &BigFloat) -> BigFloat {
        x.sqrt(P, NEAR)
    }

    /// Exact residual norm `‖G(c)‖_X` of the reference model, evaluated
    /// straight from the defining sums in multiprecision:
    ///
    /// `G_j = (1 + j/2 + ν j²) c_j + Σ_{k,l} C_klj c_k c_l (1 + 2 ρ k^{7/2})`,
    /// `C_klj = κ/(1 + k + l - j)` on `|k-l| ≤ j ≤ k+l`, norm weights
    /// `(1+j²)^6 e^{2τj}` over `j ≤ 2N`.
    pub fn residual_norm(
        &mut self,
        cert: &ProfileCertificate,
        n: usize,
        coupling: f64,
        coupling_rec: f64,
    ) -> BigFloat {
        let nu = self.decimal(cert.nu().mid().text());
        let tau = self.decimal(cert.tau().text());
        let c: Vec<BigFloat> = (0..=n)
            .map(|k| match cert.modes().get(&k) {
                Some(ball) => self.decimal(ball.mid().text()),
                None => big(0.0),
            })
            .collect();
        let kappa = big(coupling);
        let rho = big(coupling_rec);
        let two = big(2.0);
        let one = big(1.0);
        let growth: Vec<BigFloat> = (0..=n)
            .map(|k| {
                let kb = big(k as f64);
                let k35 = kb.powi(3, P, NEAR).mul(&Self::sqrt(&kb), P, NEAR);
                one.add(&two.mul(&rho, P, NEAR).mul(&k35, P, NEAR), P, NEAR)
            })
            .collect();
        let mut total = big(0.0);
        for j in 1..=2 * n {
            let jb = big(j as f64);
            let mut g = big(0.0);
            if j <= n {
                let sym = one
                    .add(&jb.div(&two, P, NEAR), P, NEAR)
                    .add(&nu.mul(&jb.mul(&jb, P, NEAR), P, NEAR), P, NEAR);
                g = sym.mul(&c[j], P, NEAR);
            }
            for k in 1..=n {
                for l in 1..=n {
                    if k.abs_diff(l) > j || j > k + l {
                        continue;
                    }
                    let coef = kappa.div(&big((1 + k + l - j) as f64), P, NEAR);
                    let term = coef
                        .mul(&c[k], P, NEAR)
                        .mul(&c[l], P, NEAR)
                        .mul(&growth[k], P, NEAR);
                    g = g.add(&term, P, NEAR);
                }
            }
            let base = one.add(&jb.mul(&jb, P, NEAR), P, NEAR).powi(6, P, NEAR);
            let decay = self.exp_near(&two.mul(&tau, P, NEAR).mul(&jb, P, NEAR));
            let w2 = base.mul(&decay, P, NEAR);
            total = total.add(&w2.mul(&g.mul(&g, P, NEAR), P, NEAR), P, NEAR);
        }
        Self::sqrt(&total)
    }
}

/// Precision of the Gauss-Jordan oracle; the bounds it checks are tight to
/// about 1e-13 relative, so 128 bits leaves a wide margin.
const GJ_BITS: usize = 128;

/// `‖A⁻¹‖_∞` of a point matrix by Gauss-Jordan elimination with partial
/// pivoting in multiprecision. `None` if a pivot vanishes.
pub fn inverse_inf_norm(n: usize, entries: &[f64]) -> Option<BigFloat> {
    let mut a: Vec<Vec<BigFloat>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigFloat> = entries[i * n..(i + 1) * n].iter().map(|&x| big(x)).collect();
            row.extend((0..n).map(|k| big(if k == i { 1.0 } else { 0.0 })));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| cmp(&a[x][col].abs(), &a[y][col].abs()))?;
        if a[pivot][col].is_zero() {
            return None;
        }
        a.swap(col, pivot);
        let inv = big(1.0).div(&a[col][col], GJ_BITS, NEAR);
        for k in 0..2 * n {
            a[col][k] = a[col][k].mul(&inv, GJ_BITS, NEAR);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for k in 0..2 * n {
                let t = f.mul(&a[col][k], GJ_BITS, NEAR);
                a[r][k] = a[r][k].sub(&t, GJ_BITS, NEAR);
            }
        }
    }
    let mut best = big(0.0);
    for row in &a {
        let mut s = big(0.0);
        for x in &row[n..] {
            s = s.add(&x.abs(), GJ_BITS, NEAR);
        }
        if cmp(&s, &best) == Ordering::Greater {
            best = s;
        }
    }
    Some(best)
}

/// Exact `max_i Σ_k max(|lo|, |hi|)` for an interval matrix whose entries
/// span fewer than 900 binary orders of magnitude.
pub fn inf_norm_exact(m: &IntervalMatrix) -> BigFloat {
    let mut best = big(0.0);
    for i in 0..m.rows() {
        let mut s = big(0.0);
        for k in 0..m.cols() {
            s = s.add(&big(m[(i, k)].mag()), 1024, NEAR);
        }
        if cmp(&s, &best) == Ordering::Greater {
            best = s;
        }
    }
    best
}

/// Envelope-conforming profile on modes `1..=n`.
pub fn random_profile(n: usize, seed: u64) -> ProfileCertificate {
    synthesize_profile(&SynthSpec::new(n), seed).expect("valid synthetic envelope")
}
