//! Second-order jets in two variables `(ρ, ζ)`: a value together with its
//! first and second partial derivatives, propagated exactly through
//! arithmetic (up to binary64 rounding).

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub r: f64,
    pub z: f64,
    pub rr: f64,
    pub rz: f64,
    pub zz: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 { v, r: 0.0, z: 0.0, rr: 0.0, rz: 0.0, zz: 0.0 }
    }

    /// The coordinate `ρ` at `rho`.
    pub fn rho(rho: f64) -> Self {
        Jet2 { r: 1.0, ..Self::constant(rho) }
    }

    /// The coordinate `ζ` at `zeta`.
    pub fn zeta(zeta: f64) -> Self {
        Jet2 { z: 1.0, ..Self::constant(zeta) }
    }

    /// `φ ∘ self` given `φ`, `φ'`, `φ''` at `self.v`.
    fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        Jet2 {
            v: f0,
            r: f1 * self.r,
            z: f1 * self.z,
            rr: f2 * self.r * self.r + f1 * self.rr,
            rz: f2 * self.r * self.z + f1 * self.rz,
            zz: f2 * self.z * self.z + f1 * self.zz,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.compose(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let x = self.v;
                let nf = n as f64;
                self.compose(x.powi(n), nf * x.powi(n - 1), nf * (nf - 1.0) * x.powi(n - 2))
            }
        }
    }

    pub fn scale(self, k: f64) -> Self {
        Jet2 {
            v: k * self.v,
            r: k * self.r,
            z: k * self.z,
            rr: k * self.rr,
            rz: k * self.rz,
            zz: k * self.zz,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            r: self.r + o.r,
            z: self.z + o.z,
            rr: self.rr + o.rr,
            rz: self.rz + o.rz,
            zz: self.zz + o.zz,
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            r: self.r * o.v + self.v * o.r,
            z: self.z * o.v + self.v * o.z,
            rr: self.rr * o.v + 2.0 * self.r * o.r + self.v * o.rr,
            rz: self.rz * o.v + self.r * o.z + self.z * o.r + self.v * o.rz,
            zz: self.zz * o.v + 2.0 * self.z * o.z + self.v * o.zz,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}
