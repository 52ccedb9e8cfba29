//! Uniform grids on the meridional half-plane `ρ > 0`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MeridionalGrid {
    rho_min: f64,
    rho_max: f64,
    zeta_min: f64,
    zeta_max: f64,
    n_rho: usize,
    n_zeta: usize,
}

impl MeridionalGrid {
    pub fn new(
        rho: (f64, f64),
        zeta: (f64, f64),
        n_rho: usize,
        n_zeta: usize,
    ) -> Result<Self> {
        let finite = [rho.0, rho.1, zeta.0, zeta.1].iter().all(|x| x.is_finite());
        if !finite || rho.0 >= rho.1 || zeta.0 >= zeta.1 {
            return Err(Error::InvalidParameter(format!("bad grid bounds {rho:?} x {zeta:?}")));
        }
        if rho.0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid must exclude the axis, got rho_min = {}",
                rho.0
            )));
        }
        if n_rho < 5 || n_zeta < 5 {
            return Err(Error::InvalidParameter("grid needs at least 5 nodes per axis".into()));
        }
        Ok(MeridionalGrid {
            rho_min: rho.0,
            rho_max: rho.1,
            zeta_min: zeta.0,
            zeta_max: zeta.1,
            n_rho,
            n_zeta,
        })
    }

    /// `n × n` nodes on `[0.1, 6] × [-6, 6]`.
    pub fn square(n: usize) -> Result<Self> {
        Self::new((0.1, 6.0), (-6.0, 6.0), n, n)
    }

    pub fn n_rho(&self) -> usize {
        self.n_rho
    }

    pub fn n_zeta(&self) -> usize {
        self.n_zeta
    }

    pub fn h_rho(&self) -> f64 {
        (self.rho_max - self.rho_min) / (self.n_rho - 1) as f64
    }

    pub fn h_zeta(&self) -> f64 {
        (self.zeta_max - self.zeta_min) / (self.n_zeta - 1) as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho_min + i as f64 * self.h_rho()
    }

    pub fn zeta(&self, k: usize) -> f64 {
        self.zeta_min + k as f64 * self.h_zeta()
    }

    /// Same bounds, spacing halved: node `(i, k)` becomes `(2i, 2k)`.
    pub fn refine(&self) -> Self {
        MeridionalGrid { n_rho: 2 * self.n_rho - 1, n_zeta: 2 * self.n_zeta - 1, ..self.clone() }
    }

    pub fn sample(&self, name: &str, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        let mut values = Vec::with_capacity(self.n_rho * self.n_zeta);
        for i in 0..self.n_rho {
            for k in 0..self.n_zeta {
                values.push(f(self.rho(i), self.zeta(k)));
            }
        }
        GridField::new(name, self, values)
    }
}

impl Default for MeridionalGrid {
    fn default() -> Self {
        Self::square(256).expect("default grid is valid")
    }
}

/// Values on the nodes of a grid, indexed `(i_rho, k_zeta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    name: String,
    n_rho: usize,
    n_zeta: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(name: &str, grid: &MeridionalGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_rho * grid.n_zeta {
            return Err(Error::InvalidParameter(format!(
                "field `{name}` has {} values for a {}x{} grid",
                values.len(),
                grid.n_rho,
                grid.n_zeta
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "field `{name}` is not finite at node {pos}"
            )));
        }
        Ok(GridField { name: name.to_string(), n_rho: grid.n_rho, n_zeta: grid.n_zeta, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.n_zeta + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fits(&self, grid: &MeridionalGrid) -> bool {
        self.n_rho == grid.n_rho && self.n_zeta == grid.n_zeta
    }

    /// Whitespace-delimited `rho zeta value` rows for plotting.
    pub fn to_delimited(&self, grid: &MeridionalGrid) -> String {
        let mut out = format!("# rho zeta {}\n", self.name);
        for i in 0..self.n_rho {
            for k in 0..self.n_zeta {
                let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", grid.rho(i), grid.zeta(k), self.get(i, k));
            }
        }
        out
    }
}
