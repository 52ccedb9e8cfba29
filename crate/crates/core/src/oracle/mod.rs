//! Floating-point falsification checks for the analytic identities the
//! profile equations rely on:
//!
//! * conjugation: `B(f/ρ²) = ρ^{-2} (∂_ρρ - ρ^{-1}∂_ρ + ∂_ζζ) f` with
//!   `B = ∂_ρρ + (3/ρ)∂_ρ + ∂_ζζ`;
//! * the velocity `u^ρ = -ρ^{-3}∂_ζψ`, `u^ζ = ρ^{-3}∂_ρψ` is divergence free
//!   for the 5D operator `∂_ρ u^ρ + (3/ρ) u^ρ + ∂_ζ u^ζ`;
//! * the axis boundary term `∫ ρ³ ∂_ρW φ dζ` at `ρ = ε` decays like `ε⁴` when
//!   `W = O(ρ²)`;
//! * self-similar reconstruction `‖ω(t)‖ = ω̄/(T* - t)` and the logarithmic
//!   divergence of `∫ ‖ω‖ dt`.
//!
//! Nothing here is a certificate: these are plain `f64` computations.

mod grid;
mod jet;

use rayon::prelude::*;

pub use grid::{GridField, MeridionalGrid};
pub use jet::Jet2;

use crate::error::{Error, Result};

/// A closed-form function of `(ρ, ζ)` evaluated on jets.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    pub f: fn(Jet2, Jet2) -> Jet2,
}

impl TestFunction {
    pub fn jet(&self, rho: f64, zeta: f64) -> Jet2 {
        (self.f)(Jet2::rho(rho), Jet2::zeta(zeta))
    }

    pub fn value(&self, rho: f64, zeta: f64) -> f64 {
        (self.f)(Jet2::constant(rho), Jet2::constant(zeta)).v
    }

    /// `ρ² ζ`: both sides of the conjugation identity vanish.
    pub fn rho2_zeta() -> Self {
        TestFunction { name: "rho^2*zeta", f: |r, z| r * r * z }
    }

    /// `ρ⁴`: both sides of the conjugation identity equal 8.
    pub fn rho4() -> Self {
        TestFunction { name: "rho^4", f: |r, _| r.powi(4) }
    }

    /// `ρ³ e^{-ρ²-ζ²}`.
    pub fn gaussian() -> Self {
        TestFunction { name: "rho^3*exp(-rho^2-zeta^2)", f: |r, z| r.powi(3) * (-(r * r) - z * z).exp() }
    }

    /// `ρ² e^{-ρ²-ζ²}`, vanishing to second order on the axis.
    pub fn axis_conforming() -> Self {
        TestFunction { name: "rho^2*exp(-rho^2-zeta^2)", f: |r, z| r * r * (-(r * r) - z * z).exp() }
    }

    /// `ρ e^{-ζ²}`, only first order on the axis.
    pub fn axis_nonconforming() -> Self {
        TestFunction { name: "rho*exp(-zeta^2)", f: |r, z| r * (-(z * z)).exp() }
    }

    pub fn zero() -> Self {
        TestFunction { name: "0", f: |_, _| Jet2::constant(0.0) }
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name)
    }
}

/// The three conjugation test cases.
pub fn conjugation_cases() -> [TestFunction; 3] {
    [TestFunction::rho2_zeta(), TestFunction::rho4(), TestFunction::gaussian()]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivatives {
    /// Exact derivatives from jets.
    Jets,
    /// Second-order central differences of sampled values.
    CentralDifferences,
}

#[derive(Clone, Debug)]
pub struct ConjugationReport {
    pub function: &'static str,
    pub method: Derivatives,
    /// `max |lhs - rhs|` over the nodes checked.
    pub max_abs: f64,
    /// Largest sum of term magnitudes over the nodes checked.
    pub scale: f64,
    /// `max_abs / scale`.
    pub relative: f64,
    pub nodes: usize,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Per-node `(|lhs - rhs|, term scale)`.
fn conjugation_terms(
    f: &TestFunction,
    grid: &MeridionalGrid,
    method: Derivatives,
) -> Vec<Vec<Option<(f64, f64)>>> {
    let (nr, nz) = (grid.n_rho(), grid.n_zeta());
    let sampled = match method {
        Derivatives::CentralDifferences => Some(
            grid.sample("f", |r, z| f.value(r, z)).expect("test functions are finite on the grid"),
        ),
        Derivatives::Jets => None,
    };
    let (hr, hz) = (grid.h_rho(), grid.h_zeta());
    (0..nr)
        .into_par_iter()
        .map(|i| {
            (0..nz)
                .map(|k| {
                    let rho = grid.rho(i);
                    let (f_r, f_rr, f_zz, g_r, g_rr, g_zz) = match &sampled {
                        None => {
                            let fj = f.jet(rho, grid.zeta(k));
                            let gj = fj / (Jet2::rho(rho) * Jet2::rho(rho));
                            (fj.r, fj.rr, fj.zz, gj.r, gj.rr, gj.zz)
                        }
                        Some(s) => {
                            if i == 0 || k == 0 || i + 1 == nr || k + 1 == nz {
                                return None;
                            }
                            let fv = |a: usize, b: usize| s.get(a, b);
                            let gv = |a: usize, b: usize| s.get(a, b) / (grid.rho(a) * grid.rho(a));
                            (
                                (fv(i + 1, k) - fv(i - 1, k)) / (2.0 * hr),
                                (fv(i + 1, k) - 2.0 * fv(i, k) + fv(i - 1, k)) / (hr * hr),
                                (fv(i, k + 1) - 2.0 * fv(i, k) + fv(i, k - 1)) / (hz * hz),
                                (gv(i + 1, k) - gv(i - 1, k)) / (2.0 * hr),
                                (gv(i + 1, k) - 2.0 * gv(i, k) + gv(i - 1, k)) / (hr * hr),
                                (gv(i, k + 1) - 2.0 * gv(i, k) + gv(i, k - 1)) / (hz * hz),
                            )
                        }
                    };
                    let r2 = rho * rho;
                    let lhs = g_rr + 3.0 * g_r / rho + g_zz;
                    let rhs = (f_rr - f_r / rho + f_zz) / r2;
                    let scale = g_rr.abs()
                        + (3.0 * g_r / rho).abs()
                        + g_zz.abs()
                        + (f_rr.abs() + (f_r / rho).abs() + f_zz.abs()) / r2;
                    Some(((lhs - rhs).abs(), scale))
                })
                .collect()
        })
        .collect()
}

/// Compare both sides of the conjugation identity on the grid.
pub fn check_conjugation(
    f: &TestFunction,
    grid: &MeridionalGrid,
    method: Derivatives,
) -> Result<ConjugationReport> {
    let terms = conjugation_terms(f, grid, method);
    let (mut max_abs, mut scale, mut nodes) = (0.0f64, 0.0f64, 0usize);
    for (d, s) in terms.iter().flatten().flatten() {
        max_abs = max_abs.max(*d);
        scale = scale.max(*s);
        nodes += 1;
    }
    Ok(ConjugationReport {
        function: f.name,
        method,
        max_abs,
        scale,
        relative: ratio(max_abs, scale),
        nodes,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ConvergenceReport {
    /// Largest central-difference discrepancy on the coarse grid.
    pub coarse: f64,
    /// Largest discrepancy of the refined grid at the same physical nodes.
    pub fine: f64,
    /// `coarse / fine`; 4 for a second-order scheme.
    pub ratio: f64,
}

/// Halve the spacing and compare central-difference discrepancies at the
/// nodes both grids share.
pub fn conjugation_convergence(f: &TestFunction, grid: &MeridionalGrid) -> Result<ConvergenceReport> {
    let fine_grid = grid.refine();
    let coarse = conjugation_terms(f, grid, Derivatives::CentralDifferences);
    let fine = conjugation_terms(f, &fine_grid, Derivatives::CentralDifferences);
    let (mut c_max, mut f_max) = (0.0f64, 0.0f64);
    for (i, row) in coarse.iter().enumerate() {
        for (k, cell) in row.iter().enumerate() {
            if let Some((d, _)) = cell {
                c_max = c_max.max(*d);
                let (fd, _) = fine[2 * i][2 * k].expect("shared node is interior on the fine grid");
                f_max = f_max.max(fd);
            }
        }
    }
    if f_max == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "`{}` has no discretization error to measure",
            f.name
        )));
    }
    Ok(ConvergenceReport { coarse: c_max, fine: f_max, ratio: c_max / f_max })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivergenceScheme {
    /// `ρ^{-3}[∂_ρ(ρ³u^ρ) + ∂_ζ(ρ³u^ζ)]`, with `ρ³u^ρ = -∂_ζψ` and
    /// `ρ³u^ζ = ∂_ρψ` differenced directly: the mixed differences cancel, so
    /// the result vanishes to rounding for every `ψ`.
    Conservative,
    /// `∂_ρu^ρ + (3/ρ)u^ρ + ∂_ζu^ζ` from the differenced velocity; carries an
    /// `O(h²)` truncation error.
    Pointwise,
}

#[derive(Clone, Debug)]
pub struct DivergenceReport {
    pub scheme: DivergenceScheme,
    pub max_abs: f64,
    /// Largest single term of the divergence.
    pub max_term: f64,
    /// `max_abs / max_term`.
    pub relative: f64,
    pub u_rho: GridField,
    pub u_zeta: GridField,
}

/// Velocity from the stream function and the maximum of its divergence over
/// nodes two away from the boundary. Velocity values on the outer ring use
/// one-sided differences.
pub fn check_divergence(
    psi: &GridField,
    grid: &MeridionalGrid,
    scheme: DivergenceScheme,
) -> Result<DivergenceReport> {
    if !psi.fits(grid) {
        return Err(Error::InvalidParameter(format!("field `{}` does not match the grid", psi.name())));
    }
    let (nr, nz) = (grid.n_rho(), grid.n_zeta());
    let (hr, hz) = (grid.h_rho(), grid.h_zeta());
    let d_rho = |i: usize, k: usize| {
        if i == 0 {
            (psi.get(1, k) - psi.get(0, k)) / hr
        } else if i + 1 == nr {
            (psi.get(i, k) - psi.get(i - 1, k)) / hr
        } else {
            (psi.get(i + 1, k) - psi.get(i - 1, k)) / (2.0 * hr)
        }
    };
    let d_zeta = |i: usize, k: usize| {
        if k == 0 {
            (psi.get(i, 1) - psi.get(i, 0)) / hz
        } else if k + 1 == nz {
            (psi.get(i, k) - psi.get(i, k - 1)) / hz
        } else {
            (psi.get(i, k + 1) - psi.get(i, k - 1)) / (2.0 * hz)
        }
    };
    // Fluxes ρ³u^ρ and ρ³u^ζ.
    let mut flux_rho = vec![0.0; nr * nz];
    let mut flux_zeta = vec![0.0; nr * nz];
    for i in 0..nr {
        for k in 0..nz {
            flux_rho[i * nz + k] = -d_zeta(i, k);
            flux_zeta[i * nz + k] = d_rho(i, k);
        }
    }
    let cube = |i: usize| grid.rho(i).powi(3);
    let u_rho: Vec<f64> = (0..nr * nz).map(|p| flux_rho[p] / cube(p / nz)).collect();
    let u_zeta: Vec<f64> = (0..nr * nz).map(|p| flux_zeta[p] / cube(p / nz)).collect();

    let rows: Vec<(f64, f64)> = (2..nr.saturating_sub(2))
        .into_par_iter()
        .map(|i| {
            let (mut worst, mut term) = (0.0f64, 0.0f64);
            for k in 2..nz - 2 {
                let at = |v: &[f64], a: usize, b: usize| v[a * nz + b];
                let parts: Vec<f64> = match scheme {
                    DivergenceScheme::Conservative => {
                        let r3 = cube(i);
                        vec![
                            (at(&flux_rho, i + 1, k) - at(&flux_rho, i - 1, k)) / (2.0 * hr) / r3,
                            (at(&flux_zeta, i, k + 1) - at(&flux_zeta, i, k - 1)) / (2.0 * hz) / r3,
                        ]
                    }
                    DivergenceScheme::Pointwise => vec![
                        (at(&u_rho, i + 1, k) - at(&u_rho, i - 1, k)) / (2.0 * hr),
                        3.0 * at(&u_rho, i, k) / grid.rho(i),
                        (at(&u_zeta, i, k + 1) - at(&u_zeta, i, k - 1)) / (2.0 * hz),
                    ],
                };
                let div: f64 = parts.iter().sum();
                worst = worst.max(div.abs());
                term = parts.iter().fold(term, |m, p| m.max(p.abs()));
            }
            (worst, term)
        })
        .collect();
    let max_abs = rows.iter().fold(0.0f64, |m, r| m.max(r.0));
    let max_term = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    Ok(DivergenceReport {
        scheme,
        max_abs,
        max_term,
        relative: ratio(max_abs, max_term),
        u_rho: GridField::new("u_rho", grid, u_rho)?,
        u_zeta: GridField::new("u_zeta", grid, u_zeta)?,
    })
}

/// Half-width of the `ζ` interval for the axis boundary integral.
pub const AXIS_ZETA_HALF_WIDTH: f64 = 8.0;
/// Required decay exponent for the axis term, and the slack allowed.
pub const AXIS_EXPONENT: f64 = 4.0;
pub const AXIS_TOLERANCE: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct AxisReport {
    /// `(ε, ∫ ε³ ∂_ρW(ε, ζ) φ(ζ) dζ)`.
    pub terms: Vec<(f64, f64)>,
    /// Least-squares log-log slope; `None` when every term is zero.
    pub exponent: Option<f64>,
    pub passes: bool,
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.abs().ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Evaluate the axis boundary term for each `ε` and fit its decay exponent.
pub fn check_axis_vanishing(
    w: &TestFunction,
    phi: fn(f64) -> f64,
    epsilons: &[f64],
) -> Result<AxisReport> {
    if epsilons.len() < 2 || epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidParameter("need at least two positive epsilons".into()));
    }
    if epsilons.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::InvalidParameter("epsilons must be strictly decreasing".into()));
    }
    let z = AXIS_ZETA_HALF_WIDTH;
    let terms: Vec<(f64, f64)> = epsilons
        .iter()
        .map(|&eps| {
            let integral = simpson(|zeta| w.jet(eps, zeta).r * phi(zeta), -z, z, 4096);
            (eps, eps.powi(3) * integral)
        })
        .collect();
    let nonzero: Vec<(f64, f64)> = terms.iter().copied().filter(|t| t.1 != 0.0).collect();
    let exponent = (nonzero.len() >= 2).then(|| loglog_slope(&nonzero));
    let passes = match exponent {
        Some(e) => e >= AXIS_EXPONENT - AXIS_TOLERANCE,
        None => nonzero.is_empty(),
    };
    Ok(AxisReport { terms, exponent, passes })
}

#[derive(Clone, Copy, Debug)]
pub struct BkmSample {
    pub epsilon: f64,
    /// `ω̄ · ln(T*/ε)`.
    pub closed_form: f64,
    /// Gauss-Legendre value of `∫_0^{T*-ε} ω̄/(T* - t) dt`.
    pub quadrature: f64,
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    /// `(t, ‖ω(t)‖)`.
    pub norms: Vec<(f64, f64)>,
    /// `(T* - t)·‖ω(t)‖` at each time.
    pub products: Vec<f64>,
    /// `(max - min) / ω̄` over the products.
    pub product_spread: f64,
    pub bkm: Vec<BkmSample>,
    /// Partial integrals increase as `ε` decreases, by `ω̄ ln(ε_prev/ε)`.
    pub diverging: bool,
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `∫_ε^{T} ds / s` on geometric panels of ratio 1.1.
fn log_integral(eps: f64, t_star: f64) -> f64 {
    let mut a = eps;
    let mut total = 0.0;
    while a < t_star {
        let b = (a * 1.1).min(t_star);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        total += h * GAUSS5.iter().map(|(x, w)| w / (c + h * x)).sum::<f64>();
        a = b;
    }
    total
}

pub fn check_reconstruction_scaling(
    omega_sup: f64,
    t_star: f64,
    times: &[f64],
    epsilons: &[f64],
) -> Result<ReconstructionReport> {
    if !(omega_sup.is_finite() && omega_sup > 0.0) || !(t_star.is_finite() && t_star > 0.0) {
        return Err(Error::InvalidParameter("omega_sup and T* must be positive".into()));
    }
    if let Some(t) = times.iter().find(|&&t| !(t < t_star)) {
        return Err(Error::InvalidParameter(format!("time {t} is not before T* = {t_star}")));
    }
    if let Some(e) = epsilons.iter().find(|&&e| !(e > 0.0 && e < t_star)) {
        return Err(Error::InvalidParameter(format!("epsilon {e} must lie in (0, T*)")));
    }
    let norms: Vec<(f64, f64)> = times.iter().map(|&t| (t, omega_sup / (t_star - t))).collect();
    let products: Vec<f64> = norms.iter().map(|&(t, n)| (t_star - t) * n).collect();
    let (lo, hi) = products
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    let product_spread = if products.is_empty() { 0.0 } else { (hi - lo) / omega_sup };
    let bkm: Vec<BkmSample> = epsilons
        .iter()
        .map(|&eps| BkmSample {
            epsilon: eps,
            closed_form: omega_sup * (t_star / eps).ln(),
            quadrature: omega_sup * log_integral(eps, t_star),
        })
        .collect();
    let diverging = bkm.windows(2).all(|p| {
        let expected = omega_sup * (p[0].epsilon / p[1].epsilon).ln();
        let step = p[1].closed_form - p[0].closed_form;
        p[1].epsilon < p[0].epsilon && step > 0.0 && (step - expected).abs() <= 1e-9 * expected
    });
    Ok(ReconstructionReport { norms, products, product_spread, bkm, diverging })
}
