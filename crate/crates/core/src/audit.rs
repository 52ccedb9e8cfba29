//! End-to-end audit of a profile certificate.
//!
//! Stages run in order: residual, inverse, tail coercivity, Lipschitz
//! constants, torus transfer, then the local and torus closures. A stage
//! takes a constant from the certificate when it is declared and computes it
//! otherwise; every result line says which. Cross-checks that are cheap and
//! model independent (coercivity gap, recovery mapping constant, lattice
//! overlap) always run and must support the declared values.
//!
//! The log is a list of `[TAG] text` lines with `--- TITLE ---` section
//! headers, ending in exactly one `[STATUS]` line.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::basis::{BasisModel, ReferenceModel, RECOVERY_KERNEL_CAP};
use crate::certificate::{load_certificate, ConstantName, ProfileCertificate};
use crate::closure::{nk_closure, torus_closure, transfer_error};
use crate::constants::{convolution_constant, lipschitz_constant, recovery_mapping_constant};
use crate::interval::{Interval, PRECISION_BITS};
use crate::operator::{assemble_jacobian, OperatorConfig};
use crate::published;
use crate::residual::certify_residual;
use crate::spectral::WeightedSpace;
use crate::stability::{certify_inverse, certify_tail_coercivity};

pub const PROGRAM_ID: &str = "NS_GHOST_SPIKE_AUDIT_v1.0";
/// Text after `[EXEC] ` on the only line allowed to differ between runs.
pub const TIMESTAMP_PREFIX: &str = "started unix_time=";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tag {
    Exec,
    Prec,
    Task,
    Step,
    Rslt,
    Calc,
    Verdict,
    Status,
}

impl Tag {
    pub const ALL: [Tag; 8] =
        [Tag::Exec, Tag::Prec, Tag::Task, Tag::Step, Tag::Rslt, Tag::Calc, Tag::Verdict, Tag::Status];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Exec => "EXEC",
            Tag::Prec => "PREC",
            Tag::Task => "TASK",
            Tag::Step => "STEP",
            Tag::Rslt => "RSLT",
            Tag::Calc => "CALC",
            Tag::Verdict => "VERDICT",
            Tag::Status => "STATUS",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Section(String),
    Line(Tag, String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditLog {
    records: Vec<Record>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tag: Tag, text: impl Into<String>) {
        self.records.push(Record::Line(tag, text.into()));
    }

    pub fn section(&mut self, title: impl Into<String>) {
        self.records.push(Record::Section(title.into()));
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// Text of the tagged lines with `tag`.
    pub fn lines(&self, tag: Tag) -> impl Iterator<Item = &str> {
        self.records.iter().filter_map(move |r| match r {
            Record::Line(t, text) if *t == tag => Some(text.as_str()),
            _ => None,
        })
    }

    pub fn status(&self) -> Option<&str> {
        self.lines(Tag::Status).last()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            match r {
                Record::Section(title) => {
                    out.push('\n');
                    out.push_str(&format!("--- {title} ---\n"));
                }
                Record::Line(tag, text) => out.push_str(&format!("[{}] {text}\n", tag.as_str())),
            }
        }
        out
    }

    /// Rendering with the timestamp line removed.
    pub fn render_deterministic(&self) -> String {
        let mut copy = self.clone();
        copy.records.retain(
            |r| !matches!(r, Record::Line(Tag::Exec, text) if text.starts_with(TIMESTAMP_PREFIX)),
        );
        copy.render()
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut log = AuditLog::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if let Some(title) = line.strip_prefix("--- ").and_then(|l| l.strip_suffix(" ---")) {
                log.section(title);
                continue;
            }
            let parsed = line.strip_prefix('[').and_then(|rest| rest.split_once("] ")).and_then(
                |(tag, body)| Tag::ALL.into_iter().find(|t| t.as_str() == tag).map(|t| (t, body)),
            );
            match parsed {
                Some((tag, body)) => log.push(tag, body),
                None => return Err(format!("line {}: not an audit record: {line}", n + 1)),
            }
        }
        Ok(log)
    }

    /// Exactly one STATUS line, last, with at least one VERDICT before it.
    pub fn validate(&self) -> Result<(), String> {
        let statuses = self.lines(Tag::Status).count();
        if statuses != 1 {
            return Err(format!("expected exactly one STATUS line, found {statuses}"));
        }
        match self.records.last() {
            Some(Record::Line(Tag::Status, _)) => {}
            _ => return Err("STATUS is not the last line".into()),
        }
        if self.lines(Tag::Verdict).count() == 0 {
            return Err("no VERDICT precedes STATUS".into());
        }
        Ok(())
    }
}

impl fmt::Display for AuditLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Declared,
    Computed,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Declared => "declared",
            Provenance::Computed => "computed",
        })
    }
}

#[derive(Clone)]
pub struct AuditConfig {
    pub model: Arc<dyn BasisModel>,
    /// Overrides the certificate's viscosity.
    pub nu: Option<Interval>,
    /// Galerkin truncation; defaults to the certificate's largest mode.
    pub truncation: Option<usize>,
    /// Interaction-envelope constant used when the certificate declares none.
    pub c_prof: Interval,
    /// First tail mode; defaults to `max(1200, N + 1)`.
    pub j_min: Option<usize>,
    pub window: usize,
    /// Radius of the source space.
    pub tau_prime: Interval,
    pub projector_bound: Interval,
    pub pressure_factor: Interval,
    pub lattice_radius: usize,
    /// Emit a `started unix_time=` line.
    pub timestamp: Option<u64>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            model: Arc::new(ReferenceModel::new(0, 1.0).expect("finite coupling")),
            nu: None,
            truncation: None,
            c_prof: Interval::from_decimal("0.125").expect("literal"),
            j_min: None,
            window: 2048,
            tau_prime: WeightedSpace::source().tau(),
            projector_bound: Interval::ONE,
            pressure_factor: Interval::ONE,
            lattice_radius: 3,
            timestamp: None,
        }
    }
}

impl fmt::Debug for AuditConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AuditConfig")
            .field("model", &self.model.name())
            .field("nu", &self.nu)
            .field("truncation", &self.truncation)
            .field("c_prof", &self.c_prof)
            .field("j_min", &self.j_min)
            .field("window", &self.window)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub struct AuditOutcome {
    pub log: AuditLog,
    pub verified: bool,
    /// 0 verified, 1 verification failed, 2 unreadable certificate.
    pub exit_code: i32,
}

/// Seven significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn sci_iv(x: Interval) -> String {
    format!("[{}, {}]", sci(x.lo()), sci(x.hi()))
}

struct Auditor {
    log: AuditLog,
    failures: Vec<String>,
    sources: BTreeSet<(Provenance, &'static str)>,
}

impl Auditor {
    fn step(&mut self, text: impl Into<String>) {
        self.log.push(Tag::Step, text);
    }

    fn calc(&mut self, text: impl Into<String>) {
        self.log.push(Tag::Calc, text);
    }

    fn result(&mut self, name: &'static str, relation: &str, value: f64, p: Provenance) {
        self.sources.insert((p, name));
        self.log.push(Tag::Rslt, format!("{name} {relation} {} ({p})", sci(value)));
    }

    fn fail(&mut self, reason: impl Into<String>) {
        let reason = reason.into();
        self.log.push(Tag::Step, format!("FAILED: {reason}"));
        self.failures.push(reason);
    }
}

/// Load `path` and audit it; unreadable certificates give exit code 2.
pub fn run_audit_file(path: impl AsRef<Path>, cfg: &AuditConfig) -> AuditOutcome {
    match load_certificate(path) {
        Ok(cert) => run_audit(&cert, cfg),
        Err(e) => {
            let mut log = AuditLog::new();
            log.push(Tag::Exec, PROGRAM_ID);
            log.push(Tag::Status, format!("VERIFICATION FAILED: certificate rejected: {e}"));
            AuditOutcome { log, verified: false, exit_code: 2 }
        }
    }
}

pub fn run_audit(cert: &ProfileCertificate, cfg: &AuditConfig) -> AuditOutcome {
    let mut a = Auditor { log: AuditLog::new(), failures: Vec::new(), sources: BTreeSet::new() };
    a.log.push(Tag::Exec, PROGRAM_ID);
    if let Some(t) = cfg.timestamp {
        a.log.push(Tag::Exec, format!("{TIMESTAMP_PREFIX}{t}"));
    }
    a.log.push(
        Tag::Prec,
        format!("{PRECISION_BITS}-bit interval arithmetic (binary64 endpoints, outward rounding)"),
    );
    let nu = cfg.nu.unwrap_or(cert.nu().enclosure());
    let n = cfg.truncation.unwrap_or(cert.max_mode());
    let tau = cert.tau().value();
    let nu_text = match cfg.nu {
        Some(v) => v.mid().to_string(),
        None => cert.nu().mid().text().to_string(),
    };
    a.log.push(
        Tag::Task,
        format!(
            "Computing ||G(Omega_app, nu={nu_text})|| in X(s=6, tau={}), N={n}, model={}",
            cert.tau().text(),
            cfg.model.name()
        ),
    );

    let spaces = WeightedSpace::new(6.0, tau).and_then(|x| Ok((x, WeightedSpace::new(7.0, cfg.tau_prime)?)));
    let op = OperatorConfig::new(cfg.model.clone(), nu, n);
    let (x, y, op) = match (spaces, op) {
        (Ok((x, y)), Ok(op)) => (x, y, op),
        (Err(e), _) | (_, Err(e)) => {
            a.fail(format!("configuration rejected: {e}"));
            return finish(a);
        }
    };

    let delta = residual_stage(&mut a, cert, &op, &x);
    let m = inverse_stage(&mut a, cert, &op);
    coercivity_stage(&mut a, cert, cfg, nu, n, &x);
    let k = lipschitz_stage(&mut a, cert, cfg, &op, &x, &y);
    let eps = transfer_stage(&mut a, cert, cfg);
    closure_stage(&mut a, cert, delta, m, k, eps);
    finish(a)
}

fn residual_stage(
    a: &mut Auditor,
    cert: &ProfileCertificate,
    op: &OperatorConfig,
    x: &WeightedSpace,
) -> Option<Interval> {
    a.log.section("RESIDUAL ENCLOSURE (delta)");
    if let Some(d) = cert.constant(ConstantName::Delta) {
        a.step(format!("delta taken from the certificate: {}", sci_iv(d)));
        a.result("delta", "=", d.hi(), Provenance::Declared);
        return Some(d);
    }
    let n = op.truncation();
    match certify_residual(cert, op, x) {
        Ok(r) => {
            a.step(format!("Finite modes j=[1, {n}]: {}", sci_iv(r.delta_fin)));
            a.step(format!("Tail modes j=[{}, {}]: {}", n + 1, 2 * n, sci_iv(r.delta_tail)));
            a.step(format!(
                "Quadrature error: {} (exact tensor contraction, no quadrature)",
                sci_iv(r.quadrature)
            ));
            a.result("delta", "=", r.delta.hi(), Provenance::Computed);
            Some(r.delta)
        }
        Err(e) => {
            a.fail(format!("residual enclosure: {e}"));
            None
        }
    }
}

fn inverse_stage(
    a: &mut Auditor,
    cert: &ProfileCertificate,
    op: &OperatorConfig,
) -> Option<Interval> {
    a.log.section("STABILITY ENCLOSURE (M)");
    if let Some(m) = cert.constant(ConstantName::M) {
        a.step(format!("M taken from the certificate: {}", sci_iv(m)));
        a.result("M", "=", m.hi(), Provenance::Declared);
        return Some(m);
    }
    let n = op.truncation();
    let jac = match assemble_jacobian(cert.coefficients(), op) {
        Ok(j) => j,
        Err(e) => {
            a.fail(format!("Jacobian assembly: {e}"));
            return None;
        }
    };
    a.step(format!("Jacobian J construction: {n}x{n} interval matrix"));
    a.step("Approximate inverse R: midpoint(J)^-1");
    match certify_inverse(&jac) {
        Ok(rep) if rep.verified => {
            a.step(format!("Rump check ||I - R*J||: {} (verified < 1)", sci(rep.e_norm.hi())));
            a.step(format!("||R||: {}", sci(rep.r_norm.hi())));
            a.result("M", "=", rep.m.hi(), Provenance::Computed);
            Some(rep.m)
        }
        Ok(rep) => {
            let why = rep.diagnostic.unwrap_or_default();
            a.fail(format!("inverse not certified: {why}"));
            None
        }
        Err(e) => {
            a.fail(format!("inverse: {e}"));
            None
        }
    }
}

fn coercivity_stage(
    a: &mut Auditor,
    cert: &ProfileCertificate,
    cfg: &AuditConfig,
    nu: Interval,
    n: usize,
    x: &WeightedSpace,
) {
    a.log.section("TAIL COERCIVITY (gamma)");
    let (c_prof, origin) = match cert.constant(ConstantName::CProf) {
        Some(c) => {
            a.sources.insert((Provenance::Declared, "C_prof"));
            (c, "declared")
        }
        None => (cfg.c_prof, "configured"),
    };
    a.step(format!("Interaction envelope constant C_prof = {} ({origin})", sci(c_prof.hi())));
    let j_min = cfg.j_min.unwrap_or(1200.max(n + 1));
    let rep = match certify_tail_coercivity(cert, nu, n, c_prof, j_min, cfg.window, x.tau()) {
        Ok(r) => r,
        Err(e) => {
            a.fail(format!("tail coercivity: {e}"));
            return;
        }
    };
    a.step(format!(
        "Window j=[{}, {}]: min(nu*j^2 - Inter_j) in {} at j={}",
        rep.j_min,
        rep.j_max,
        sci_iv(rep.gamma),
        rep.argmin
    ));
    a.step(format!(
        "Ratio test ((J+1)/J)^3.5 * e^-tau < 1 at J={}: {}",
        rep.j_max,
        if rep.monotone_tail_verified { "verified" } else { "FAILED" }
    ));
    a.result("gamma", ">=", rep.gamma.lo(), Provenance::Computed);
    if !rep.verified {
        a.fail("tail coercivity gap not certified positive");
    }
    if let Some(declared) = cert.constant(ConstantName::Gamma) {
        a.sources.insert((Provenance::Declared, "gamma"));
        if rep.gamma.lo() >= declared.hi() {
            a.calc(format!(
                "declared gamma >= {} is implied by the computed bound {}",
                sci(declared.hi()),
                sci(rep.gamma.lo())
            ));
        } else {
            a.fail(format!(
                "declared gamma >= {} exceeds the computed bound {}",
                sci(declared.hi()),
                sci(rep.gamma.lo())
            ));
        }
    }
    a.step("Finite-block M and tail gamma are reported separately; no combined bound is formed");
}

/// Accept a declared upper-bound constant only if the computed value does
/// not exceed it.
fn check_upper(a: &mut Auditor, name: &str, declared: Interval, computed: Interval) {
    if computed.hi() <= declared.hi() {
        a.calc(format!(
            "declared {name} = {} bounds the computed {}",
            sci(declared.hi()),
            sci(computed.hi())
        ));
    } else {
        a.fail(format!(
            "declared {name} = {} is below the computed {}",
            sci(declared.hi()),
            sci(computed.hi())
        ));
    }
}

fn lipschitz_stage(
    a: &mut Auditor,
    cert: &ProfileCertificate,
    cfg: &AuditConfig,
    op: &OperatorConfig,
    x: &WeightedSpace,
    y: &WeightedSpace,
) -> Option<Interval> {
    a.log.section("LIPSCHITZ CONSTANTS (K)");
    let n = op.truncation();
    let model = cfg.model.as_ref();

    // Kernel cap: the model's sup |K_rec(k)|/k^3.5 over the block.
    let mut ratio = Interval::ZERO;
    for k in 1..=n {
        let growth = match Interval::point(k as f64).powf(3.5) {
            Ok(g) => g,
            Err(e) => {
                a.fail(format!("kernel growth: {e}"));
                return None;
            }
        };
        ratio = ratio.max(&(model.recovery(k).abs() / growth));
    }
    a.step(format!("Model kernel ratio max_k |K_rec(k)|/k^3.5 = {}", sci(ratio.hi())));
    let cap = match cert.constant(ConstantName::CRecKer) {
        Some(c) => {
            a.result("C_rec_ker", "=", c.hi(), Provenance::Declared);
            if c.hi() > RECOVERY_KERNEL_CAP {
                a.fail(format!(
                    "declared C_rec_ker = {} exceeds the kernel cap {}",
                    sci(c.hi()),
                    sci(RECOVERY_KERNEL_CAP)
                ));
            }
            check_upper(a, "C_rec_ker", c, ratio);
            c
        }
        None => {
            a.result("C_rec_ker", "=", ratio.hi(), Provenance::Computed);
            if ratio.hi() > RECOVERY_KERNEL_CAP {
                a.fail(format!("model kernel ratio exceeds the cap {}", sci(RECOVERY_KERNEL_CAP)));
            }
            ratio
        }
    };

    let rec = match recovery_mapping_constant(x.tau(), y.tau(), cap) {
        Ok(r) => r,
        Err(e) => {
            a.fail(format!("recovery mapping constant: {e}"));
            return None;
        }
    };
    a.step(format!(
        "Recovery multiplier sup_k k^3.5 (1+k^2)^-0.5 e^-(tau'-tau)k = {} at k={} (scanned to k={})",
        sci_iv(rec.mapping),
        rec.argmax,
        rec.scan_limit
    ));
    a.step(format!("With the kernel cap: C_rec_ker * multiplier = {}", sci(rec.with_kernel_cap.hi())));
    let c_rec_map = match cert.constant(ConstantName::CRecMap) {
        Some(c) => {
            a.result("C_rec_map", "=", c.hi(), Provenance::Declared);
            check_upper(a, "C_rec_map", c, rec.mapping);
            if rec.with_kernel_cap.hi() > c.hi() {
                a.step(format!(
                    "Declared C_rec_map excludes the kernel cap; including it gives {}",
                    sci(rec.with_kernel_cap.hi())
                ));
            }
            c
        }
        None => {
            a.result("C_rec_map", "=", rec.mapping.hi(), Provenance::Computed);
            rec.mapping
        }
    };

    let c_conv = match cert.constant(ConstantName::CConv) {
        Some(c) => {
            a.result("C_conv", "=", c.hi(), Provenance::Declared);
            c
        }
        None => match convolution_constant(model, n, x, y) {
            Ok(c) => {
                a.result("C_conv", "=", c.hi(), Provenance::Computed);
                c
            }
            Err(e) => {
                a.fail(format!("convolution constant: {e}"));
                return None;
            }
        },
    };

    let declared_k = cert.constant(ConstantName::K);
    let rep = match lipschitz_constant(c_rec_map, c_conv, declared_k) {
        Ok(r) => r,
        Err(e) => {
            a.fail(format!("Lipschitz constant: {e}"));
            return None;
        }
    };
    a.calc(format!(
        "C_rec_map * C_conv = ({}) * ({}) = {}",
        sci(c_rec_map.hi()),
        sci(c_conv.hi()),
        sci(rep.product.hi())
    ));
    match declared_k {
        Some(k) => {
            a.result("K", "=", k.hi(), Provenance::Declared);
            if k.hi() >= rep.product.hi() {
                a.calc(format!("declared K >= C_rec_map * C_conv: {} >= {}", sci(k.hi()), sci(rep.product.hi())));
            } else {
                a.fail(format!(
                    "declared K = {} is below C_rec_map * C_conv = {}",
                    sci(k.hi()),
                    sci(rep.product.hi())
                ));
            }
            Some(k)
        }
        None => {
            a.result("K", "=", rep.k.hi(), Provenance::Computed);
            Some(rep.k)
        }
    }
}

fn transfer_stage(
    a: &mut Auditor,
    cert: &ProfileCertificate,
    cfg: &AuditConfig,
) -> Option<Interval> {
    a.log.section("TORUS TRANSFER (eps_T3)");
    let declared = cert.constant(ConstantName::EpsT3);
    let rep = match transfer_error(
        cert.sigma().value(),
        cfg.projector_bound,
        cfg.pressure_factor,
        cfg.lattice_radius,
        declared,
    ) {
        Ok(r) => r,
        Err(e) => {
            a.fail(format!("torus transfer: {e}"));
            return None;
        }
    };
    a.step(format!(
        "Nearest image exp(-pi^2/sigma^2) = 10^{:.3}",
        rep.overlap.nearest_image.log10().hi()
    ));
    if rep.overlap.total.is_zero() {
        a.step("Image sum over |n|_inf <= 0: empty");
    } else {
        a.step(format!(
            "Image sum over |n|_inf <= {} plus geometric tail <= 10^{:.3}",
            rep.overlap.explicit_radius,
            rep.overlap.total.log10().hi()
        ));
    }
    a.step(format!("eps_ov + eps_P + eps_p <= {}", sci(rep.eps_total.hi())));
    match (declared, rep.consistent_with_declared) {
        (Some(d), Some(true)) => {
            a.result("eps_T3", "=", d.hi(), Provenance::Declared);
            if !rep.overlap.total.is_zero() {
                let gap = d.hi().log10() - rep.overlap.total.log10().hi();
                a.step(format!(
                    "Declared eps_T3 exceeds the computed overlap bound by {gap:.0} orders of magnitude"
                ));
            }
            Some(d)
        }
        (Some(d), _) => {
            a.fail(format!(
                "declared eps_T3 = {} is below the computed bound {}",
                sci(d.hi()),
                sci(rep.eps_total.hi())
            ));
            None
        }
        (None, _) => {
            a.result("eps_T3", "<=", rep.eps_total.hi(), Provenance::Computed);
            Some(rep.eps_total)
        }
    }
}

fn matches_published(cert: &ProfileCertificate) -> bool {
    [ConstantName::Delta, ConstantName::M, ConstantName::K]
        .into_iter()
        .all(|c| cert.constant(c) == Some(published::constant(c)))
}

fn verdict_line(product: Interval) -> String {
    let rel = if product.hi() < 1.0 { "<" } else { ">=" };
    format!("{} {rel} {}", sci(product.hi()), sci(1.0))
}

fn closure_stage(
    a: &mut Auditor,
    cert: &ProfileCertificate,
    delta: Option<Interval>,
    m: Option<Interval>,
    k: Option<Interval>,
    eps: Option<Interval>,
) {
    a.log.section("NEWTON-KANTOROVICH CLOSURE");
    let (Some(delta), Some(m), Some(k)) = (delta, m, k) else {
        a.fail("closure skipped: delta, M or K unavailable");
        a.log.push(Tag::Verdict, "closure not evaluated");
        return;
    };
    a.step("2 * delta * M * K < 1");
    match nk_closure(delta, m, k) {
        Ok(r) => {
            a.calc(format!(
                "2 * ({}) * ({}) * ({}) = {}",
                sci(delta.hi()),
                sci(m.hi()),
                sci(k.hi()),
                sci(r.product.hi())
            ));
            if matches_published(cert) {
                a.calc(format!(
                    "Published closure figures disagree at the third digit: {} (summary), {} (published log), {} (exact product of the published constants)",
                    published::CLOSURE_STATED,
                    published::CLOSURE_LOGGED,
                    published::CLOSURE_EXACT
                ));
            }
            a.log.push(Tag::Verdict, verdict_line(r.product));
            if !r.verified {
                a.fail("2 * delta * M * K is not below 1");
            }
        }
        Err(e) => a.fail(format!("closure: {e}")),
    }

    a.log.section("TORUS CLOSURE");
    let Some(eps) = eps else {
        a.fail("torus closure skipped: eps_T3 unavailable");
        a.log.push(Tag::Verdict, "torus closure not evaluated");
        return;
    };
    a.step("2 * (delta + eps_T3) * M * K < 1");
    match torus_closure(delta, eps, m, k) {
        Ok(r) => {
            a.calc(format!(
                "2 * ({} + {}) * ({}) * ({}) = {}",
                sci(delta.hi()),
                sci(eps.hi()),
                sci(m.hi()),
                sci(k.hi()),
                sci(r.product.hi())
            ));
            a.log.push(Tag::Verdict, verdict_line(r.product));
            if !r.verified {
                a.fail("2 * (delta + eps_T3) * M * K is not below 1");
            }
        }
        Err(e) => a.fail(format!("torus closure: {e}")),
    }
}

fn finish(mut a: Auditor) -> AuditOutcome {
    if a.log.lines(Tag::Verdict).count() == 0 {
        a.log.push(Tag::Verdict, "closure not evaluated");
    }
    let verified = a.failures.is_empty();
    let status = if verified {
        let list = |p: Provenance| {
            a.sources.iter().filter(|(q, _)| *q == p).map(|(_, n)| *n).collect::<Vec<_>>().join(", ")
        };
        format!(
            "CLOSURE VERIFIED (declared: {}; computed: {})",
            or_none(list(Provenance::Declared)),
            or_none(list(Provenance::Computed))
        )
    } else {
        format!("VERIFICATION FAILED: {}", a.failures.join("; "))
    };
    a.log.push(Tag::Status, status);
    AuditOutcome { log: a.log, verified, exit_code: if verified { 0 } else { 1 } }
}

fn or_none(s: String) -> String {
    if s.is_empty() {
        "none".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_round_trips_through_text() {
        let mut log = AuditLog::new();
        log.push(Tag::Exec, PROGRAM_ID);
        log.section("X");
        log.push(Tag::Verdict, "1 < 2");
        log.push(Tag::Status, "CLOSURE VERIFIED");
        log.validate().unwrap();
        assert_eq!(AuditLog::parse(&log.render()).unwrap(), log);
        assert!(AuditLog::parse("garbage").is_err());
    }

    #[test]
    fn validation_rules() {
        let mut log = AuditLog::new();
        log.push(Tag::Status, "x");
        assert!(log.validate().is_err());
        let mut log = AuditLog::new();
        log.push(Tag::Verdict, "v");
        log.push(Tag::Status, "x");
        log.push(Tag::Step, "late");
        assert!(log.validate().is_err());
    }

    #[test]
    fn seven_significant_digits() {
        assert_eq!(sci(8.941_528_731e-5), "8.941529e-5");
        assert_eq!(sci(482.6), "4.826000e2");
    }
}
