use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use nkcert::audit::{run_audit, sci, AuditConfig, AuditLog, Tag, PROGRAM_ID};
use nkcert::closure::{nk_closure, torus_closure};
use nkcert::constants::{convolution_constant, lipschitz_constant, recovery_mapping_constant};
use nkcert::interval::PRECISION_BITS;
use nkcert::operator::{assemble_jacobian, OperatorConfig};
use nkcert::oracle::{
    check_axis_vanishing, check_conjugation, check_divergence, check_reconstruction_scaling,
    conjugation_cases, conjugation_convergence, Derivatives, DivergenceScheme, MeridionalGrid,
    TestFunction,
};
use nkcert::residual::certify_residual;
use nkcert::spectral::WeightedSpace;
use nkcert::stability::{certify_inverse, certify_tail_coercivity};
use nkcert::synth::{synthesize_profile, SynthSpec};
use nkcert::certificate::ConstantName;
use nkcert::Interval;

use crate::config::SharedOpts;

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enclose the residual norm delta of the profile
    Residual,
    /// Certify the finite-block inverse bound M
    Inverse,
    /// Certify the tail coercivity gap gamma
    Tail(TailArgs),
    /// Recovery, convolution and Lipschitz constants
    Constants(ConstantsArgs),
    /// Evaluate the closure inequalities for given constants
    Closure(ClosureArgs),
    /// Floating-point checks of the calculus identities
    Oracle {
        #[command(subcommand)]
        check: OracleCheck,
    },
    /// Write a seeded random envelope-conforming certificate
    GenProfile,
    /// Run the full pipeline and print the audit log
    Audit(AuditArgs),
}

#[derive(Args, Debug)]
pub struct TailArgs {
    /// Interaction envelope constant; defaults to the declared value, then 0.125
    #[arg(long = "c-prof", value_name = "DECIMAL")]
    pub c_prof: Option<String>,
    /// First tail mode; defaults to max(1200, N+1)
    #[arg(long = "j-min", value_name = "INT")]
    pub j_min: Option<usize>,
    #[arg(long, default_value_t = 2048)]
    pub window: usize,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    /// Radius of the source space
    #[arg(long = "tau-prime", default_value = "0.081", value_name = "DECIMAL")]
    pub tau_prime: String,
}

#[derive(Args, Debug)]
pub struct ClosureArgs {
    #[arg(long, value_name = "DECIMAL")]
    pub delta: String,
    #[arg(long = "M", value_name = "DECIMAL")]
    pub m: String,
    #[arg(long = "K", value_name = "DECIMAL")]
    pub k: String,
    /// Torus transfer error; adds the torus closure
    #[arg(long, value_name = "DECIMAL")]
    pub eps: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum OracleCheck {
    /// Conjugation identity on the three test functions
    Conjugation(GridArgs),
    /// Divergence of the velocity built from rho^4*zeta
    Divergence(GridArgs),
    /// Decay of the axis boundary term
    Axis,
    /// Self-similar vorticity scaling and the partial BKM integral
    Reconstruction,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Nodes per axis
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Omit the timestamp line
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
}

fn header(task: String) -> AuditLog {
    let mut log = AuditLog::new();
    log.push(Tag::Exec, PROGRAM_ID);
    log.push(
        Tag::Prec,
        format!("{PRECISION_BITS}-bit interval arithmetic (binary64 endpoints, outward rounding)"),
    );
    log.push(Tag::Task, task);
    log
}

/// Append the STATUS line, write the log, and return the exit code.
fn conclude(opts: &SharedOpts, mut log: AuditLog, subject: &str, failures: &[String]) -> Result<i32> {
    if failures.is_empty() {
        log.push(Tag::Status, format!("{subject} VERIFIED"));
    } else {
        log.push(Tag::Status, format!("VERIFICATION FAILED: {}", failures.join("; ")));
    }
    opts.emit(&log.render())?;
    Ok(if failures.is_empty() { 0 } else { 1 })
}

fn decimal(flag: &str, text: &str) -> Result<Interval> {
    Interval::from_decimal(text).with_context(|| format!("{flag} {text}"))
}

fn full(x: Interval) -> String {
    format!("[{:e}, {:e}]", x.lo(), x.hi())
}

pub fn run(command: Command, opts: &SharedOpts) -> Result<i32> {
    match command {
        Command::Residual => residual(opts),
        Command::Inverse => inverse(opts),
        Command::Tail(args) => tail(opts, args),
        Command::Constants(args) => constants(opts, args),
        Command::Closure(args) => closure(opts, args),
        Command::Oracle { check } => oracle(opts, check),
        Command::GenProfile => gen_profile(opts),
        Command::Audit(args) => audit(opts, args),
    }
}

fn operator(opts: &SharedOpts) -> Result<(nkcert::certificate::ProfileCertificate, OperatorConfig)> {
    let cert = opts.certificate()?;
    let n = opts.truncation(&cert);
    let cfg = OperatorConfig::new(opts.model()?, cert.nu().enclosure(), n)?;
    Ok((cert, cfg))
}

fn residual(opts: &SharedOpts) -> Result<i32> {
    let (cert, cfg) = operator(opts)?;
    let n = cfg.truncation();
    let x = WeightedSpace::new(6.0, cert.tau().value())?;
    let mut log = header(format!(
        "Computing ||G(Omega_app, nu={})|| in X(s=6, tau={}), N={n}, model={}",
        cert.nu().mid().text(),
        cert.tau().text(),
        cfg.model().name()
    ));
    let r = certify_residual(&cert, &cfg, &x)?;
    log.push(Tag::Step, format!("Finite modes j=[1, {n}]: {}", full(r.delta_fin)));
    log.push(Tag::Step, format!("Tail modes j=[{}, {}]: {}", n + 1, 2 * n, full(r.delta_tail)));
    log.push(Tag::Step, format!("Quadrature error: {}", full(r.quadrature)));
    log.push(Tag::Rslt, format!("delta = {} (computed)", sci(r.delta.hi())));
    log.push(Tag::Verdict, format!("delta in {}", full(r.delta)));
    conclude(opts, log, "RESIDUAL", &[])
}

fn inverse(opts: &SharedOpts) -> Result<i32> {
    let (cert, cfg) = operator(opts)?;
    let n = cfg.truncation();
    let mut log = header(format!("Certifying ||DG^-1|| on the {n}-mode block, model={}", cfg.model().name()));
    let jac = assemble_jacobian(cert.coefficients(), &cfg)?;
    log.push(Tag::Step, format!("Jacobian J construction: {n}x{n} interval matrix"));
    let rep = certify_inverse(&jac)?;
    log.push(Tag::Step, format!("||R|| <= {}", sci(rep.r_norm.hi())));
    log.push(Tag::Step, format!("||I - R*J|| <= {}", sci(rep.e_norm.hi())));
    let mut failures = Vec::new();
    if rep.verified {
        log.push(Tag::Rslt, format!("M = {} (computed)", sci(rep.m.hi())));
        log.push(Tag::Verdict, format!("{} < 1.000000e0", sci(rep.e_norm.hi())));
    } else {
        log.push(Tag::Verdict, format!("{} >= 1.000000e0", sci(rep.e_norm.hi())));
        failures.push(rep.diagnostic.unwrap_or_else(|| "inverse not certified".into()));
    }
    conclude(opts, log, "INVERSE", &failures)
}

fn tail(opts: &SharedOpts, args: TailArgs) -> Result<i32> {
    let cert = opts.certificate()?;
    let n = opts.truncation(&cert);
    let c_prof = match &args.c_prof {
        Some(text) => decimal("--c-prof", text)?,
        None => cert.constant(ConstantName::CProf).unwrap_or(decimal("C_prof", "0.125")?),
    };
    let j_min = args.j_min.unwrap_or(1200.max(n + 1));
    let mut log = header(format!(
        "Certifying min_j (nu*j^2 - Inter_j) for j >= {j_min}, C_prof={}",
        sci(c_prof.hi())
    ));
    let tau = cert.tau().value();
    let rep = certify_tail_coercivity(&cert, cert.nu().enclosure(), n, c_prof, j_min, args.window, tau)?;
    log.push(
        Tag::Step,
        format!("Window j=[{}, {}]: minimum at j={}", rep.j_min, rep.j_max, rep.argmin),
    );
    log.push(
        Tag::Step,
        format!(
            "Ratio test at J={}: {}",
            rep.j_max,
            if rep.monotone_tail_verified { "verified" } else { "FAILED" }
        ),
    );
    log.push(Tag::Rslt, format!("gamma >= {} (computed)", sci(rep.gamma.lo())));
    let mut failures = Vec::new();
    if rep.verified {
        log.push(Tag::Verdict, format!("{} > 0.000000e0", sci(rep.gamma.lo())));
    } else {
        log.push(Tag::Verdict, "coercivity gap not certified");
        failures.push("tail coercivity not certified".to_string());
    }
    if let Some(declared) = cert.constant(ConstantName::Gamma) {
        if declared.hi() > rep.gamma.lo() {
            failures.push(format!("declared gamma {} exceeds the computed bound", sci(declared.hi())));
        }
    }
    conclude(opts, log, "TAIL COERCIVITY", &failures)
}

fn constants(opts: &SharedOpts, args: ConstantsArgs) -> Result<i32> {
    let cert = opts.certificate()?;
    let n = opts.truncation(&cert);
    let model = opts.model()?;
    let x = WeightedSpace::new(6.0, cert.tau().value())?;
    let y = WeightedSpace::new(7.0, decimal("--tau-prime", &args.tau_prime)?)?;
    let mut log = header(format!(
        "Constants for tau={} -> tau'={}, N={n}, model={}",
        cert.tau().text(),
        args.tau_prime,
        model.name()
    ));
    let cap = cert.constant(ConstantName::CRecKer).unwrap_or(Interval::ONE);
    let rec = recovery_mapping_constant(x.tau(), y.tau(), cap)?;
    log.push(Tag::Step, format!("Recovery multiplier maximised at k={} (scanned to {})", rec.argmax, rec.scan_limit));
    log.push(Tag::Rslt, format!("C_rec_map = {} (computed)", sci(rec.mapping.hi())));
    log.push(Tag::Step, format!("Including the kernel cap: {}", sci(rec.with_kernel_cap.hi())));
    let conv = convolution_constant(model.as_ref(), n, &x, &y)?;
    log.push(Tag::Rslt, format!("C_conv = {} (computed)", sci(conv.hi())));
    let lip = lipschitz_constant(rec.mapping, conv, None)?;
    log.push(
        Tag::Calc,
        format!("C_rec_map * C_conv = ({}) * ({}) = {}", sci(rec.mapping.hi()), sci(conv.hi()), sci(lip.product.hi())),
    );
    log.push(Tag::Rslt, format!("K = {} (computed)", sci(lip.k.hi())));
    log.push(Tag::Verdict, format!("K = {} >= {}", sci(lip.k.hi()), sci(lip.product.hi())));
    conclude(opts, log, "CONSTANTS", &[])
}

fn closure(opts: &SharedOpts, args: ClosureArgs) -> Result<i32> {
    let delta = decimal("--delta", &args.delta)?;
    let m = decimal("--M", &args.m)?;
    let k = decimal("--K", &args.k)?;
    let mut log = header("Closure check 2 * delta * M * K < 1".into());
    let mut failures = Vec::new();
    let nk = nk_closure(delta, m, k)?;
    log.push(
        Tag::Calc,
        format!("2 * ({}) * ({}) * ({}) = {}", sci(delta.hi()), sci(m.hi()), sci(k.hi()), sci(nk.product.hi())),
    );
    let verdict = |p: Interval| {
        format!("{} {} 1.000000e0", sci(p.hi()), if p.hi() < 1.0 { "<" } else { ">=" })
    };
    log.push(Tag::Verdict, verdict(nk.product));
    if !nk.verified {
        failures.push("2 * delta * M * K is not below 1".to_string());
    }
    if let Some(text) = &args.eps {
        let eps = decimal("--eps", text)?;
        let t = torus_closure(delta, eps, m, k)?;
        log.push(
            Tag::Calc,
            format!(
                "2 * ({} + {}) * ({}) * ({}) = {}",
                sci(delta.hi()),
                sci(eps.hi()),
                sci(m.hi()),
                sci(k.hi()),
                sci(t.product.hi())
            ),
        );
        log.push(Tag::Verdict, verdict(t.product));
        if !t.verified {
            failures.push("2 * (delta + eps_T3) * M * K is not below 1".to_string());
        }
    }
    conclude(opts, log, "CLOSURE", &failures)
}

fn oracle(opts: &SharedOpts, check: OracleCheck) -> Result<i32> {
    let mut failures = Vec::new();
    let log = match check {
        OracleCheck::Conjugation(g) => {
            let grid = MeridionalGrid::square(g.grid)?;
            let mut log = header(format!("Conjugation identity on a {0}x{0} grid", g.grid));
            for f in conjugation_cases() {
                let exact = check_conjugation(&f, &grid, Derivatives::Jets)?;
                let fd = check_conjugation(&f, &grid, Derivatives::CentralDifferences)?;
                let (pass, detail) = if f.name == TestFunction::gaussian().name {
                    let conv = conjugation_convergence(&f, &grid)?;
                    let ok = (3.5..=4.5).contains(&conv.ratio);
                    (ok, format!("h -> h/2 error ratio {:.4}", conv.ratio))
                } else {
                    (exact.relative <= 1e-12, format!("exact relative {:.3e}", exact.relative))
                };
                log.push(
                    Tag::Rslt,
                    format!(
                        "{:<28} jets {:.3e}  differences {:.3e}  {detail}  {}",
                        f.name,
                        exact.relative,
                        fd.relative,
                        if pass { "PASS" } else { "FAIL" }
                    ),
                );
                if !pass {
                    failures.push(format!("conjugation on {}", f.name));
                }
            }
            log
        }
        OracleCheck::Divergence(g) => {
            let grid = MeridionalGrid::square(g.grid)?;
            let psi = grid.sample("rho^4*zeta", |r, z| r.powi(4) * z)?;
            let mut log = header(format!("Divergence of the velocity from rho^4*zeta, {0}x{0} grid", g.grid));
            for scheme in [DivergenceScheme::Conservative, DivergenceScheme::Pointwise] {
                let rep = check_divergence(&psi, &grid, scheme)?;
                log.push(
                    Tag::Rslt,
                    format!("{scheme:?}: max |div u| = {:.3e}, relative {:.3e}", rep.max_abs, rep.relative),
                );
                if scheme == DivergenceScheme::Conservative && rep.relative > 1e-12 {
                    failures.push("conservative divergence is not zero".to_string());
                }
            }
            log
        }
        OracleCheck::Axis => {
            let eps = [1e-1, 5e-2, 2.5e-2, 1.25e-2];
            let phi: fn(f64) -> f64 = |z| (-z * z).exp();
            let mut log = header("Axis boundary term eps^3 * int W_rho phi dzeta".into());
            for (w, expect) in [(TestFunction::axis_conforming(), true), (TestFunction::axis_nonconforming(), false)] {
                let rep = check_axis_vanishing(&w, phi, &eps)?;
                let slope = rep.exponent.map_or("none".to_string(), |e| format!("{e:.3}"));
                log.push(
                    Tag::Rslt,
                    format!("{}: decay exponent {slope}, {}", w.name, if rep.passes { "vanishes" } else { "does not vanish" }),
                );
                if rep.passes != expect {
                    failures.push(format!("axis term for {}", w.name));
                }
            }
            log
        }
        OracleCheck::Reconstruction => {
            let mut log = header("Vorticity scaling (T* - t)||omega|| and partial BKM integrals".into());
            let times: Vec<f64> = (0..10).map(|i| 0.1 * i as f64).collect();
            let rep = check_reconstruction_scaling(1.0, 1.0, &times, &[1e-2, 1e-4, 1e-6])?;
            log.push(Tag::Rslt, format!("product spread {:.3e}", rep.product_spread));
            for s in &rep.bkm {
                log.push(
                    Tag::Rslt,
                    format!("eps={:e}: quadrature {:.12} closed form {:.12}", s.epsilon, s.quadrature, s.closed_form),
                );
            }
            if rep.product_spread > 1e-12 {
                failures.push("vorticity product is not constant".to_string());
            }
            if !rep.diverging {
                failures.push("partial integrals do not diverge logarithmically".to_string());
            }
            log
        }
    };
    let mut log = log;
    log.push(
        Tag::Verdict,
        if failures.is_empty() { "all checks pass".to_string() } else { format!("{} checks fail", failures.len()) },
    );
    conclude(opts, log, "ORACLE", &failures)
}

fn gen_profile(opts: &SharedOpts) -> Result<i32> {
    let mut spec = SynthSpec::new(opts.modes.unwrap_or(12));
    if let Some(nu) = &opts.nu {
        spec.nu = nu.clone();
    }
    if let Some(tau) = &opts.tau {
        spec.tau = tau.clone();
    }
    let cert = synthesize_profile(&spec, opts.seed.unwrap_or(0))?;
    opts.emit(&cert.to_json_string())?;
    Ok(0)
}

fn audit(opts: &SharedOpts, args: AuditArgs) -> Result<i32> {
    let cert = opts.certificate()?;
    let timestamp = if args.no_timestamp {
        None
    } else {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    };
    let cfg = AuditConfig { model: opts.model()?, truncation: opts.modes, timestamp, ..AuditConfig::default() };
    let out = run_audit(&cert, &cfg);
    opts.emit(&out.log.render())?;
    Ok(out.exit_code)
}
