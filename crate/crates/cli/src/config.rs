//! Shared options: command-line flags layered over an optional
//! `key = value` file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use nkcert::basis::{BasisModel, ReferenceModel};
use nkcert::certificate::{load_certificate, Ball, Decimal, ProfileCertificate};
use nkcert::interval::PRECISION_BITS;
use nkcert::published;

#[derive(Args, Clone, Debug, Default)]
pub struct SharedOpts {
    /// Certificate JSON; the bundled published profile when omitted
    #[arg(long, global = true, value_name = "PATH")]
    pub profile: Option<PathBuf>,
    /// Viscosity override (decimal literal)
    #[arg(long, global = true, value_name = "DECIMAL")]
    pub nu: Option<String>,
    /// Analyticity radius override (decimal literal)
    #[arg(long, global = true, value_name = "DECIMAL")]
    pub tau: Option<String>,
    /// Galerkin truncation; for gen-profile, the number of modes
    #[arg(long, global = true, value_name = "INT")]
    pub modes: Option<usize>,
    /// Basis model (only `reference`)
    #[arg(long, global = true, value_name = "NAME")]
    pub model: Option<String>,
    /// Interaction coupling of the reference model
    #[arg(long, global = true, value_name = "DECIMAL")]
    pub coupling: Option<f64>,
    /// Recovery kernel coupling of the reference model
    #[arg(long = "coupling-rec", global = true, value_name = "DECIMAL")]
    pub coupling_rec: Option<f64>,
    /// Interval precision in bits (only 53)
    #[arg(long, global = true, value_name = "BITS")]
    pub precision: Option<u32>,
    /// Write output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// RNG seed for gen-profile; a run label for the reference model
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Plain-text `key = value` file; flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

impl SharedOpts {
    /// Fill unset options from the config file, if one was given.
    pub fn resolve(mut self) -> Result<Self> {
        if let Some(path) = self.config.clone() {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading config {}", path.display()))?;
            self.merge_file(&text, &path)?;
        }
        if let Some(bits) = self.precision {
            if bits != PRECISION_BITS {
                bail!("unsupported precision {bits} bits; only {PRECISION_BITS}-bit intervals are available");
            }
        }
        Ok(self)
    }

    fn merge_file(&mut self, text: &str, path: &Path) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = || format!("{}:{}", path.display(), n + 1);
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}: expected `key = value`", at());
            };
            let (key, value) = (key.trim(), value.trim().to_string());
            let num = |what: &str| format!("{}: `{key}` must be {what}", at());
            match key {
                "profile" => fill(&mut self.profile, || Ok(PathBuf::from(&value)))?,
                "nu" => fill(&mut self.nu, || Ok(value.clone()))?,
                "tau" => fill(&mut self.tau, || Ok(value.clone()))?,
                "modes" => fill(&mut self.modes, || value.parse().with_context(|| num("an integer")))?,
                "model" => fill(&mut self.model, || Ok(value.clone()))?,
                "coupling" => fill(&mut self.coupling, || value.parse().with_context(|| num("a number")))?,
                "coupling-rec" | "coupling_rec" => {
                    fill(&mut self.coupling_rec, || value.parse().with_context(|| num("a number")))?
                }
                "precision" => {
                    fill(&mut self.precision, || value.parse().with_context(|| num("an integer")))?
                }
                "out" => fill(&mut self.out, || Ok(PathBuf::from(&value)))?,
                "seed" => fill(&mut self.seed, || value.parse().with_context(|| num("an integer")))?,
                _ => bail!("{}: unknown key `{key}`", at()),
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Arc<dyn BasisModel>> {
        match self.model.as_deref().unwrap_or("reference") {
            "reference" => Ok(Arc::new(ReferenceModel::with_couplings(
                self.seed.unwrap_or(0),
                self.coupling.unwrap_or(1.0),
                self.coupling_rec.unwrap_or(1.0),
            )?)),
            other => bail!("unknown model `{other}` (available: reference)"),
        }
    }

    /// The selected certificate with `--nu` and `--tau` applied.
    pub fn certificate(&self) -> Result<ProfileCertificate> {
        let cert = match &self.profile {
            Some(path) => load_certificate(path)?,
            None => published::certificate(),
        };
        if self.nu.is_none() && self.tau.is_none() {
            return Ok(cert);
        }
        let nu = match &self.nu {
            Some(text) => Ball::parse(text, "0").with_context(|| format!("--nu {text}"))?,
            None => cert.nu().clone(),
        };
        let tau = match &self.tau {
            Some(text) => Decimal::parse(text).with_context(|| format!("--tau {text}"))?,
            None => cert.tau().clone(),
        };
        Ok(ProfileCertificate::new(
            nu,
            cert.sigma().clone(),
            tau,
            cert.modes().clone(),
            cert.constants().clone(),
        )?)
    }

    /// `--modes`, else the certificate's largest mode.
    pub fn truncation(&self, cert: &ProfileCertificate) -> usize {
        self.modes.unwrap_or(cert.max_mode())
    }

    pub fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn fill<T>(slot: &mut Option<T>, value: impl FnOnce() -> Result<T>) -> Result<()> {
    if slot.is_none() {
        *slot = Some(value()?);
    }
    Ok(())
}
