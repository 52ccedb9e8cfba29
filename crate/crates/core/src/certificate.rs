//! Profile certificate files.
//!
//! A certificate is a JSON document:
//!
//! ```json
//! {
//!   "format_version": "1",
//!   "nu": {"mid": "0.005", "rad": "0"},
//!   "sigma": "0.05",
//!   "tau": "0.08",
//!   "modes": [{"j": 1, "mid": "+5.0e0", "rad": "1.0e-32"}],
//!   "constants": {"delta": {"mid": "8.421739e-12", "rad": "0"}}
//! }
//! ```
//!
//! Every number is a decimal string. The literal text is kept alongside its
//! binary64 enclosure so that saving a loaded certificate reproduces it
//! exactly. Certificates are immutable once constructed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{exact_decimal, parse_decimal, Interval};
use crate::spectral::CoefficientVector;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("certificate syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("certificate field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("certificate i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> CertificateError {
    CertificateError::Field { field: field.into(), message: message.into() }
}

/// A decimal literal and its enclosure.
#[derive(Clone, Debug, PartialEq)]
pub struct Decimal {
    text: String,
    value: Interval,
}

impl Decimal {
    pub fn parse(text: &str) -> Result<Self, crate::interval::IntervalError> {
        Ok(Decimal { text: text.to_string(), value: parse_decimal(text)? })
    }

    /// Exact decimal of a binary64 value.
    pub fn from_f64(x: f64) -> Self {
        Decimal { text: exact_decimal(x), value: Interval::point(x) }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn value(&self) -> Interval {
        self.value
    }
}

/// Midpoint-radius ball with the literal text of both parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    mid: Decimal,
    rad: Decimal,
    enclosure: Interval,
}

impl Ball {
    pub fn parse(mid: &str, rad: &str) -> Result<Self, crate::interval::IntervalError> {
        let mid = Decimal::parse(mid)?;
        let rad = Decimal::parse(rad)?;
        let enclosure = Interval::ball(mid.value, rad.value)?;
        Ok(Ball { mid, rad, enclosure })
    }

    /// Ball written with exact decimals whose enclosure contains `x`.
    pub fn from_interval(x: Interval) -> Result<Self, crate::interval::IntervalError> {
        let x = x.checked()?;
        let m = x.mid();
        let r = (Interval::point(x.hi()) - Interval::point(m))
            .hi()
            .max((Interval::point(m) - Interval::point(x.lo())).hi());
        let ball = Ball::parse(&exact_decimal(m), &exact_decimal(r))?;
        debug_assert!(ball.enclosure.encloses(&x));
        Ok(ball)
    }

    pub fn mid(&self) -> &Decimal {
        &self.mid
    }

    pub fn rad(&self) -> &Decimal {
        &self.rad
    }

    pub fn enclosure(&self) -> Interval {
        self.enclosure
    }
}

/// Named scalar constants a certificate may declare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstantName {
    Delta,
    M,
    K,
    CProf,
    Gamma,
    CRecKer,
    CRecMap,
    CConv,
    EpsT3,
}

impl ConstantName {
    pub const ALL: [ConstantName; 9] = [
        ConstantName::Delta,
        ConstantName::M,
        ConstantName::K,
        ConstantName::CProf,
        ConstantName::Gamma,
        ConstantName::CRecKer,
        ConstantName::CRecMap,
        ConstantName::CConv,
        ConstantName::EpsT3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstantName::Delta => "delta",
            ConstantName::M => "M",
            ConstantName::K => "K",
            ConstantName::CProf => "C_prof",
            ConstantName::Gamma => "gamma",
            ConstantName::CRecKer => "C_rec_ker",
            ConstantName::CRecMap => "C_rec_map",
            ConstantName::CConv => "C_conv",
            ConstantName::EpsT3 => "eps_T3",
        }
    }
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstantName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ConstantName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown constant `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileCertificate {
    format_version: String,
    nu: Ball,
    sigma: Decimal,
    tau: Decimal,
    modes: BTreeMap<usize, Ball>,
    constants: BTreeMap<ConstantName, Ball>,
    coefficients: CoefficientVector,
}

impl ProfileCertificate {
    pub fn new(
        nu: Ball,
        sigma: Decimal,
        tau: Decimal,
        modes: BTreeMap<usize, Ball>,
        constants: BTreeMap<ConstantName, Ball>,
    ) -> Result<Self, CertificateError> {
        validate_nu(&nu, "nu")?;
        validate_positive(sigma.value, "sigma")?;
        validate_positive(tau.value, "tau")?;
        for (name, ball) in &constants {
            validate_constant(ball, &format!("constants.{name}"))?;
        }
        let max_mode = modes.keys().next_back().copied().unwrap_or(1).max(1);
        let mut coefficients = CoefficientVector::new(max_mode);
        for (&j, ball) in &modes {
            if j == 0 {
                return Err(field_err("modes.j", "mode index must be >= 1"));
            }
            coefficients.insert(j, ball.enclosure).expect("index within max_mode");
        }
        Ok(ProfileCertificate {
            format_version: FORMAT_VERSION.to_string(),
            nu,
            sigma,
            tau,
            modes,
            constants,
            coefficients,
        })
    }

    pub fn format_version(&self) -> &str {
        &self.format_version
    }

    pub fn nu(&self) -> &Ball {
        &self.nu
    }

    pub fn sigma(&self) -> &Decimal {
        &self.sigma
    }

    /// Analyticity radius the profile is audited at.
    pub fn tau(&self) -> &Decimal {
        &self.tau
    }

    pub fn modes(&self) -> &BTreeMap<usize, Ball> {
        &self.modes
    }

    pub fn coefficients(&self) -> &CoefficientVector {
        &self.coefficients
    }

    /// Largest mode index carried by the certificate.
    pub fn max_mode(&self) -> usize {
        self.coefficients.max_mode()
    }

    pub fn constants(&self) -> &BTreeMap<ConstantName, Ball> {
        &self.constants
    }

    pub fn constant(&self, name: ConstantName) -> Option<Interval> {
        self.constants.get(&name).map(Ball::enclosure)
    }

    /// Copy with `name` set to `value`.
    pub fn with_constant(&self, name: ConstantName, value: Ball) -> Result<Self, CertificateError> {
        validate_constant(&value, &format!("constants.{name}"))?;
        let mut out = self.clone();
        out.constants.insert(name, value);
        Ok(out)
    }

    /// Copy with `name` removed.
    pub fn without_constant(&self, name: ConstantName) -> Self {
        let mut out = self.clone();
        out.constants.remove(&name);
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self, CertificateError> {
        let raw: RawCertificate = serde_json::from_str(text).map_err(|e| {
            CertificateError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
        })?;
        raw.validate()
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawCertificate {
            format_version: self.format_version.clone(),
            nu: RawBall::from(&self.nu),
            sigma: self.sigma.text.clone(),
            tau: self.tau.text.clone(),
            modes: self
                .modes
                .iter()
                .map(|(&j, b)| RawMode { j: j as u64, mid: b.mid.text.clone(), rad: b.rad.text.clone() })
                .collect(),
            constants: self
                .constants
                .iter()
                .map(|(name, b)| (name.as_str().to_string(), RawBall::from(b)))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("certificate serializes");
        s.push('\n');
        s
    }
}

pub fn load_certificate(path: impl AsRef<Path>) -> Result<ProfileCertificate, CertificateError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CertificateError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ProfileCertificate::from_json_str(&text)
}

pub fn save_certificate(
    cert: &ProfileCertificate,
    path: impl AsRef<Path>,
) -> Result<(), CertificateError> {
    let path = path.as_ref();
    std::fs::write(path, cert.to_json_string()).map_err(|e| CertificateError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn validate_nu(nu: &Ball, field: &str) -> Result<(), CertificateError> {
    if nu.enclosure.lo() <= 0.0 {
        return Err(field_err(field, format!("viscosity {} must be positive", nu.enclosure)));
    }
    Ok(())
}

fn validate_positive(x: Interval, field: &str) -> Result<(), CertificateError> {
    if x.lo() <= 0.0 {
        return Err(field_err(field, format!("value {x} must be positive")));
    }
    Ok(())
}

fn validate_constant(ball: &Ball, field: &str) -> Result<(), CertificateError> {
    if ball.enclosure.lo() < 0.0 {
        return Err(field_err(field, format!("constant {} must be nonnegative", ball.enclosure)));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    format_version: String,
    nu: RawBall,
    sigma: String,
    tau: String,
    modes: Vec<RawMode>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    constants: BTreeMap<String, RawBall>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBall {
    mid: String,
    rad: String,
}

impl From<&Ball> for RawBall {
    fn from(b: &Ball) -> Self {
        RawBall { mid: b.mid.text.clone(), rad: b.rad.text.clone() }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    j: u64,
    mid: String,
    rad: String,
}

fn parse_ball(mid: &str, rad: &str, field: &str) -> Result<Ball, CertificateError> {
    let m = Decimal::parse(mid).map_err(|e| field_err(format!("{field}.mid"), e.to_string()))?;
    let r = Decimal::parse(rad).map_err(|e| field_err(format!("{field}.rad"), e.to_string()))?;
    if r.value.lo() < 0.0 {
        return Err(field_err(format!("{field}.rad"), format!("radius {rad} is negative")));
    }
    let enclosure =
        Interval::ball(m.value, r.value).map_err(|e| field_err(field, e.to_string()))?;
    Ok(Ball { mid: m, rad: r, enclosure })
}

impl RawCertificate {
    fn validate(self) -> Result<ProfileCertificate, CertificateError> {
        if self.format_version != FORMAT_VERSION {
            return Err(field_err(
                "format_version",
                format!("unsupported version `{}` (expected `{FORMAT_VERSION}`)", self.format_version),
            ));
        }
        let nu = parse_ball(&self.nu.mid, &self.nu.rad, "nu")?;
        let sigma = Decimal::parse(&self.sigma).map_err(|e| field_err("sigma", e.to_string()))?;
        let tau = Decimal::parse(&self.tau).map_err(|e| field_err("tau", e.to_string()))?;
        let mut modes = BTreeMap::new();
        for (i, m) in self.modes.iter().enumerate() {
            let field = format!("modes[{i}]");
            if m.j == 0 {
                return Err(field_err(format!("{field}.j"), "mode index must be >= 1"));
            }
            let j = usize::try_from(m.j)
                .map_err(|_| field_err(format!("{field}.j"), "mode index too large"))?;
            let ball = parse_ball(&m.mid, &m.rad, &field)?;
            if modes.insert(j, ball).is_some() {
                return Err(field_err(format!("{field}.j"), format!("duplicate mode index {j}")));
            }
        }
        let mut constants = BTreeMap::new();
        for (name, raw) in &self.constants {
            let field = format!("constants.{name}");
            let key: ConstantName = name.parse().map_err(|e: String| field_err(&field, e))?;
            constants.insert(key, parse_ball(&raw.mid, &raw.rad, &field)?);
        }
        ProfileCertificate::new(nu, sigma, tau, modes, constants)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
  "format_version": "1",
  "nu": {"mid": "0.005", "rad": "0"},
  "sigma": "0.05",
  "tau": "0.08",
  "modes": [
    {"j": 1, "mid": "+5.0000000000000000000000000000000e0", "rad": "1.0e-32"},
    {"j": 50, "mid": "+3.5821094821093145628109321453214e-3", "rad": "8.4e-34"}
  ],
  "constants": {"M": {"mid": "482.6", "rad": "0"}}
}"#;

    #[test]
    fn loads_sample() {
        let c = ProfileCertificate::from_json_str(SAMPLE).unwrap();
        assert_eq!(c.max_mode(), 50);
        let c1 = c.coefficients().get(1);
        assert_eq!(c1, Interval::new(5f64.next_down(), 5f64.next_up()).unwrap());
        assert!(c.constant(ConstantName::M).unwrap().contains(482.6));
        assert!(c.constant(ConstantName::K).is_none());
    }

    #[test]
    fn save_load_round_trip_preserves_text() {
        let c = ProfileCertificate::from_json_str(SAMPLE).unwrap();
        let text = c.to_json_string();
        let again = ProfileCertificate::from_json_str(&text).unwrap();
        assert_eq!(c, again);
        assert_eq!(text, again.to_json_string());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = ProfileCertificate::from_json_str("{\n  \"format_version\": \"1\",\n  oops\n}")
            .unwrap_err();
        match err {
            CertificateError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_fields() {
        let dup = SAMPLE.replace("\"j\": 50", "\"j\": 1");
        let err = ProfileCertificate::from_json_str(&dup).unwrap_err().to_string();
        assert!(err.contains("modes[1].j") && err.contains("duplicate"), "{err}");

        let neg = SAMPLE.replace("\"rad\": \"8.4e-34\"", "\"rad\": \"-8.4e-34\"");
        let err = ProfileCertificate::from_json_str(&neg).unwrap_err().to_string();
        assert!(err.contains("modes[1].rad"), "{err}");

        let zero = SAMPLE.replace("\"j\": 50", "\"j\": 0");
        assert!(ProfileCertificate::from_json_str(&zero).is_err());

        let junk = SAMPLE.replace("\"+5.0000000000000000000000000000000e0\"", "\"five\"");
        let err = ProfileCertificate::from_json_str(&junk).unwrap_err().to_string();
        assert!(err.contains("modes[0].mid"), "{err}");

        let unknown = SAMPLE.replace("\"M\":", "\"Q\":");
        assert!(ProfileCertificate::from_json_str(&unknown).is_err());

        let version = SAMPLE.replace("\"format_version\": \"1\"", "\"format_version\": \"2\"");
        assert!(ProfileCertificate::from_json_str(&version).is_err());

        let nu = SAMPLE.replace("\"mid\": \"0.005\"", "\"mid\": \"-0.005\"");
        assert!(ProfileCertificate::from_json_str(&nu).is_err());
    }

    #[test]
    fn ball_from_interval_encloses() {
        let x = Interval::new(0.1, 0.30000000000000004).unwrap();
        let b = Ball::from_interval(x).unwrap();
        assert!(b.enclosure().encloses(&x));
    }
}
