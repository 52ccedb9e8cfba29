//! Interval-arithmetic auditing of Newton-Kantorovich closure certificates
//! for truncated Galerkin profiles.

pub mod audit;
pub mod basis;
pub mod certificate;
pub mod closure;
pub mod constants;
pub mod error;
pub mod interval;
pub mod operator;
pub mod oracle;
pub mod published;
pub mod residual;
pub mod spectral;
pub mod stability;
pub mod synth;

pub use error::{Error, Result};
pub use interval::Interval;
