//! The published five-mode profile and its declared constant table, bundled
//! as a certificate.

use crate::certificate::{ConstantName, ProfileCertificate};
use crate::interval::Interval;

pub const CERTIFICATE_JSON: &str = include_str!("../data/published_profile.json");

/// Closure product as stated in the published summary, as printed in the
/// published audit log, and as the exact product of the published constants.
/// They disagree at the third significant digit.
pub const CLOSURE_STATED: &str = "8.9e-5";
pub const CLOSURE_LOGGED: &str = "8.9328e-5";
pub const CLOSURE_EXACT: &str = "8.9415e-5";

pub fn certificate() -> ProfileCertificate {
    ProfileCertificate::from_json_str(CERTIFICATE_JSON).expect("bundled certificate is valid")
}

/// Declared value of `name` in the published table.
pub fn constant(name: ConstantName) -> Interval {
    certificate().constant(name).expect("published table declares every constant")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_certificate_loads() {
        let c = certificate();
        assert_eq!(c.coefficients().len(), 5);
        assert_eq!(c.max_mode(), 450);
        for name in ConstantName::ALL {
            assert!(c.constant(name).is_some(), "{name}");
        }
        assert!(constant(ConstantName::K).contains(11_000.0));
    }
}
