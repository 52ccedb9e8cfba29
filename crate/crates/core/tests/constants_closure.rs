mod common;

use std::collections::BTreeMap;

use astro_float::RoundingMode;
use nkcert::basis::ReferenceModel;
use nkcert::closure::{image_overlap_bound, nk_closure, torus_closure, transfer_error};
use nkcert::constants::{
    convolution_constant, lipschitz_constant, recovery_mapping_constant, round_up_significant,
    stretching_penalty, EnergySpectrum,
};
use nkcert::interval::Interval;
use nkcert::spectral::{norm_ratio_multiplier, WeightedSpace};
use proptest::prelude::*;

use common::{big, encloses, Oracle, P};

const NEAR: RoundingMode = RoundingMode::ToEven;

fn dec(s: &str) -> Interval {
    Interval::from_decimal(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rounding_up_keeps_two_digits(x in 1e-300f64..1e300, digits in 1i32..6) {
        let r = round_up_significant(x, digits);
        prop_assert!(r >= x);
        prop_assert!(r <= x * (1.0 + 10f64.powi(1 - digits)) * (1.0 + 1e-15));
        prop_assert_eq!(round_up_significant(r, digits), r);
    }

    #[test]
    fn closure_products_enclose_the_exact_product(
        d in 0.0f64..1e-6, m in 0.0f64..1e4, k in 0.0f64..1e5, e in 0.0f64..1e-6,
    ) {
        let rep = nk_closure(Interval::point(d), Interval::point(m), Interval::point(k)).unwrap();
        let exact = big(2.0).mul(&big(d), P, NEAR).mul(&big(m), P, NEAR).mul(&big(k), P, NEAR);
        prop_assert!(encloses(rep.product, &exact));
        prop_assert_eq!(rep.verified, rep.product.hi() < 1.0);
        let torus = torus_closure(Interval::point(d), Interval::point(e), Interval::point(m), Interval::point(k)).unwrap();
        prop_assert!(torus.product.hi() >= rep.product.hi());
    }

    #[test]
    fn closure_is_monotone_in_every_input(
        d in 1e-12f64..1e-6, m in 1.0f64..1e3, k in 1.0f64..1e5, f in 1.0f64..10.0,
    ) {
        let base = nk_closure(Interval::point(d), Interval::point(m), Interval::point(k)).unwrap().product;
        for (dd, mm, kk) in [(d * f, m, k), (d, m * f, k), (d, m, k * f)] {
            let p = nk_closure(Interval::point(dd), Interval::point(mm), Interval::point(kk)).unwrap().product;
            prop_assert!(p.hi() >= base.hi());
        }
    }

    #[test]
    fn lipschitz_constant_dominates_the_product(a in 1e-6f64..1e9, b in 1e-6f64..1e3, declared in proptest::option::of(0.0f64..1e12)) {
        let rep = lipschitz_constant(Interval::point(a), Interval::point(b), declared.map(Interval::point)).unwrap();
        prop_assert!(rep.k.lo() >= rep.product.hi());
        if let Some(d) = declared {
            if d >= round_up_significant(rep.product.hi(), 2) {
                prop_assert_eq!(rep.k, Interval::point(d));
            }
        }
    }

    #[test]
    fn overlap_sum_shrinks_with_sigma(s1 in 0.02f64..0.4, s2 in 0.02f64..0.4) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let narrow = image_overlap_bound(Interval::point(lo), 3).unwrap();
        let wide = image_overlap_bound(Interval::point(hi), 3).unwrap();
        prop_assert!(narrow.total.log10().hi() <= wide.total.log10().hi() + 1e-9);
        // Six nearest images dominate; the bound is at least six of them.
        let six = narrow.nearest_image.log10().lo() + 6f64.log10();
        prop_assert!(narrow.total.log10().hi() >= six - 1e-9);
    }

    #[test]
    fn recovery_multiplier_never_exceeds_the_constant(k in 1usize..20_000) {
        let tau = dec("0.08");
        let tau_p = dec("0.081");
        let rc = recovery_mapping_constant(tau, tau_p, Interval::point(200.0)).unwrap();
        prop_assert!(norm_ratio_multiplier(k, tau_p - tau).unwrap().hi() <= rc.mapping.hi());
    }
}

#[test]
fn recovery_constant_of_the_default_gap() {
    let rc = recovery_mapping_constant(dec("0.08"), dec("0.081"), Interval::point(200.0)).unwrap();
    assert_eq!(rc.argmax, 2500);
    assert!((rc.mapping.mid() / 2.565156e7 - 1.0).abs() < 5e-7, "{}", rc.mapping);
    assert!(rc.with_kernel_cap.contains(200.0 * rc.mapping.mid()));
    assert!(recovery_mapping_constant(dec("0.08"), dec("0.08"), Interval::ONE).is_err());
}

#[test]
fn recovery_constant_matches_multiprecision_at_the_argmax() {
    // k^{7/2} (1 + k²)^{-1/2} e^{-k/1000} at k = 2500.
    let mut oracle = Oracle::default();
    let k = big(2500.0);
    let growth = k.powi(3, P, NEAR).mul(&k.sqrt(P, NEAR), P, NEAR);
    let denom = big(1.0).add(&k.mul(&k, P, NEAR), P, NEAR).sqrt(P, NEAR);
    let gap = oracle.decimal("0.081").sub(&oracle.decimal("0.08"), P, NEAR);
    let decay = oracle.exp_near(&gap.mul(&k, P, NEAR).neg());
    let exact = growth.div(&denom, P, NEAR).mul(&decay, P, NEAR);
    let rc = recovery_mapping_constant(dec("0.08"), dec("0.081"), Interval::ONE).unwrap();
    assert!(encloses(norm_ratio_multiplier(2500, dec("0.081") - dec("0.08")).unwrap(), &exact));
    assert!(encloses(rc.mapping, &exact));
}

#[test]
fn convolution_constant_grows_with_truncation() {
    let model = ReferenceModel::new(0, 1.0).unwrap();
    let (x, y) = (WeightedSpace::profile(), WeightedSpace::source());
    let mut prev = 0.0;
    for n in [1, 2, 4, 8, 16, 32] {
        let c = convolution_constant(&model, n, &x, &y).unwrap();
        assert!(c.lo() >= prev, "n={n}");
        prev = c.lo();
    }
    assert!(convolution_constant(&model, 0, &x, &y).is_err());
    let doubled = ReferenceModel::new(0, 2.0).unwrap();
    let c1 = convolution_constant(&model, 8, &x, &y).unwrap();
    let c2 = convolution_constant(&doubled, 8, &x, &y).unwrap();
    assert!((c2.mid() / c1.mid() - 2.0).abs() < 1e-12);
}

#[test]
fn published_closure_figures() {
    let rep = nk_closure(dec("8.421739e-12"), dec("482.6"), dec("1.1e4")).unwrap();
    assert!(rep.verified);
    assert_eq!(format!("{:.6e}", rep.product.mid()), "8.941529e-5");
    let eps = transfer_error(dec("0.05"), Interval::ONE, Interval::ONE, 3, None).unwrap().eps_total;
    let torus = torus_closure(dec("8.421739e-12"), eps, dec("482.6"), dec("1.1e4")).unwrap();
    assert!(torus.verified);
    assert!(nk_closure(Interval::point(-1.0), Interval::ONE, Interval::ONE).is_err());
}

#[test]
fn zero_radius_sums_no_images() {
    let b = image_overlap_bound(dec("0.05"), 0).unwrap();
    assert!(b.total.is_zero());
    assert!((b.nearest_image.log10().mid() + 1714.526).abs() < 1e-3);
    let t = transfer_error(dec("0.05"), Interval::ONE, Interval::ONE, 0, None).unwrap();
    assert_eq!(t.eps_total, Interval::ZERO);
}

#[test]
fn transfer_error_is_consistent_with_declared_values() {
    let t = transfer_error(dec("0.05"), Interval::ONE, Interval::ONE, 3, Some(dec("1e-300"))).unwrap();
    assert_eq!(t.consistent_with_declared, Some(true));
    assert_eq!(t.effective(), dec("1e-300"));
    assert!(t.overlap.total.log10().hi() < -1713.0);
    let loose = transfer_error(dec("0.5"), Interval::ONE, Interval::ONE, 3, Some(dec("1e-300"))).unwrap();
    assert_eq!(loose.consistent_with_declared, Some(false));
    assert_eq!(loose.effective(), loose.eps_total);
    assert!(transfer_error(dec("0.05"), dec("0.5"), Interval::ONE, 3, None).is_err());
    assert!(image_overlap_bound(Interval::ZERO, 3).is_err());
}

#[test]
fn wide_gaussians_extend_the_explicit_radius() {
    let b = image_overlap_bound(dec("8.0"), 1).unwrap();
    assert!(b.explicit_radius > 1);
}

#[test]
fn stretching_penalty_sums_weighted_energies() {
    let mut e = BTreeMap::new();
    e.insert(1, Interval::point(4.0));
    e.insert(4, Interval::point(1.0));
    let spectrum = EnergySpectrum::new(e).unwrap();
    // 1·2 + 128·1
    assert!(stretching_penalty(&spectrum, Interval::point(0.5)).unwrap().contains(65.0));
    let mut bad = BTreeMap::new();
    bad.insert(2, Interval::point(-1.0));
    assert!(EnergySpectrum::new(bad).is_err());
}
