mod common;

use std::cmp::Ordering;

use astro_float::RoundingMode;
use nkcert::interval::{
    arith, exact_decimal, inf_norm, parse_decimal, ArithOp, IntervalMatrix, LogMagnitude,
};
use nkcert::Interval;
use proptest::prelude::*;

use common::{big, cmp, encloses, encloses_pair, Oracle, P};

fn finite() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0, -60i32..60).prop_map(|(m, e)| m * 10f64.powi(e))
}

fn interval() -> impl Strategy<Value = Interval> {
    (finite(), 0.0f64..1.0, 0i32..12).prop_map(|(a, w, e)| {
        let width = w * a.abs().max(1e-300) * 10f64.powi(-e);
        Interval::new(a, a + width).unwrap()
    })
}

/// A point of `x` selected by `t ∈ [0, 1]`.
fn pick(x: Interval, t: f64) -> f64 {
    (x.lo() + t * (x.hi() - x.lo())).clamp(x.lo(), x.hi())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arithmetic_contains_exact_results(a in interval(), b in interval(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let (x, y) = (pick(a, s), pick(b, t));
        let (bx, by) = (big(x), big(y));
        let sum = arith(ArithOp::Add, a, b).unwrap();
        prop_assert!(encloses_pair(sum, &bx.add(&by, P, RoundingMode::Down), &bx.add(&by, P, RoundingMode::Up)));
        let diff = arith(ArithOp::Sub, a, b).unwrap();
        prop_assert!(encloses_pair(diff, &bx.sub(&by, P, RoundingMode::Down), &bx.sub(&by, P, RoundingMode::Up)));
        let prod = arith(ArithOp::Mul, a, b).unwrap();
        prop_assert!(encloses_pair(prod, &bx.mul(&by, P, RoundingMode::Down), &bx.mul(&by, P, RoundingMode::Up)));
        if !b.contains_zero() {
            let quot = arith(ArithOp::Div, a, b).unwrap();
            prop_assert!(encloses_pair(quot, &bx.div(&by, P, RoundingMode::Down), &bx.div(&by, P, RoundingMode::Up)));
        } else {
            prop_assert!(arith(ArithOp::Div, a, b).is_err());
        }
    }

    #[test]
    fn elementary_functions_contain_exact_results(x in -700.0f64..700.0, w in 0.0f64..1e-3, t in 0.0f64..1.0) {
        let mut oracle = Oracle::default();
        let a = Interval::new(x, x + w).unwrap();
        let p = pick(a, t);
        let (lo, hi) = oracle.exp(p);
        prop_assert!(encloses_pair(a.exp().unwrap(), &lo, &hi));
        let pos = Interval::new(x.abs() + 1e-3, x.abs() + 1e-3 + w).unwrap();
        let q = pick(pos, t);
        let (lo, hi) = oracle.ln(q);
        prop_assert!(encloses_pair(pos.ln().unwrap(), &lo, &hi));
        let bq = big(q);
        let (lo, hi) = (bq.sqrt(P, RoundingMode::Down), bq.sqrt(P, RoundingMode::Up));
        prop_assert!(encloses_pair(pos.sqrt(), &lo, &hi));
    }

    #[test]
    fn powers_contain_exact_results(a in interval(), n in 0u32..9, t in 0.0f64..1.0) {
        let p = big(pick(a, t));
        let exact = p.powi(n as usize, 4096, RoundingMode::ToEven);
        prop_assert!(encloses(a.powi(n), &exact));
        prop_assert!(a.sqr().lo() >= 0.0);
    }

    #[test]
    fn inclusion_isotonic(a in interval(), b in interval(), grow in 0.0f64..1.0) {
        let wide = Interval::new(a.lo() - grow * a.mag(), a.hi() + grow * a.mag()).unwrap();
        prop_assert!((wide + b).encloses(&(a + b)));
        prop_assert!((wide * b).encloses(&(a * b)));
        prop_assert!((wide - b).encloses(&(a - b)));
        prop_assert!(wide.sqr().encloses(&a.sqr()));
        prop_assert!(wide.abs().encloses(&a.abs()));
    }

    #[test]
    fn decimal_literals_are_tight_enclosures(mantissa in 1u64..10_000_000_000, exp in -320i32..300, neg in any::<bool>()) {
        let text = format!("{}{mantissa}e{exp}", if neg { "-" } else { "" });
        let mut oracle = Oracle::default();
        let exact = oracle.decimal(&text);
        let Ok(iv) = parse_decimal(&text) else {
            prop_assert_eq!(cmp(&exact.abs(), &big(f64::MAX)), Ordering::Greater);
            return Ok(());
        };
        prop_assert!(encloses(iv, &exact));
        if iv.lo() != 0.0 && iv.lo().is_normal() && iv.hi().is_normal() {
            prop_assert!(iv.is_point() || iv.hi() == iv.lo().next_up());
        }
    }

    #[test]
    fn exact_decimal_round_trips(x in finite()) {
        let text = exact_decimal(x);
        prop_assert_eq!(parse_decimal(&text).unwrap(), Interval::point(x));
    }

    #[test]
    fn matrix_product_contains_point_product(vals in proptest::collection::vec(-10.0f64..10.0, 18)) {
        let a = IntervalMatrix::from_points(3, 3, &vals[..9]);
        let b = IntervalMatrix::from_points(3, 3, &vals[9..]);
        let c = a.mul(&b);
        for i in 0..3 {
            for k in 0..3 {
                let mut s = big(0.0);
                for j in 0..3 {
                    s = s.add(&big(vals[i * 3 + j]).mul(&big(vals[9 + j * 3 + k]), P, RoundingMode::ToEven), P, RoundingMode::ToEven);
                }
                prop_assert!(encloses(c[(i, k)], &s));
            }
        }
        prop_assert!(inf_norm(&c).hi() <= (inf_norm(&a) * inf_norm(&b)).hi() * (1.0 + 1e-12));
    }

    #[test]
    fn log_magnitudes_track_products(x in 1e-300f64..1e300, y in 1e-300f64..1e300) {
        let lx = LogMagnitude::from_interval(Interval::point(x)).unwrap();
        let ly = LogMagnitude::from_interval(Interval::point(y)).unwrap();
        let prod = lx.mul(&ly);
        let expected = x.log10() + y.log10();
        prop_assert!((prod.log10().mid() - expected).abs() < 1e-9);
        prop_assert!(lx.to_interval().unwrap().contains(x));
    }
}

#[test]
fn empty_interval_poisons_everything() {
    let e = Interval::EMPTY;
    let one = Interval::ONE;
    for r in [e + one, one - e, e * one, one / e, e.sqr(), e.abs(), e.sqrt()] {
        assert!(r.is_empty());
    }
    assert!(arith(ArithOp::Add, e, one).is_err());
    assert!(e.exp().is_err());
}

#[test]
fn tiny_log_magnitudes_stay_representable() {
    let tiny = nkcert::interval::log10_of_exp(Interval::point(3946.0)).unwrap();
    let lo = tiny.log10();
    assert!((lo.mid() + 3946.0 / std::f64::consts::LN_10).abs() < 1e-9);
    assert_eq!(tiny.to_interval().unwrap().lo(), 0.0);
}
