//! Invariants that cut across modules, checked on random small instances.

use std::sync::Arc;

use fqapprox::dioph::{measure_phi_f, shell_hits, ApproxFn};
use fqapprox::ffield::{GridSpec, QExp};
use fqapprox::goodfn::sublevel_measure;
use fqapprox::latdyn::{reduce_lattice, LaurentMatrix};
use fqapprox::ultracalc::{AnalyticMap, MultiPoly};
use fqapprox::{AbsValue, Ball, FieldSpec, Laurent, Poly};
use proptest::prelude::*;

fn f3() -> Arc<FieldSpec> {
    FieldSpec::with_order(3).unwrap()
}

/// Laurent polynomial with digits from `code`, top degree `top`.
fn lp(spec: &Arc<FieldSpec>, code: u64, top: i64) -> Laurent {
    Poly::from_code(spec, code, 5).to_laurent().shift(top - 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn absolute_value_is_ultrametric(a in 0u64..243, b in 0u64..243, ta in -4i64..4, tb in -4i64..4) {
        let s = f3();
        let (x, y) = (lp(&s, a, ta), lp(&s, b, tb));
        prop_assert!(x.checked_add(&y).unwrap().abs() <= x.abs().max(y.abs()));
        let prod = x.checked_mul(&y).unwrap().abs();
        let expect = match (x.abs(), y.abs()) {
            (AbsValue::Pow(i), AbsValue::Pow(j)) => AbsValue::Pow(i + j),
            _ => AbsValue::Zero,
        };
        prop_assert_eq!(prod, expect);
    }

    #[test]
    fn minima_multiply_to_determinant(codes in prop::collection::vec(0u64..243, 9), tops in prop::collection::vec(-2i64..3, 9)) {
        let s = f3();
        let rows: Vec<Vec<Laurent>> = (0..3).map(|i| (0..3).map(|j| lp(&s, codes[3 * i + j], tops[3 * i + j])).collect()).collect();
        let m = LaurentMatrix::from_rows(&s, rows).unwrap();
        let det = m.det().unwrap();
        prop_assume!(!det.is_zero());
        let r = reduce_lattice(&m).unwrap();
        prop_assert_eq!(r.minima_sum(), det.abs().exponent().unwrap());
        prop_assert!(r.minima.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sublevel_measure_grows_with_eps(c in 1u32..3, k in 1u32..4, shift in 0u64..9) {
        let s = f3();
        let g = MultiPoly::parse(&s, 1, &format!("{c}*x^{k} + ({})", lp(&s, shift, -1).body_string())).unwrap();
        let ball = Ball::centered(&s, 1, 0);
        let mut prev = None;
        for e in -4..=1 {
            let r = sublevel_measure(&g, &ball, AbsValue::Pow(e), 6).unwrap();
            prop_assert!(r.upper <= ball.measure());
            if let Some(p) = prev {
                prop_assert!(p <= r.lower);
            }
            prev = Some(r.upper);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn phi_f_grows_with_delta(t in 1i64..3) {
        let s = f3();
        let m = AnalyticMap::veronese(&s, 2);
        let grid = GridSpec::unit(&s, 1, 4).unwrap();
        let a = measure_phi_f(&m, t, QExp::from_integer(-2), &grid).unwrap();
        let b = measure_phi_f(&m, t, QExp::from_integer(-1), &grid).unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn shell_hits_are_subadditive(tau in 1i64..4) {
        let s = f3();
        let m = AnalyticMap::veronese(&s, 2);
        let grid = GridSpec::unit(&s, 1, 4).unwrap();
        let h = shell_hits(&m, &ApproxFn::norm_power(tau), false, 0, 3, &grid).unwrap();
        for mid in 0..3 {
            let whole = h.measure(0, 3).to_rational();
            let split = h.measure(0, mid).to_rational() + h.measure(mid + 1, 3).to_rational();
            prop_assert!(whole <= split);
            prop_assert!(h.measure(0, mid) <= h.measure(0, 3));
        }
    }
}
