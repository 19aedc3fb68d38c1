mod common;

use common::{mono_poly, monomial, poly, t};
use gammaflow::ops::{d1, op_h, op_l, op_l_via_d};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn l_equals_half_d1_squared_minus_d2(p in poly()) {
        prop_assert_eq!(op_l(&p), op_l_via_d(&p));
    }

    #[test]
    fn l_product_rule(p in poly(), m in 2u16..=12) {
        let lhs = op_l(&(&p * &t(m)));
        let rhs = &(&op_l(&p) * &t(m)) + &(&d1(&p) * &t(m + 1));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn l_keeps_degree_and_h_raises_it(b in monomial()) {
        let r = b.len();
        for (a, _) in op_l(&mono_poly(&b)).iter() {
            prop_assert_eq!(a.len(), r);
        }
        let h = op_h(&mono_poly(&b)).unwrap();
        prop_assert!(!h.is_zero());
        for (a, _) in h.iter() {
            prop_assert_eq!(a.len(), r + 1);
        }
    }

    #[test]
    fn index_bounds(b in monomial()) {
        let top = b.first().unwrap();
        for (a, _) in op_h(&mono_poly(&b)).unwrap().iter() {
            prop_assert!(a.first().unwrap() <= top);
        }
        for (a, _) in op_l(&mono_poly(&b)).iter() {
            prop_assert!(a.first().unwrap() >= top);
        }
    }

    #[test]
    fn operators_are_linear(p in poly(), q in poly()) {
        let s = &p + &q;
        prop_assert_eq!(op_l(&s), &op_l(&p) + &op_l(&q));
        prop_assert_eq!(op_h(&s).unwrap(), &op_h(&p).unwrap() + &op_h(&q).unwrap());
    }
}
