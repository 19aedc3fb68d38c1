mod common;

use std::collections::BTreeMap;

use common::{monomial, poly};
use gammaflow::format::{parse, serialize};
use gammaflow::rational::ratio;
use gammaflow::Rational;
use proptest::prelude::*;

fn assignment() -> impl Strategy<Value = BTreeMap<u16, Rational>> {
    prop::collection::btree_map(2u16..=12, (-9i64..=9, 1i64..=5), 0..=6)
        .prop_map(|m| m.into_iter().map(|(k, (a, b))| (k, ratio(a, b))).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn coeff_of_is_additive(a in poly(), b in poly(), alpha in monomial()) {
        prop_assert_eq!((&a + &b).coeff_of(&alpha), a.coeff_of(&alpha) + b.coeff_of(&alpha));
    }

    #[test]
    fn serialization_round_trips(p in poly(), n in 0u32..30) {
        let text = serialize(&p, n);
        let back = parse(text.as_bytes()).unwrap();
        prop_assert_eq!(back.n, n);
        prop_assert_eq!(&back.poly, &p);
        prop_assert_eq!(serialize(&back.poly, n), text);
    }

    #[test]
    fn partial_eval_composes(p in poly(), x in assignment(), y in assignment()) {
        prop_assert_eq!(p.partial_eval(&BTreeMap::new()), p.to_rational());
        let y: BTreeMap<u16, Rational> =
            y.into_iter().filter(|(k, _)| !x.contains_key(k)).collect();
        let xy = p.partial_eval(&x).partial_eval(&y);
        let yx = p.partial_eval(&y).partial_eval(&x);
        prop_assert_eq!(&xy, &yx);
        let mut both = x.clone();
        both.extend(y);
        prop_assert_eq!(&xy, &p.partial_eval(&both));
    }
}
