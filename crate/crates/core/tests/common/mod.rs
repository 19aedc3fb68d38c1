#![allow(dead_code)]

use gammaflow::{Partition, Poly};
use num_bigint::BigInt;
use proptest::prelude::*;

/// A monomial with parts in `[2, 12]` and length 1 to 6.
pub fn monomial() -> impl Strategy<Value = Partition> {
    prop::collection::vec(2u16..=12, 1..=6).prop_map(|v| Partition::new(v).unwrap())
}

/// A small polynomial over monomials with parts >= 2.
pub fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((monomial(), -50i64..=50), 0..=6).prop_map(|terms| {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, BigInt::from(c));
        }
        p
    })
}

pub fn mono_poly(p: &Partition) -> Poly {
    Poly::monomial(p.clone(), BigInt::from(1))
}

pub fn t(m: u16) -> Poly {
    Poly::monomial(Partition::new([m]).unwrap(), BigInt::from(1))
}
