//! Linear operators on monomials and the recursion source term.
//!
//! All operators are defined on a single monomial `T_a = T_{a1} ... T_{ar}` and
//! extended linearly:
//!
//! * `D1(T_a) = sum_k T_{a1} ... T_{ak + 1} ... T_{ar}`
//! * `D2(T_a) = sum_k T_{a1} ... T_{ak + 2} ... T_{ar}`
//! * `L(T_a)  = sum_{i < j} T_{a1} ... T_{ai + 1} ... T_{aj + 1} ... T_{ar}`,
//!   which equals `(D1^2 - D2) / 2`
//! * `H(T_a)  = -1/2 sum_k sum_{l=1}^{ak - 1} C(ak, l) T_{1+l} T_{1+ak-l} prod_{i != k} T_{ai}`
//!
//! Work is done per distinct part value with multiplicities, so a monomial like
//! `T_2^9` costs one evaluation rather than nine. Large inputs are mapped across
//! the rayon pool and merged; addition is commutative so the result does not
//! depend on scheduling.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::partition::{Partition, Parts};
use crate::poly::{Poly, TermMap};
use crate::rational::binomial;

/// Polynomials with fewer terms than this are processed on the calling thread.
const PAR_THRESHOLD: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("H is only defined here on parts >= 2; monomial {0} has a part equal to 1")]
    PartOne(Partition),
    #[error("source term A_n needs n >= 2, got {0}")]
    SourceOrder(u32),
}

fn acc_add(map: &mut TermMap<BigInt>, key: Partition, c: BigInt) {
    match map.get_mut(&key) {
        Some(x) => *x += c,
        None => {
            map.insert(key, c);
        }
    }
}

fn merge_maps(mut a: TermMap<BigInt>, mut b: TermMap<BigInt>) -> TermMap<BigInt> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    for (k, v) in b {
        acc_add(&mut a, k, v);
    }
    a
}

/// Applies a per-term generator and collects the results.
fn apply<F>(p: &Poly, f: F) -> Result<Poly, OpError>
where
    F: Fn(&Partition, &BigInt, &mut TermMap<BigInt>) -> Result<(), OpError> + Sync,
{
    let terms: Vec<(&Partition, &BigInt)> = p.iter().collect();
    let map = if terms.len() < PAR_THRESHOLD {
        let mut acc = TermMap::default();
        for (part, c) in terms {
            f(part, c, &mut acc)?;
        }
        acc
    } else {
        terms
            .par_iter()
            .try_fold(TermMap::default, |mut acc, (part, c)| {
                f(part, c, &mut acc)?;
                Ok(acc)
            })
            .try_reduce(TermMap::default, |a, b| Ok(merge_maps(a, b)))?
    };
    Ok(Poly::from_map(map))
}

/// Increments the first occurrence of `v` by one. Everything before that
/// position is `>= v + 1`, so the result stays sorted.
fn bump_first(parts: &mut Parts, v: u16) {
    let i = parts.iter().position(|&p| p == v).expect("part present");
    parts[i] = v + 1;
}

fn insert_sorted(parts: &mut Parts, v: u16) {
    let pos = parts.iter().position(|&p| p < v).unwrap_or(parts.len());
    parts.insert(pos, v);
}

fn d1_term(part: &Partition, c: &BigInt, acc: &mut TermMap<BigInt>) {
    for (v, m) in part.runs() {
        let mut parts: Parts = part.parts().into();
        bump_first(&mut parts, v);
        acc_add(acc, Partition::from_sorted(parts), c * m);
    }
}

fn d2_term(part: &Partition, c: &BigInt, acc: &mut TermMap<BigInt>) {
    for (v, m) in part.runs() {
        let mut parts: Parts = part.parts().into();
        let i = parts.iter().position(|&p| p == v).expect("part present");
        parts.remove(i);
        insert_sorted(&mut parts, v + 2);
        acc_add(acc, Partition::from_sorted(parts), c * m);
    }
}

fn l_term(part: &Partition, c: &BigInt, acc: &mut TermMap<BigInt>) {
    let runs = part.runs();
    for (i, &(u, mu)) in runs.iter().enumerate() {
        if mu >= 2 {
            let mut parts: Parts = part.parts().into();
            bump_first(&mut parts, u);
            bump_first(&mut parts, u);
            let pairs = mu * (mu - 1) / 2;
            acc_add(acc, Partition::from_sorted(parts), c * pairs);
        }
        for &(v, mv) in &runs[i + 1..] {
            let mut parts: Parts = part.parts().into();
            bump_first(&mut parts, u);
            bump_first(&mut parts, v);
            acc_add(acc, Partition::from_sorted(parts), c * (mu * mv));
        }
    }
}

/// Integer splitting coefficients for H on a single part `v >= 2`: pairs
/// `(1 + l, 1 + v - l)` for `l <= v / 2` with the `-1/2` folded in. The two
/// orderings of an off-centre pair cancel the half; the central term uses
/// `C(v, v/2) / 2`, an integer because central binomials are even.
fn h_split(v: u16) -> Vec<(u16, u16, BigInt)> {
    let mut out = Vec::with_capacity(v as usize / 2);
    for l in 1..=v / 2 {
        let b = binomial(v as u64, l as u64);
        let coeff = if 2 * l == v {
            let (half, rem) = b.div_rem(&BigInt::from(2));
            assert!(rem.is_zero(), "central binomial C({v},{l}) must be even");
            -half
        } else {
            -b
        };
        out.push((1 + v - l, 1 + l, coeff));
    }
    out
}

struct SplitTable(Vec<Vec<(u16, u16, BigInt)>>);

impl SplitTable {
    fn for_poly(p: &Poly) -> Self {
        let max = p.iter().filter_map(|(q, _)| q.first()).max().unwrap_or(0);
        SplitTable(
            (0..=max)
                .map(|v| if v >= 2 { h_split(v) } else { Vec::new() })
                .collect(),
        )
    }
}

fn h_term(
    table: &SplitTable,
    part: &Partition,
    c: &BigInt,
    acc: &mut TermMap<BigInt>,
) -> Result<(), OpError> {
    if part.parts().contains(&1) {
        return Err(OpError::PartOne(part.clone()));
    }
    for (v, m) in part.runs() {
        let rest = part.remove_one(v).expect("part present");
        let cm = c * m;
        for (hi, lo, k) in &table.0[v as usize] {
            let mut parts: Parts = rest.parts().into();
            insert_sorted(&mut parts, *hi);
            insert_sorted(&mut parts, *lo);
            acc_add(acc, Partition::from_sorted(parts), &cm * k);
        }
    }
    Ok(())
}

pub fn d1(p: &Poly) -> Poly {
    apply(p, |q, c, acc| {
        d1_term(q, c, acc);
        Ok(())
    })
    .expect("D1 is total")
}

pub fn d2(p: &Poly) -> Poly {
    apply(p, |q, c, acc| {
        d2_term(q, c, acc);
        Ok(())
    })
    .expect("D2 is total")
}

/// Pair-sum form of `L`.
pub fn op_l(p: &Poly) -> Poly {
    apply(p, |q, c, acc| {
        l_term(q, c, acc);
        Ok(())
    })
    .expect("L is total")
}

/// `L` through its defining identity `(D1^2 - D2) / 2`. Slower; kept as an
/// independent route for checking [`op_l`].
pub fn op_l_via_d(p: &Poly) -> Poly {
    let twice = &d1(&d1(p)) - &d2(p);
    let halved = twice.iter().map(|(q, c)| {
        let (h, r) = c.div_rem(&BigInt::from(2));
        assert!(r.is_zero(), "D1^2 - D2 must have even coefficients");
        (q.clone(), h)
    });
    Poly::from_terms(halved)
}

pub fn op_h(p: &Poly) -> Result<Poly, OpError> {
    let table = SplitTable::for_poly(p);
    apply(p, |q, c, acc| h_term(&table, q, c, acc))
}

/// `A_n = -sum_{k=1}^{n-1} C(n, k) T_{1+k} T_{1+n-k} T_n`.
pub fn source_an(n: u32) -> Result<Poly, OpError> {
    if n < 2 {
        return Err(OpError::SourceOrder(n));
    }
    let n16 = n as u16;
    let mut out = Poly::zero();
    for k in 1..n16 {
        let part = Partition::new([1 + k, 1 + n16 - k, n16]).expect("positive parts");
        out.add_term(part, -binomial(n as u64, k as u64));
    }
    Ok(out)
}

/// One step of the recursion: `R_{n+1} = A_n + L(R_n) + H(R_n)`, computed in a
/// single pass over the terms of `r_n`.
pub fn recursion_step(r_n: &Poly, n: u32) -> Result<Poly, OpError> {
    let table = SplitTable::for_poly(r_n);
    let lh = apply(r_n, |q, c, acc| {
        l_term(q, c, acc);
        h_term(&table, q, c, acc)
    })?;
    Ok(lh + source_an(n)?)
}

/// Helper for tests and callers building single monomials.
pub fn mono(parts: &[u16]) -> Poly {
    Poly::monomial(
        Partition::new(parts.iter().copied()).expect("positive parts"),
        BigInt::one(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn d_examples() {
        assert_eq!(d1(&p("T2*T2")), p("2*T3*T2"));
        assert_eq!(d2(&p("T3")), p("T5"));
        assert_eq!(d1(&d1(&p("T2"))), p("T4"));
        assert!((&d1(&d1(&p("T2"))) - &d2(&p("T2"))).is_zero());
        assert!(op_l(&p("T2")).is_zero());
        // D2 reorders: (3,2) -> (5,2) and (4,3)
        assert_eq!(d2(&p("T3*T2")), p("T5*T2 + T3*T4"));
    }

    #[test]
    fn l_examples() {
        assert_eq!(op_l(&p("T2*T2")), p("T3^2"));
        assert_eq!(op_l(&p("T2*T3")), p("T3*T4"));
        assert_eq!(op_l(&p("T2^3")), p("3*T3^2*T2"));
        assert_eq!(op_l_via_d(&p("T2^3")), p("3*T3^2*T2"));
    }

    #[test]
    fn h_examples() {
        assert_eq!(op_h(&p("T3")).unwrap(), p("-3*T2*T3"));
        assert_eq!(op_h(&p("T2^3")).unwrap(), p("-3*T2^4"));
        assert_eq!(op_h(&p("T4")).unwrap(), p("-4*T2*T4 - 3*T3^2"));
        assert!(matches!(op_h(&p("T1*T3")), Err(OpError::PartOne(_))));
    }

    #[test]
    fn source_examples() {
        assert_eq!(source_an(2).unwrap(), p("-2*T2^3"));
        assert_eq!(source_an(3).unwrap(), p("-6*T2*T3^2"));
        let a8 = source_an(8).unwrap();
        assert_eq!(
            a8.coeff_of(&Partition::new([8, 5, 5]).unwrap()),
            BigInt::from(-70)
        );
        for (q, _) in a8.iter() {
            assert_eq!(q.weight(), 18);
            assert_eq!(q.len(), 3);
        }
        assert_eq!(source_an(1), Err(OpError::SourceOrder(1)));
    }

    #[test]
    fn r4_from_r3() {
        let r4 = recursion_step(&p("-2*T2^3"), 3).unwrap();
        assert_eq!(r4, p("-12*T2*T3^2 + 6*T2^4"));
    }

    #[test]
    fn split_coefficients() {
        // v = 4: l=1 -> (4,2) with -4, l=2 -> (3,3) with -C(4,2)/2 = -3
        let s = h_split(4);
        assert_eq!(s, vec![(4, 2, BigInt::from(-4)), (3, 3, BigInt::from(-3))]);
    }
}
