//! Exact cumulant and moment sequences.
//!
//! Cumulants are classical (unnormalized): `K_n` is the n-th derivative at 0 of
//! the log moment generating function. Everything is exact rational arithmetic.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{LazyLock, RwLock};

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::closed_forms::{extract_an, leading_form};
use crate::rational::{binomial, factorial, format_rational, int, pow, Rational};
use crate::table::RnTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CumulantError {
    #[error("cumulant sequences start at order 2, got order {0}")]
    CumulantStart(u32),
    #[error("moment sequences start at order 1, got order {0}")]
    MomentStart(u32),
    #[error("orders must be contiguous; order {0} is missing")]
    Gap(u32),
    #[error("sequence is empty")]
    Empty,
    #[error("K_2 must be non-negative, got {0}")]
    NegativeVariance(String),
    #[error("E[X^2] < E[X]^2")]
    CauchySchwarz,
    #[error("odd cumulant K_{0} is nonzero in a sequence marked symmetric")]
    NotSymmetric(u32),
    #[error("point weights must be positive")]
    NonPositiveWeight,
    #[error("point weights sum to {0}, more than 1")]
    MassExceedsOne(String),
    #[error("scale parameter must be positive")]
    NonPositiveScale,
    #[error("max order must be at least {min}, got {got}")]
    MaxOrder { min: u32, got: u32 },
}

static BERNOULLI: LazyLock<RwLock<Vec<Rational>>> =
    LazyLock::new(|| RwLock::new(vec![Rational::one()]));

/// `B_n` with `B_1 = -1/2`, from `sum_{k=0}^{n} C(n+1, k) B_k = 0`.
pub fn bernoulli(n: u32) -> Rational {
    let n = n as usize;
    if let Some(b) = BERNOULLI.read().unwrap().get(n) {
        return b.clone();
    }
    let mut table = BERNOULLI.write().unwrap();
    while table.len() <= n {
        let m = table.len() as u64;
        let mut acc = Rational::zero();
        for (k, b) in table.iter().enumerate() {
            acc += Rational::from_integer(binomial(m + 1, k as u64)) * b;
        }
        let bm = -acc / Rational::from_integer((m + 1).into());
        table.push(bm);
    }
    table[n].clone()
}

/// Where a sequence came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Uniform,
    Laplace { b: Rational },
    Rademacher,
    DiscreteSymmetric { points: Vec<(Rational, Rational)> },
    Gaussian { variance: Rational },
    FromMoments,
    Recovered,
    Combined,
    File,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Uniform => f.write_str("uniform"),
            Provenance::Laplace { b } => write!(f, "laplace(b={})", format_rational(b)),
            Provenance::Rademacher => f.write_str("rademacher"),
            Provenance::DiscreteSymmetric { points } => {
                let pts: Vec<String> = points
                    .iter()
                    .map(|(x, p)| format!("{}@{}", format_rational(p), format_rational(x)))
                    .collect();
                write!(f, "discrete({})", pts.join(","))
            }
            Provenance::Gaussian { variance } => {
                write!(f, "gaussian(var={})", format_rational(variance))
            }
            Provenance::FromMoments => f.write_str("from-moments"),
            Provenance::Recovered => f.write_str("recovered"),
            Provenance::Combined => f.write_str("combined"),
            Provenance::File => f.write_str("file"),
        }
    }
}

fn check_contiguous(values: &BTreeMap<u32, Rational>, start: u32) -> Result<(), CumulantError> {
    for (i, &k) in values.keys().enumerate() {
        if k != start + i as u32 {
            return Err(CumulantError::Gap(start + i as u32));
        }
    }
    Ok(())
}

/// `K_2, ..., K_N` of a centred variable (`K_1 = 0` is implicit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CumulantSeq {
    values: BTreeMap<u32, Rational>,
    provenance: Provenance,
    symmetric: bool,
}

impl CumulantSeq {
    pub fn new(
        values: BTreeMap<u32, Rational>,
        provenance: Provenance,
    ) -> Result<Self, CumulantError> {
        let first = *values.keys().next().ok_or(CumulantError::Empty)?;
        if first != 2 {
            return Err(CumulantError::CumulantStart(first));
        }
        check_contiguous(&values, 2)?;
        if values[&2].is_negative() {
            return Err(CumulantError::NegativeVariance(format_rational(
                &values[&2],
            )));
        }
        Ok(CumulantSeq {
            values,
            provenance,
            symmetric: false,
        })
    }

    /// Marks the sequence symmetric after checking every odd order is zero.
    pub fn into_symmetric(mut self) -> Result<Self, CumulantError> {
        if let Some((&k, _)) = self
            .values
            .iter()
            .find(|(&k, v)| k % 2 == 1 && !v.is_zero())
        {
            return Err(CumulantError::NotSymmetric(k));
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn get(&self, n: u32) -> Option<&Rational> {
        self.values.get(&n)
    }

    pub fn max_order(&self) -> u32 {
        *self.values.keys().next_back().expect("nonempty")
    }

    pub fn values(&self) -> &BTreeMap<u32, Rational> {
        &self.values
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Keeps orders up to `max`.
    pub fn truncated(&self, max: u32) -> Self {
        CumulantSeq {
            values: self
                .values
                .range(..=max)
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
            provenance: self.provenance.clone(),
            symmetric: self.symmetric,
        }
    }

    /// Variable assignment `T_n -> K_n` for polynomial evaluation.
    pub fn assignment(&self) -> BTreeMap<u16, Rational> {
        self.values
            .iter()
            .map(|(&k, v)| (k as u16, v.clone()))
            .collect()
    }
}

/// `E[X], E[X^2], ..., E[X^N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSeq {
    values: BTreeMap<u32, Rational>,
}

impl MomentSeq {
    pub fn new(values: BTreeMap<u32, Rational>) -> Result<Self, CumulantError> {
        let first = *values.keys().next().ok_or(CumulantError::Empty)?;
        if first != 1 {
            return Err(CumulantError::MomentStart(first));
        }
        check_contiguous(&values, 1)?;
        if let Some(m2) = values.get(&2) {
            if m2 < &(&values[&1] * &values[&1]) {
                return Err(CumulantError::CauchySchwarz);
            }
        }
        Ok(MomentSeq { values })
    }

    pub fn get(&self, n: u32) -> Option<&Rational> {
        self.values.get(&n)
    }

    pub fn max_order(&self) -> u32 {
        *self.values.keys().next_back().expect("nonempty")
    }

    pub fn values(&self) -> &BTreeMap<u32, Rational> {
        &self.values
    }
}

fn binom_q(n: u32, k: u32) -> Rational {
    Rational::from_integer(binomial(n as u64, k as u64))
}

fn need_order(max_order: u32, min: u32) -> Result<(), CumulantError> {
    if max_order < min {
        return Err(CumulantError::MaxOrder {
            min,
            got: max_order,
        });
    }
    Ok(())
}

fn symmetric_seq(
    max_order: u32,
    provenance: Provenance,
    even: impl Fn(u32) -> Rational,
) -> Result<CumulantSeq, CumulantError> {
    need_order(max_order, 2)?;
    let values = (2..=max_order)
        .map(|n| {
            (
                n,
                if n % 2 == 0 {
                    even(n)
                } else {
                    Rational::zero()
                },
            )
        })
        .collect();
    CumulantSeq::new(values, provenance)?.into_symmetric()
}

/// Uniform law on `[-1, 1]`: `K_n = 2^n B_n / n`.
pub fn cumulants_uniform(max_order: u32) -> Result<CumulantSeq, CumulantError> {
    symmetric_seq(max_order, Provenance::Uniform, |n| {
        pow(&int(2), n) * bernoulli(n) / int(n as i64)
    })
}

/// Laplace law with density `exp(-|x|/b) / 2b`: `K_{2j} = (2j)! b^{2j} / j`.
pub fn cumulants_laplace(b: &Rational, max_order: u32) -> Result<CumulantSeq, CumulantError> {
    if !b.is_positive() {
        return Err(CumulantError::NonPositiveScale);
    }
    symmetric_seq(max_order, Provenance::Laplace { b: b.clone() }, |n| {
        Rational::from_integer(factorial(n as u64)) * pow(b, n) / int(n as i64 / 2)
    })
}

/// Rademacher law: `K_n = 2^n (2^n - 1) B_n / n`.
pub fn cumulants_rademacher(max_order: u32) -> Result<CumulantSeq, CumulantError> {
    symmetric_seq(max_order, Provenance::Rademacher, |n| {
        let p = pow(&int(2), n);
        &p * (&p - int(1)) * bernoulli(n) / int(n as i64)
    })
}

/// Normal law with the given variance: `K_2 = variance`, all others zero.
pub fn cumulants_gaussian(
    variance: &Rational,
    max_order: u32,
) -> Result<CumulantSeq, CumulantError> {
    let v = variance.clone();
    symmetric_seq(
        max_order,
        Provenance::Gaussian {
            variance: v.clone(),
        },
        |n| {
            if n == 2 {
                v.clone()
            } else {
                Rational::zero()
            }
        },
    )
}

/// `sum_j (p_j / 2)(delta_{x_j} + delta_{-x_j})`, with any mass deficit at 0.
pub fn cumulants_discrete_symmetric(
    points: &[(Rational, Rational)],
    max_order: u32,
) -> Result<CumulantSeq, CumulantError> {
    need_order(max_order, 2)?;
    if points.iter().any(|(_, p)| !p.is_positive()) {
        return Err(CumulantError::NonPositiveWeight);
    }
    let total: Rational = points.iter().map(|(_, p)| p.clone()).sum();
    if total > Rational::one() {
        return Err(CumulantError::MassExceedsOne(format_rational(&total)));
    }
    let moments = (1..=max_order)
        .map(|n| {
            let m = if n % 2 == 1 {
                Rational::zero()
            } else {
                points.iter().map(|(x, p)| p * pow(x, n)).sum()
            };
            (n, m)
        })
        .collect();
    let k = moments_to_cumulants(&MomentSeq::new(moments)?)?;
    CumulantSeq {
        provenance: Provenance::DiscreteSymmetric {
            points: points.to_vec(),
        },
        ..k
    }
    .into_symmetric()
}

/// `K_n = m_n - sum_{j=1}^{n-1} C(n-1, j-1) K_j m_{n-j}` with `m_0 = 1`.
/// `K_1 = m_1` is used internally and dropped from the output, whose orders
/// start at 2 and are shift invariant.
pub fn moments_to_cumulants(m: &MomentSeq) -> Result<CumulantSeq, CumulantError> {
    let max = m.max_order();
    need_order(max, 2)?;
    let moment = |i: u32| {
        if i == 0 {
            Rational::one()
        } else {
            m.values[&i].clone()
        }
    };
    let mut k: BTreeMap<u32, Rational> = BTreeMap::new();
    for n in 1..=max {
        let mut v = moment(n);
        for j in 1..n {
            v -= binom_q(n - 1, j - 1) * &k[&j] * moment(n - j);
        }
        k.insert(n, v);
    }
    k.remove(&1);
    CumulantSeq::new(k, Provenance::FromMoments)
}

/// Inverse of [`moments_to_cumulants`] for a centred variable (`m_1 = 0`).
pub fn cumulants_to_moments(k: &CumulantSeq) -> MomentSeq {
    let max = k.max_order();
    let cum = |j: u32| {
        if j == 1 {
            Rational::zero()
        } else {
            k.values[&j].clone()
        }
    };
    let mut m: BTreeMap<u32, Rational> = BTreeMap::new();
    m.insert(1, Rational::zero());
    for n in 2..=max {
        let mut v = cum(n);
        for j in 1..n {
            v += binom_q(n - 1, j - 1) * cum(j) * &m[&(n - j)];
        }
        m.insert(n, v);
    }
    MomentSeq { values: m }
}

/// Cumulants of `X + lambda Y + shift` for independent `X ~ a`, `Y ~ b`, or of
/// `lambda X + shift` when `b` is absent. The shift does not affect orders >= 2.
/// The result covers the orders both inputs populate.
pub fn seq_shift_scale_convolve(
    a: &CumulantSeq,
    lambda: &Rational,
    _shift: &Rational,
    b: Option<&CumulantSeq>,
) -> CumulantSeq {
    let (values, symmetric) = match b {
        None => (
            a.values
                .iter()
                .map(|(&n, v)| (n, v * pow(lambda, n)))
                .collect(),
            a.symmetric,
        ),
        Some(b) => {
            let max = a.max_order().min(b.max_order());
            (
                (2..=max)
                    .map(|n| (n, &a.values[&n] + pow(lambda, n) * &b.values[&n]))
                    .collect(),
                a.symmetric && b.symmetric,
            )
        }
    };
    CumulantSeq {
        values,
        provenance: Provenance::Combined,
        symmetric,
    }
}

/// Closed-form `a_n` evaluated at `k`. `None` if `k` is too short.
pub fn a_closed_value(k: &CumulantSeq, n: u32) -> Option<Rational> {
    let form = leading_form(n).ok()?;
    let mut acc = Rational::zero();
    for (&(i, j), c) in &form.an_terms {
        let (ki, kj) = (k.get(i as u32)?, k.get(j as u32)?);
        acc += Rational::from_integer(c.clone()) * ki * kj;
    }
    Some(acc)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    /// `m` for the a-based conditions, `n` for the product condition, the order
    /// itself for positivity.
    pub index: u32,
    pub value: String,
    pub holds: bool,
    /// `a_{2m}` from the extracted polynomial, when a table was supplied and
    /// the order is within its limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_value: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub holds: bool,
    pub entries: Vec<ConditionEntry>,
}

impl Condition {
    fn from_entries(entries: Vec<ConditionEntry>) -> Self {
        Condition {
            holds: entries.iter().all(|e| e.holds),
            entries,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub up_to: u32,
    /// `a_{2m}(K) != 0` for `m >= 3`.
    pub star: Condition,
    /// `K_{2n} K_{2n+2} < 0` for `n >= 1`.
    pub star_star: Condition,
    /// `K_{2m} a_{2m}(K) < 0` for `m >= 3`.
    pub natural: Condition,
    /// `K_{2n} > 0`.
    pub even_positive: Condition,
    /// Orders where the closed form and the extracted `a_{2m}` disagree.
    pub formula_mismatches: Vec<u32>,
}

/// Evaluates the determinacy conditions on `k` through order `up_to`.
/// With a table, `a_{2m}` is also evaluated from the extracted polynomial for
/// `2m + 1 <= table_limit` and compared with the closed form.
pub fn check_conditions(
    k: &CumulantSeq,
    up_to: u32,
    table: Option<(&RnTable, u32)>,
) -> ConditionReport {
    let up_to = up_to.min(k.max_order());
    let even = |n: u32| k.get(n).cloned().unwrap_or_else(Rational::zero);
    let mut star = Vec::new();
    let mut natural = Vec::new();
    let mut mismatches = Vec::new();
    let assign = k.assignment();
    let mut m = 3;
    while 2 * m <= up_to {
        let n = 2 * m;
        let a = a_closed_value(k, n).expect("orders below 2m are populated");
        let table_value = table.and_then(|(t, limit)| {
            if n + 1 > limit {
                return None;
            }
            let r = t.get(n + 1).ok()?;
            extract_an(&r, n).eval(&assign).ok()
        });
        if let Some(tv) = &table_value {
            if tv != &a {
                mismatches.push(n);
            }
        }
        star.push(ConditionEntry {
            index: m,
            value: format_rational(&a),
            holds: !a.is_zero(),
            table_value: table_value.as_ref().map(format_rational),
        });
        let prod = even(n) * &a;
        natural.push(ConditionEntry {
            index: m,
            value: format_rational(&prod),
            holds: prod.is_negative(),
            table_value: None,
        });
        m += 1;
    }
    let mut star_star = Vec::new();
    let mut n = 1;
    while 2 * n + 2 <= up_to {
        let prod = even(2 * n) * even(2 * n + 2);
        star_star.push(ConditionEntry {
            index: n,
            value: format_rational(&prod),
            holds: prod.is_negative(),
            table_value: None,
        });
        n += 1;
    }
    let even_positive = (1..=up_to / 2)
        .map(|j| {
            let v = even(2 * j);
            ConditionEntry {
                index: 2 * j,
                value: format_rational(&v),
                holds: v.is_positive(),
                table_value: None,
            }
        })
        .collect();
    ConditionReport {
        up_to,
        star: Condition::from_entries(star),
        star_star: Condition::from_entries(star_star),
        natural: Condition::from_entries(natural),
        even_positive: Condition::from_entries(even_positive),
        formula_mismatches: mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), int(1));
        assert_eq!(bernoulli(1), ratio(-1, 2));
        assert_eq!(bernoulli(2), ratio(1, 6));
        assert_eq!(bernoulli(3), int(0));
        assert_eq!(bernoulli(4), ratio(-1, 30));
        assert_eq!(bernoulli(12), ratio(-691, 2730));
    }

    #[test]
    fn generators() {
        let u = cumulants_uniform(4).unwrap();
        assert_eq!(u.get(2), Some(&ratio(1, 3)));
        assert_eq!(u.get(4), Some(&ratio(-2, 15)));
        let l = cumulants_laplace(&int(1), 4).unwrap();
        assert_eq!((l.get(2), l.get(4)), (Some(&int(2)), Some(&int(12))));
        let r = cumulants_rademacher(6).unwrap();
        assert_eq!(r.get(4), Some(&int(-2)));
        assert_eq!(r.get(6), Some(&int(16)));
        assert!(r.is_symmetric());
        assert_eq!(r.get(5), Some(&int(0)));
    }

    #[test]
    fn discrete() {
        let half = cumulants_discrete_symmetric(&[(int(2), ratio(1, 4))], 8).unwrap();
        let ev: Vec<Rational> = [2, 4, 6, 8]
            .iter()
            .map(|&n| half.get(n).unwrap().clone())
            .collect();
        assert_eq!(ev, vec![int(1), int(1), int(-14), int(106)]);
        let one = cumulants_discrete_symmetric(&[(int(1), int(1))], 10).unwrap();
        assert_eq!(one.values(), cumulants_rademacher(10).unwrap().values());
        let p = cumulants_discrete_symmetric(&[(int(1), ratio(1, 2))], 2).unwrap();
        assert_eq!(p.get(2), Some(&ratio(1, 2)));
        assert!(matches!(
            cumulants_discrete_symmetric(&[(int(1), ratio(3, 4)), (int(2), ratio(1, 2))], 4),
            Err(CumulantError::MassExceedsOne(_))
        ));
    }

    #[test]
    fn moment_conversions() {
        let gauss = MomentSeq::new(
            [0, 1, 0, 3, 0, 15]
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as u32 + 1, int(v)))
                .collect(),
        )
        .unwrap();
        let k = moments_to_cumulants(&gauss).unwrap();
        assert_eq!(k.get(2), Some(&int(1)));
        assert!((3..=6).all(|n| k.get(n).unwrap().is_zero()));
        let rad = MomentSeq::new((1..=6).map(|i| (i, int((i % 2 == 0) as i64))).collect()).unwrap();
        let k = moments_to_cumulants(&rad).unwrap();
        assert_eq!((k.get(4), k.get(6)), (Some(&int(-2)), Some(&int(16))));
        assert_eq!(cumulants_to_moments(&k), rad);
    }

    #[test]
    fn validation() {
        let gap: BTreeMap<u32, Rational> = [(2, int(1)), (4, int(1))].into_iter().collect();
        assert_eq!(
            CumulantSeq::new(gap, Provenance::File),
            Err(CumulantError::Gap(3))
        );
        let neg: BTreeMap<u32, Rational> = [(2, int(-1))].into_iter().collect();
        assert!(matches!(
            CumulantSeq::new(neg, Provenance::File),
            Err(CumulantError::NegativeVariance(_))
        ));
        let cs: BTreeMap<u32, Rational> = [(1, int(2)), (2, int(1))].into_iter().collect();
        assert_eq!(MomentSeq::new(cs), Err(CumulantError::CauchySchwarz));
    }

    #[test]
    fn combinators() {
        let r = cumulants_rademacher(6).unwrap();
        let sum = seq_shift_scale_convolve(&r, &int(1), &int(0), Some(&r));
        assert_eq!(sum.get(4), Some(&int(-4)));
        let u = cumulants_uniform(6).unwrap();
        let scaled = seq_shift_scale_convolve(&u, &int(2), &int(0), None);
        assert_eq!(scaled.get(2), Some(&ratio(4, 3)));
        let shifted = seq_shift_scale_convolve(&u, &int(1), &int(5), None);
        assert_eq!(shifted.values(), u.values());
    }

    #[test]
    fn conditions() {
        let u = cumulants_uniform(20).unwrap();
        let rep = check_conditions(&u, 20, None);
        assert!(rep.star_star.holds && rep.star.holds);
        let l = cumulants_laplace(&int(1), 20).unwrap();
        assert!(check_conditions(&l, 20, None).even_positive.holds);
        let half = cumulants_discrete_symmetric(&[(int(2), ratio(1, 4))], 8).unwrap();
        let rep = check_conditions(&half, 8, None);
        assert!(!rep.star_star.holds);
        assert!(!rep.star_star.entries[0].holds);
    }
}
