//! Sparse multivariate polynomials in the variables `T_1, T_2, ...`, keyed by
//! partition.
//!
//! A monomial `T_{a1} ... T_{ar}` is stored as the partition `(a1, ..., ar)`
//! sorted descending, so `T_2 T_3` and `T_3 T_2` share one key. Coefficients are
//! exact (`BigInt` for the recursion polynomials, `Rational` after partial
//! evaluation). Zero coefficients are never stored.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::partition::{Partition, PartitionError};
use crate::rational::{self, Rational};

/// Coefficient ring requirements.
pub trait Coeff:
    Clone + Zero + One + PartialEq + Signed + fmt::Display + for<'a> AddAssign<&'a Self> + Send + Sync
{
    fn mul_ref(&self, other: &Self) -> Self;
}

impl Coeff for BigInt {
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

impl Coeff for Rational {
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

pub type TermMap<C> = FxHashMap<Partition, C>;

#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly<C> {
    terms: TermMap<C>,
}

/// Integer polynomial; the representation of every `R_n`, `A_n` and operator
/// output.
pub type Poly = SparsePoly<BigInt>;

/// Rational polynomial produced by partial evaluation.
pub type RatPoly = SparsePoly<Rational>;

impl<C: Coeff> Default for SparsePoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> SparsePoly<C> {
    pub fn zero() -> Self {
        SparsePoly {
            terms: TermMap::default(),
        }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(Partition::empty(), c)
    }

    pub fn monomial(p: Partition, c: C) -> Self {
        let mut out = Self::zero();
        out.add_term(p, c);
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (Partition, C)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (p, c) in terms {
            out.add_term(p, c);
        }
        out
    }

    /// Wraps an accumulated map, dropping any zero entries.
    pub fn from_map(mut terms: TermMap<C>) -> Self {
        terms.retain(|_, c| !c.is_zero());
        SparsePoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * T_p`, deleting the entry if it cancels.
    pub fn add_term(&mut self, p: Partition, c: C) {
        if c.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(p) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    /// Coefficient of `T_alpha`, zero when absent.
    pub fn coeff_of(&self, alpha: &Partition) -> C {
        self.terms.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    pub fn get(&self, alpha: &Partition) -> Option<&C> {
        self.terms.get(alpha)
    }

    /// Unordered view of the stored terms.
    pub fn iter(&self) -> impl Iterator<Item = (&Partition, &C)> {
        self.terms.iter()
    }

    /// Terms in canonical (graded-lex descending) order.
    pub fn terms(&self) -> Vec<(&Partition, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_unstable_by(|a, b| b.0.cmp(a.0));
        v
    }

    /// Total degree: the largest monomial length, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Partition::len).max()
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        SparsePoly {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (p.clone(), c.mul_ref(k)))
                .collect(),
        }
    }

    /// Keeps only the terms accepted by `keep`.
    pub fn filter<F: Fn(&Partition, &C) -> bool>(&self, keep: F) -> Self {
        SparsePoly {
            terms: self
                .terms
                .iter()
                .filter(|(p, c)| keep(p, c))
                .map(|(p, c)| (p.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let (big, small) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (p, c) in &small.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let mut acc: TermMap<C> = TermMap::default();
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                let key = p.merge(q);
                let prod = a.mul_ref(b);
                match acc.get_mut(&key) {
                    Some(c) => *c += &prod,
                    None => {
                        acc.insert(key, prod);
                    }
                }
            }
        }
        Self::from_map(acc)
    }

    /// Substitutes rational values for the variables present in `assign` and
    /// collects the remaining monomials. An empty assignment is the identity
    /// (up to coefficient promotion).
    pub fn partial_eval(&self, assign: &BTreeMap<u16, Rational>) -> RatPoly
    where
        C: Into<Rational>,
    {
        let mut pow_cache: FxHashMap<(u16, usize), Rational> = FxHashMap::default();
        let mut acc: TermMap<Rational> = TermMap::default();
        for (p, c) in &self.terms {
            let mut coeff: Rational = c.clone().into();
            let mut rest = crate::partition::Parts::new();
            for (part, mult) in p.runs() {
                match assign.get(&part) {
                    Some(v) => {
                        let f = pow_cache
                            .entry((part, mult))
                            .or_insert_with(|| rational::pow(v, mult as u32));
                        coeff *= &*f;
                        if coeff.is_zero() {
                            break;
                        }
                    }
                    None => rest.extend(std::iter::repeat_n(part, mult)),
                }
            }
            if coeff.is_zero() {
                continue;
            }
            let key = Partition::from_sorted(rest);
            match acc.get_mut(&key) {
                Some(x) => *x += &coeff,
                None => {
                    acc.insert(key, coeff);
                }
            }
        }
        RatPoly::from_map(acc)
    }

    /// Full evaluation; every variable occurring in `self` must be assigned.
    pub fn eval(&self, assign: &BTreeMap<u16, Rational>) -> Result<Rational, EvalError>
    where
        C: Into<Rational>,
    {
        let reduced = self.partial_eval(assign);
        let mut value = Rational::zero();
        for (p, c) in reduced.iter() {
            if let Some(&v) = p.parts().first() {
                return Err(EvalError::Unassigned(v));
            }
            value += c;
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable T{0} has no assigned value")]
    Unassigned(u16),
}

impl RatPoly {
    /// The constant term (zero when absent).
    pub fn constant_term(&self) -> Rational {
        self.coeff_of(&Partition::empty())
    }
}

impl Poly {
    pub fn to_rational(&self) -> RatPoly {
        RatPoly::from_terms(
            self.terms
                .iter()
                .map(|(p, c)| (p.clone(), Rational::from_integer(c.clone()))),
        )
    }
}

impl<C: Coeff> Add for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn add(self, rhs: Self) -> SparsePoly<C> {
        self.add_ref(rhs)
    }
}

impl<C: Coeff> Add for SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn add(mut self, rhs: Self) -> SparsePoly<C> {
        for (p, c) in rhs.terms {
            self.add_term(p, c);
        }
        self
    }
}

impl<C: Coeff> Neg for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn neg(self) -> SparsePoly<C> {
        SparsePoly {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (p.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl<C: Coeff> Sub for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn sub(self, rhs: Self) -> SparsePoly<C> {
        self.add_ref(&-rhs)
    }
}

impl<C: Coeff> Mul for &SparsePoly<C> {
    type Output = SparsePoly<C>;
    fn mul(self, rhs: Self) -> SparsePoly<C> {
        self.mul_ref(rhs)
    }
}

/// Human-readable form in ascending variable order within each monomial,
/// e.g. `-20*T2*T4^2 - 30*T3^2*T4 + 120*T2^2*T3^2 - 24*T2^5`.
impl<C: Coeff> fmt::Display for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let abs = c.abs();
            let mono = monomial_string(p);
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{abs}*{mono}")?;
            }
        }
        Ok(())
    }
}

fn monomial_string(p: &Partition) -> String {
    let mut runs = p.runs();
    runs.reverse();
    runs.iter()
        .map(|&(v, m)| {
            if m == 1 {
                format!("T{v}")
            } else {
                format!("T{v}^{m}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyParseError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    Unexpected { ch: char, pos: usize },
    #[error("unexpected end of input")]
    Eof,
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Parses the display form. Accepts both `-2*T2^3` and the typeset style
/// `-2T_2^3`, with arbitrary whitespace and optional `*` separators.
impl FromStr for Poly {
    type Err = PolyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<(usize, char)> = s
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .collect();
        let mut pos = 0usize;
        let mut out = Poly::zero();
        if chars.is_empty() {
            return Err(PolyParseError::Eof);
        }
        if chars.len() == 1 && chars[0].1 == '0' {
            return Ok(out);
        }
        let unexpected = |i: usize| -> PolyParseError {
            match chars.get(i) {
                Some(&(pos, ch)) => PolyParseError::Unexpected { ch, pos },
                None => PolyParseError::Eof,
            }
        };
        let read_int = |pos: &mut usize| -> Option<u64> {
            let start = *pos;
            while *pos < chars.len() && chars[*pos].1.is_ascii_digit() {
                *pos += 1;
            }
            if *pos == start {
                return None;
            }
            chars[start..*pos]
                .iter()
                .map(|&(_, c)| c)
                .collect::<String>()
                .parse()
                .ok()
        };
        while pos < chars.len() {
            let mut negative = false;
            match chars[pos].1 {
                '+' => pos += 1,
                '-' => {
                    negative = true;
                    pos += 1
                }
                _ if pos == 0 => {}
                _ => return Err(unexpected(pos)),
            }
            // coefficient
            let start = pos;
            while pos < chars.len() && chars[pos].1.is_ascii_digit() {
                pos += 1;
            }
            let mut coeff: BigInt = if pos > start {
                chars[start..pos]
                    .iter()
                    .map(|&(_, c)| c)
                    .collect::<String>()
                    .parse()
                    .expect("digits")
            } else {
                BigInt::one()
            };
            let mut parts: Vec<u16> = Vec::new();
            let mut saw_factor = pos > start;
            loop {
                if pos < chars.len() && chars[pos].1 == '*' {
                    pos += 1;
                }
                if pos >= chars.len() || chars[pos].1 != 'T' {
                    break;
                }
                pos += 1;
                if pos < chars.len() && chars[pos].1 == '_' {
                    pos += 1;
                }
                let idx = read_int(&mut pos).ok_or_else(|| unexpected(pos))?;
                let mut exp = 1u64;
                if pos < chars.len() && chars[pos].1 == '^' {
                    pos += 1;
                    exp = read_int(&mut pos).ok_or_else(|| unexpected(pos))?;
                }
                let idx = u16::try_from(idx).map_err(|_| unexpected(pos))?;
                parts.extend(std::iter::repeat_n(idx, exp as usize));
                saw_factor = true;
            }
            if !saw_factor {
                return Err(unexpected(pos));
            }
            if negative {
                coeff = -coeff;
            }
            out.add_term(Partition::new(parts)?, coeff);
        }
        Ok(out)
    }
}
