//! Closed-form coefficients of `R_{n+1}` and checks against the computed table.
//!
//! Write `R_{n+1} = sum_k a_{n,k} T_{n-k}`, grouping terms by their largest
//! part `n - k` and stripping one copy of it. Then
//! `a_{n,0} = -n(n+1) T_2 T_n + a_n` where `a_n` is a quadratic form in
//! `T_3, ..., T_{n-1}` whose monomials are `T_i T_j` with `i + j = n + 2`.
//!
//! Coefficients of `a_n`:
//!
//! * `n = 2m`: `T_{m+1}^2` gets `-(2m+1) C(2m, m)`, and `T_{2m+2-k} T_k` gets
//!   `-(4m+2) C(2m, k-1)` for `3 <= k <= m`.
//! * `n = 2m+1`: `T_{m+2} T_{m+1}` gets `-2(m+1) C(2m+2, m+1)`, and
//!   `T_{2m+3-k} T_k` gets `-4(m+1) C(2m+1, k-1)` for `3 <= k <= m`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::partition::Partition;
use crate::poly::Poly;
use crate::rational::{binomial, factorial, Rational};
use crate::table::{RnTable, TableError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosedFormError {
    #[error("closed forms are stated for n >= 4, got {0}")]
    Order(u32),
}

/// Which formula produced a closed-form value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// `c_{N,N,2} = -N(N+1)`, `N >= 3`.
    P1,
    /// `c_{N,N-1,3} = -(N-1)N(N+1)`, `N >= 5`.
    P2,
    /// `c_{N,N+1-k,k+1} = -2(N+1) C(N,k)`, `N >= 8`, `2 <= k <= N/2 - 1`.
    P4,
    /// Central coefficient of `a_N`, `N = 2m` or `2m+1` with `m >= 4`.
    CentralAn,
    /// Any coefficient of `a_N` from the general formula, `N >= 8`.
    GeneralAn,
    /// Tabulated `a_N` for `4 <= N <= 7`.
    SmallAn,
    /// `a_{N,N-2} = (-1)^{N+1} N! T_2^N`.
    PureT2,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Source::P1 => "p1",
            Source::P2 => "p2",
            Source::P4 => "p4",
            Source::CentralAn => "central-an",
            Source::GeneralAn => "general-an",
            Source::SmallAn => "small-an",
            Source::PureT2 => "pure-t2",
        };
        f.write_str(s)
    }
}

/// Result of [`closed_coeff`]. Outside every stated range the answer is
/// `NotCovered`; shapes that match a formula only outside its range report
/// `OutOfRange`. Neither is a guess.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedCoeff {
    Value { value: BigInt, source: Source },
    OutOfRange { source: Source },
    NotCovered,
}

/// The leading structure of `R_{n+1}`: the head `c T_2 T_n^2` and `a_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadingForm {
    pub n: u32,
    pub head_coeff: BigInt,
    /// Keyed by `(i, j)` with `i >= j` and `i + j = n + 2`.
    pub an_terms: BTreeMap<(u16, u16), BigInt>,
}

fn bi(v: i64) -> BigInt {
    BigInt::from(v)
}

/// `a_n` from the general formula, any `n >= 4`.
pub fn an_general(n: u32) -> BTreeMap<(u16, u16), BigInt> {
    let mut out = BTreeMap::new();
    let m = (n / 2) as u64;
    let n16 = n as u16;
    if n.is_multiple_of(2) {
        let c = -(bi(2 * m as i64 + 1) * binomial(2 * m, m));
        out.insert(((m + 1) as u16, (m + 1) as u16), c);
        for k in 3..=m {
            let c = -(bi(4 * m as i64 + 2) * binomial(2 * m, k - 1));
            out.insert((n16 + 2 - k as u16, k as u16), c);
        }
    } else {
        let c = -(bi(2 * (m as i64 + 1)) * binomial(2 * m + 2, m + 1));
        out.insert(((m + 2) as u16, (m + 1) as u16), c);
        for k in 3..=m {
            let c = -(bi(4 * (m as i64 + 1)) * binomial(2 * m + 1, k - 1));
            out.insert((n16 + 2 - k as u16, k as u16), c);
        }
    }
    out
}

/// Tabulated `a_n` for `3 <= n <= 7`.
pub fn an_small(n: u32) -> Option<BTreeMap<(u16, u16), BigInt>> {
    let pairs: &[((u16, u16), i64)] = match n {
        3 => &[],
        4 => &[((3, 3), -30)],
        5 => &[((4, 3), -120)],
        6 => &[((4, 4), -140), ((5, 3), -210)],
        7 => &[((5, 4), -560), ((6, 3), -336)],
        _ => return None,
    };
    Some(pairs.iter().map(|&(k, v)| (k, bi(v))).collect())
}

pub fn leading_form(n: u32) -> Result<LeadingForm, ClosedFormError> {
    if n < 4 {
        return Err(ClosedFormError::Order(n));
    }
    let an_terms = an_small(n).unwrap_or_else(|| an_general(n));
    debug_assert!(an_terms.values().all(|c| c.is_negative()));
    Ok(LeadingForm {
        n,
        head_coeff: -bi(n as i64 * (n as i64 + 1)),
        an_terms,
    })
}

impl LeadingForm {
    /// `a_n` as a polynomial in `T_3, ..., T_{n-1}`.
    pub fn an_poly(&self) -> Poly {
        Poly::from_terms(
            self.an_terms
                .iter()
                .map(|(&(i, j), c)| (Partition::new([i, j]).expect("positive"), c.clone())),
        )
    }
}

/// `(-1)^n (n-1)!`, the coefficient of `T_2^n` in `R_n`.
pub fn pure_t2_coeff(n: u32) -> BigInt {
    let f = factorial(n as u64 - 1);
    if n.is_multiple_of(2) {
        f
    } else {
        -f
    }
}

/// Closed-form value of the coefficient of `T_alpha` in `R_n`, if one of the
/// formulas covers it.
pub fn closed_coeff(alpha: &Partition, n: u32) -> ClosedCoeff {
    if n < 3 || alpha.weight() != 2 * n {
        return ClosedCoeff::NotCovered;
    }
    if alpha.len() == n as usize && alpha.parts().iter().all(|&p| p == 2) {
        return ClosedCoeff::Value {
            value: pure_t2_coeff(n),
            source: Source::PureT2,
        };
    }
    let big_n = n - 1;
    let &[a, b, c] = alpha.parts() else {
        return ClosedCoeff::NotCovered;
    };
    if a as u32 != big_n {
        return ClosedCoeff::NotCovered;
    }
    let nn = big_n as i64;
    if c == 2 {
        // b = N follows from the weight
        return ClosedCoeff::Value {
            value: bi(-nn * (nn + 1)),
            source: Source::P1,
        };
    }
    // c >= 3 and b + c = N + 2: a coefficient of a_N
    let mut out_of_range = None;
    if b as u32 + 1 == big_n && c == 3 {
        if big_n >= 5 {
            return ClosedCoeff::Value {
                value: bi(-(nn - 1) * nn * (nn + 1)),
                source: Source::P2,
            };
        }
        out_of_range = Some(Source::P2);
    }
    let k = (c - 1) as u32;
    if (2..=big_n / 2 - 1).contains(&k) {
        if big_n >= 8 {
            return ClosedCoeff::Value {
                value: -(bi(2 * (nn + 1)) * binomial(big_n as u64, k as u64)),
                source: Source::P4,
            };
        }
        out_of_range.get_or_insert(Source::P4);
    }
    let m = big_n / 2;
    let central = if big_n.is_multiple_of(2) {
        b as u32 == m + 1 && c as u32 == m + 1
    } else {
        b as u32 == m + 2 && c as u32 == m + 1
    };
    let general = an_general(big_n);
    if central {
        if m >= 4 {
            return ClosedCoeff::Value {
                value: general[&(b, c)].clone(),
                source: Source::CentralAn,
            };
        }
        out_of_range.get_or_insert(Source::CentralAn);
    }
    if big_n >= 8 {
        if let Some(v) = general.get(&(b, c)) {
            return ClosedCoeff::Value {
                value: v.clone(),
                source: Source::GeneralAn,
            };
        }
    } else if let Some(v) = an_small(big_n).and_then(|t| t.get(&(b, c)).cloned()) {
        return ClosedCoeff::Value {
            value: v,
            source: Source::SmallAn,
        };
    }
    match out_of_range {
        Some(source) => ClosedCoeff::OutOfRange { source },
        None => ClosedCoeff::NotCovered,
    }
}

/// `a_{n,k}`: terms of `r_next = R_{n+1}` with largest part `n - k`, with one
/// copy of `T_{n-k}` stripped.
pub fn extract_ank(r_next: &Poly, n: u32, k: u32) -> Poly {
    let top = (n - k) as u16;
    Poly::from_terms(
        r_next
            .iter()
            .filter(|(p, _)| p.first() == Some(top))
            .map(|(p, c)| (p.remove_one(top).expect("top part"), c.clone())),
    )
}

/// `a_n`: `a_{n,0}` without its `T_2 T_n` term.
pub fn extract_an(r_next: &Poly, n: u32) -> Poly {
    let head = Partition::new([n as u16, 2]).expect("positive");
    extract_ank(r_next, n, 0).filter(|p, _| *p != head)
}

/// Symmetric matrix of `a_n` over `T_3, ..., T_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnMatrix {
    pub n: u32,
    pub entries: Vec<Vec<Rational>>,
}

impl AnMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Entries `(i, dim-1-i)`, i.e. the coefficients pairing `T_{3+i}` with
    /// `T_{n-1-i}`.
    pub fn anti_diagonal(&self) -> Vec<Rational> {
        let d = self.dim();
        (0..d).map(|i| self.entries[i][d - 1 - i].clone()).collect()
    }

    pub fn nondegenerate(&self) -> bool {
        self.anti_diagonal().iter().all(|x| !x.is_zero())
    }

    /// Determinant by fraction-exact Gaussian elimination.
    pub fn determinant(&self) -> Rational {
        let mut a = self.entries.clone();
        let d = a.len();
        let mut det = Rational::one();
        for col in 0..d {
            let Some(piv) = (col..d).find(|&r| !a[r][col].is_zero()) else {
                return Rational::zero();
            };
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            let p = a[col][col].clone();
            det *= &p;
            for r in col + 1..d {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &p;
                let (top, rest) = a.split_at_mut(r);
                for (x, y) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= &f * y;
                }
            }
        }
        det
    }
}

/// The matrix of the quadratic form `a_n` (closed form), off-diagonal pair
/// coefficients split evenly between the two symmetric positions.
pub fn an_matrix(n: u32) -> Result<AnMatrix, ClosedFormError> {
    let form = leading_form(n)?;
    let d = (n - 3) as usize;
    let mut entries = vec![vec![Rational::zero(); d]; d];
    for (&(i, j), c) in &form.an_terms {
        let (x, y) = (i as usize - 3, j as usize - 3);
        if x == y {
            entries[x][y] = Rational::from_integer(c.clone());
        } else {
            let half = Rational::new(c.clone(), bi(2));
            entries[x][y] = half.clone();
            entries[y][x] = half;
        }
    }
    Ok(AnMatrix { n, entries })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub n: u32,
    pub check: String,
    pub passed: bool,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossReport {
    pub n_max: u32,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CrossReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check(n: u32, name: impl Into<String>, expected: impl ToString, found: impl ToString) -> Check {
    let (expected, found) = (expected.to_string(), found.to_string());
    Check {
        n,
        check: name.into(),
        passed: expected == found,
        expected,
        found,
    }
}

/// All closed-form and degree checks for one `n` against `r_next = R_{n+1}`.
pub fn checks_for(n: u32, r_next: &Poly) -> Vec<Check> {
    let mut out = Vec::new();
    let n16 = n as u16;
    let coeff = |parts: &[u16]| r_next.coeff_of(&Partition::new(parts.iter().copied()).unwrap());

    out.push(check(
        n,
        "head T2*Tn^2",
        -(n as i64) * (n as i64 + 1),
        coeff(&[n16, n16, 2]),
    ));

    let form = leading_form(n).expect("n >= 4");
    for (&(i, j), c) in &form.an_terms {
        out.push(check(
            n,
            format!("a_n pair ({i},{j})"),
            c,
            coeff(&[n16, i, j]),
        ));
    }
    let an = extract_an(r_next, n);
    out.push(check(
        n,
        "a_n support",
        form.an_poly().to_string(),
        an.to_string(),
    ));

    // Every length-3 partition with largest part n, plus the pure T2 term.
    let mut candidates: Vec<Partition> = (2..=(n16 + 2) / 2)
        .map(|c| Partition::new([n16, n16 + 2 - c, c]).unwrap())
        .collect();
    candidates.push(Partition::repeated(2, n as usize + 1));
    for alpha in candidates {
        if let ClosedCoeff::Value { value, source } = closed_coeff(&alpha, n + 1) {
            out.push(check(
                n,
                format!("{source} {alpha}"),
                value,
                r_next.coeff_of(&alpha),
            ));
        }
    }

    out.extend(degree_checks(n, r_next));
    out
}

/// Degree, vanishing and pure-`T_2` checks on `r_next = R_{n+1}`; valid for
/// any `n >= 3`.
pub fn degree_checks(n: u32, r_next: &Poly) -> Vec<Check> {
    let mut out = Vec::new();
    let n16 = n as u16;
    for k in 0..=n - 2 {
        let ank = extract_ank(r_next, n, k);
        out.push(check(
            n,
            format!("deg a_(n,{k})"),
            2 + k,
            ank.degree().map_or("none".into(), |d| d.to_string()),
        ));
        let top = n16 - k as u16;
        let too_long = r_next
            .iter()
            .filter(|(p, _)| p.first() == Some(top) && p.len() > 3 + k as usize)
            .count();
        out.push(check(
            n,
            format!("vanishing above length {} at top {top}", 3 + k),
            0,
            too_long,
        ));
    }

    let tail = extract_ank(r_next, n, n - 2);
    let mut expect = factorial(n as u64);
    if n.is_multiple_of(2) {
        expect = -expect;
    }
    let expected_tail = Poly::monomial(Partition::repeated(2, n as usize), expect);
    out.push(check(n, "a_(n,n-2) pure T2", expected_tail, tail));
    out
}

/// Runs [`checks_for`] for every `4 <= n <= n_max`.
pub fn cross_validate(n_max: u32, table: &RnTable) -> Result<CrossReport, TableError> {
    if n_max >= 4 {
        table.get(n_max + 1)?;
    }
    let per_n: Vec<Vec<Check>> = (4..=n_max.max(3))
        .into_par_iter()
        .map(|n| table.get(n + 1).map(|r| checks_for(n, &r)))
        .collect::<Result<_, _>>()?;
    let checks: Vec<Check> = per_n.into_iter().flatten().collect();
    Ok(CrossReport {
        n_max,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_map(v: &[((u16, u16), i64)]) -> BTreeMap<(u16, u16), BigInt> {
        v.iter().map(|&(k, c)| (k, bi(c))).collect()
    }

    #[test]
    fn leading_form_values() {
        let f8 = leading_form(8).unwrap();
        assert_eq!(f8.head_coeff, bi(-72));
        assert_eq!(
            f8.an_terms,
            pair_map(&[((5, 5), -630), ((7, 3), -504), ((6, 4), -1008)])
        );
        let f7 = leading_form(7).unwrap();
        assert_eq!(f7.an_terms, pair_map(&[((5, 4), -560), ((6, 3), -336)]));
        assert_eq!(
            leading_form(4).unwrap().an_terms,
            pair_map(&[((3, 3), -30)])
        );
        assert_eq!(leading_form(3), Err(ClosedFormError::Order(3)));
    }

    #[test]
    fn general_formula_reproduces_small_table() {
        for n in 4..=7 {
            assert_eq!(an_general(n), an_small(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn closed_coeff_examples() {
        let v = |parts: &[u16], n| closed_coeff(&Partition::new(parts.iter().copied()).unwrap(), n);
        assert_eq!(
            v(&[9, 9, 2], 10),
            ClosedCoeff::Value {
                value: bi(-90),
                source: Source::P1
            }
        );
        assert_eq!(
            v(&[5, 4, 3], 6),
            ClosedCoeff::Value {
                value: bi(-120),
                source: Source::P2
            }
        );
        assert_eq!(
            v(&[2, 2, 2, 2], 4),
            ClosedCoeff::Value {
                value: bi(6),
                source: Source::PureT2
            }
        );
        assert_eq!(
            v(&[3, 3, 2], 4),
            ClosedCoeff::Value {
                value: bi(-12),
                source: Source::P1
            }
        );
        // P2's shape at N = 4 comes from the small table instead
        assert_eq!(
            v(&[4, 3, 3], 5),
            ClosedCoeff::Value {
                value: bi(-30),
                source: Source::SmallAn
            }
        );
        assert_eq!(
            v(&[8, 5, 5], 9),
            ClosedCoeff::Value {
                value: bi(-630),
                source: Source::CentralAn
            }
        );
        assert_eq!(
            v(&[8, 6, 4], 9),
            ClosedCoeff::Value {
                value: bi(-1008),
                source: Source::P4
            }
        );
        assert_eq!(v(&[6, 6, 3, 3], 9), ClosedCoeff::NotCovered);
        assert_eq!(v(&[8, 8, 2], 10), ClosedCoeff::NotCovered);
        // P4's shape at N = 7 is covered by the small table
        assert_eq!(
            v(&[7, 5, 4], 8),
            ClosedCoeff::Value {
                value: bi(-560),
                source: Source::SmallAn
            }
        );
    }

    #[test]
    fn matrix_of_a8() {
        let m = an_matrix(8).unwrap();
        let expect: Vec<Rational> = [-252, -504, -630, -504, -252]
            .iter()
            .map(|&x| Rational::from_integer(bi(x)))
            .collect();
        assert_eq!(m.anti_diagonal(), expect);
        assert!(m.nondegenerate());
        assert!(!m.determinant().is_zero());
        let m4 = an_matrix(4).unwrap();
        assert_eq!(m4.entries, vec![vec![Rational::from_integer(bi(-30))]]);
        assert_eq!(m4.determinant(), Rational::from_integer(bi(-30)));
    }

    #[test]
    fn extraction_on_r4() {
        // R_4 = -12 T2 T3^2 + 6 T2^4, seen as R_{n+1} with n = 3
        let r4: Poly = "-12*T2*T3^2 + 6*T2^4".parse().unwrap();
        assert_eq!(extract_ank(&r4, 3, 0).to_string(), "-12*T2*T3");
        assert!(extract_an(&r4, 3).is_zero());
        assert_eq!(extract_ank(&r4, 3, 1).to_string(), "6*T2^3");
    }
}
