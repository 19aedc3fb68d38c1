//! mmse derivatives at zero SNR and their inversion.
//!
//! With `K_1 = 0`, the derivatives satisfy
//! `d_n = -K_{n+1}^2 - R_{n+1}(K_2, ..., K_n)`, so equation `j` (for `j >= 2`)
//! reads `K_j^2 = -d_{j-1} - R_j(K_2, ..., K_{j-1})`. Recovery walks these
//! equations upwards: each gives `|K_j|`, and the sign of an even `K_n` is read
//! off equation `n + 1`, where `K_n` enters linearly through `a_n`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::closed_forms::{extract_an, leading_form};
use crate::cumulants::{CumulantError, CumulantSeq, Provenance};
use crate::rational::{exact_sqrt, format_rational, Rational, SquareRoot};
use crate::table::{RnTable, TableError};

#[derive(Debug, Error)]
pub enum MmseError {
    #[error("need cumulants through order {need}, sequence stops at {have}")]
    InsufficientOrders { need: u32, have: u32 },
    #[error("need derivatives through order {need}, sequence stops at {have}")]
    InsufficientDerivs { need: u32, have: u32 },
    #[error("derivative sequences start at order 1 and are contiguous")]
    BadDerivs,
    #[error("order must be at least 1")]
    Order,
    #[error("s must be positive")]
    NonPositiveSnr,
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("ambiguous at order {order}: {reason}")]
    Ambiguous { order: u32, reason: String },
    #[error("inconsistent at order {order}: {reason}")]
    Inconsistent { order: u32, reason: String },
    #[error("irrational at order {order}: {value} is not the square of a rational")]
    Irrational { order: u32, value: String },
    #[error("closed-form a_{order} disagrees with the extracted polynomial")]
    FormulaMismatch { order: u32 },
    #[error(transparent)]
    Mmse(#[from] MmseError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Cumulant(#[from] CumulantError),
}

/// `d_1, ..., d_N` with `d_n = mmse^{(n)}(X, 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivSeq {
    values: BTreeMap<u32, Rational>,
}

impl DerivSeq {
    pub fn new(values: BTreeMap<u32, Rational>) -> Result<Self, MmseError> {
        if values.is_empty() || values.keys().enumerate().any(|(i, &k)| k != i as u32 + 1) {
            return Err(MmseError::BadDerivs);
        }
        Ok(DerivSeq { values })
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

/// `d_n = -K_{n+1}^2 - R_{n+1}(K_2, ..., K_n)` for `1 <= n <= n_max`.
pub fn evaluate_derivs(
    k: &CumulantSeq,
    n_max: u32,
    table: &RnTable,
) -> Result<DerivSeq, MmseError> {
    if n_max < 1 {
        return Err(MmseError::Order);
    }
    if k.max_order() < n_max + 1 {
        return Err(MmseError::InsufficientOrders {
            need: n_max + 1,
            have: k.max_order(),
        });
    }
    let assign = k.assignment();
    let mut values = BTreeMap::new();
    for n in 1..=n_max {
        let r = table.get(n + 1)?;
        let rv = r.eval(&assign).expect("all lower orders assigned");
        let kn = &k.values()[&(n + 1)];
        values.insert(n, -(kn * kn) - rv);
    }
    DerivSeq::new(values)
}

/// The SNR-to-time change `s -> 1/(2s)` between the two mmse standardizations.
pub fn mmse_to_mmse_order_map(s: &Rational) -> Result<Rational, MmseError> {
    if !s.is_positive() {
        return Err(MmseError::NonPositiveSnr);
    }
    Ok((s * Rational::from_integer(2.into())).recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryMode {
    /// Symmetric target; requires `a_n(K) != 0` at every even step.
    SymmetricStar,
    /// Positive even cumulants.
    Positive,
    /// `K_{2m} = (-1)^{m+1} |K_{2m}|`.
    Alternating,
}

impl FromStr for RecoveryMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "symmetric-star" => Ok(RecoveryMode::SymmetricStar),
            "positive" => Ok(RecoveryMode::Positive),
            "alternating" => Ok(RecoveryMode::Alternating),
            _ => Err(format!(
                "unknown mode {s:?} (symmetric-star, positive, alternating)"
            )),
        }
    }
}

impl fmt::Display for RecoveryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecoveryMode::SymmetricStar => "symmetric-star",
            RecoveryMode::Positive => "positive",
            RecoveryMode::Alternating => "alternating",
        })
    }
}

/// One decision of the recovery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub order: u32,
    pub equation_used: String,
    pub abs_value: String,
    pub sign_rule: String,
    pub a_tilde: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub cumulants: CumulantSeq,
    pub trace: Vec<TraceRecord>,
}

/// Working state: the target derivatives and the cumulants fixed so far.
struct State<'a> {
    d: &'a DerivSeq,
    table: &'a RnTable,
    mode: RecoveryMode,
    n_max: u32,
    known: BTreeMap<u16, Rational>,
    trace: Vec<TraceRecord>,
}

fn fmt_q(q: &Rational) -> String {
    format_rational(q)
}

impl State<'_> {
    /// Right-hand side of equation `j` under `assign`: the value `K_j^2` must take.
    fn square(&self, j: u32, assign: &BTreeMap<u16, Rational>) -> Result<Rational, RecoveryError> {
        let r = self.table.get(j)?;
        let rv = r.eval(assign).expect("orders below j assigned");
        Ok(-self.d.values[&(j - 1)].clone() - rv)
    }

    fn root(&self, j: u32, sq: &Rational) -> Result<Rational, RecoveryError> {
        match exact_sqrt(sq) {
            SquareRoot::Exact(r) => Ok(r),
            SquareRoot::Negative => Err(RecoveryError::Inconsistent {
                order: j,
                reason: format!("equation {j} requires K_{j}^2 = {}", fmt_q(sq)),
            }),
            SquareRoot::NotASquare => Err(RecoveryError::Irrational {
                order: j,
                value: fmt_q(sq),
            }),
        }
    }

    fn record(&mut self, order: u32, eq: String, abs: &Rational, rule: &str, a: Option<&Rational>) {
        self.trace.push(TraceRecord {
            order,
            equation_used: eq,
            abs_value: fmt_q(abs),
            sign_rule: rule.to_string(),
            a_tilde: a.map(fmt_q),
        });
    }

    /// Odd order: the square must vanish.
    fn odd(&mut self, j: u32) -> Result<(), RecoveryError> {
        let sq = self.square(j, &self.known)?;
        if !sq.is_zero() {
            return Err(RecoveryError::Inconsistent {
                order: j,
                reason: format!("odd cumulant would need K_{j}^2 = {}", fmt_q(&sq)),
            });
        }
        self.known.insert(j as u16, Rational::zero());
        self.record(j, format!("{j}"), &Rational::zero(), "odd-zero", None);
        Ok(())
    }

    /// Last equation when it is even: only checks that it has a rational root.
    fn tail_even(&mut self, j: u32) -> Result<(), RecoveryError> {
        let sq = self.square(j, &self.known)?;
        self.root(j, &sq)?;
        Ok(())
    }

    /// `a_n` at the known cumulants, from the extracted polynomial; checked
    /// against the closed form.
    fn a_tilde(&self, n: u32) -> Result<Rational, RecoveryError> {
        let r = self.table.get(n + 1)?;
        let from_table = extract_an(&r, n)
            .eval(&self.known)
            .expect("orders below n assigned");
        let form = leading_form(n).expect("n >= 4");
        let closed = form
            .an_poly()
            .eval(&self.known)
            .expect("orders below n assigned");
        if closed != from_table {
            return Err(RecoveryError::FormulaMismatch { order: n });
        }
        Ok(from_table)
    }

    /// Even `n >= 8` with equation `n + 1` available.
    fn even_step(&mut self, n: u32) -> Result<(), RecoveryError> {
        let sq = self.square(n, &self.known)?;
        let abs = self.root(n, &sq)?;
        let a = self.a_tilde(n)?;
        let eq = format!("{n},{}", n + 1);
        if abs.is_zero() {
            self.known.insert(n as u16, abs.clone());
            self.record(n, eq, &abs, "zero", Some(&a));
            return Ok(());
        }
        let next_sq = |this: &Self, v: Rational| {
            let mut assign = this.known.clone();
            assign.insert(n as u16, v);
            this.square(n + 1, &assign)
        };
        let plus = next_sq(self, abs.clone())?;
        let minus = next_sq(self, -abs.clone())?;
        let (value, rule) = match self.mode {
            RecoveryMode::SymmetricStar => {
                if a.is_zero() {
                    return Err(RecoveryError::Ambiguous {
                        order: n,
                        reason: "a_n vanishes at the recovered cumulants".into(),
                    });
                }
                match (plus.is_zero(), minus.is_zero()) {
                    (true, false) => (abs.clone(), "star-plus"),
                    (false, true) => (-abs.clone(), "star-minus"),
                    (true, true) => {
                        return Err(RecoveryError::Ambiguous {
                            order: n,
                            reason: "both signs leave the next odd cumulant zero".into(),
                        })
                    }
                    (false, false) => {
                        return Err(RecoveryError::Inconsistent {
                            order: n,
                            reason: "neither sign leaves the next odd cumulant zero".into(),
                        })
                    }
                }
            }
            RecoveryMode::Positive | RecoveryMode::Alternating => {
                let positive = match self.mode {
                    RecoveryMode::Positive => true,
                    _ => (n / 2) % 2 == 1,
                };
                let (chosen, rejected) = if positive {
                    (&plus, &minus)
                } else {
                    (&minus, &plus)
                };
                if !chosen.is_zero() {
                    return Err(RecoveryError::Inconsistent {
                        order: n,
                        reason: format!(
                            "sign fixed by mode {} leaves K_{}^2 = {}",
                            self.mode,
                            n + 1,
                            fmt_q(chosen)
                        ),
                    });
                }
                if !rejected.is_negative() {
                    return Err(RecoveryError::Ambiguous {
                        order: n,
                        reason: format!(
                            "the opposite sign gives K_{}^2 = {}, not negative",
                            n + 1,
                            fmt_q(rejected)
                        ),
                    });
                }
                let rule = match self.mode {
                    RecoveryMode::Positive => "mode-positive",
                    _ => "alternating-pattern",
                };
                (if positive { abs.clone() } else { -abs.clone() }, rule)
            }
        };
        self.known.insert(n as u16, value);
        self.record(n, eq, &abs, rule, Some(&a));
        Ok(())
    }

    /// Enumerates sign branches for the even orders in `branch` while walking
    /// equations `4..=top`. Odd squares must vanish; even squares must have a
    /// rational root. With `relax_top`, an odd square at `top` only needs to be
    /// non-negative. Returns surviving assignments, and whether any branch died
    /// on an irrational root.
    fn branches(
        &self,
        top: u32,
        branch: &[u32],
        relax_top: bool,
    ) -> Result<(Vec<BTreeMap<u16, Rational>>, bool), RecoveryError> {
        let mut live = vec![self.known.clone()];
        let mut irrational = false;
        for j in 4..=top {
            let mut next = Vec::new();
            for assign in live {
                let sq = self.square(j, &assign)?;
                if j % 2 == 1 {
                    if sq.is_zero() || (relax_top && j == top && sq.is_positive()) {
                        let mut a = assign;
                        a.insert(j as u16, Rational::zero());
                        next.push(a);
                    }
                    continue;
                }
                match exact_sqrt(&sq) {
                    SquareRoot::Negative => {}
                    SquareRoot::NotASquare => irrational = true,
                    SquareRoot::Exact(r) => {
                        let signs: Vec<Rational> = if r.is_zero() || !branch.contains(&j) {
                            vec![r]
                        } else {
                            vec![r.clone(), -r]
                        };
                        for s in signs {
                            let mut a = assign.clone();
                            a.insert(j as u16, s);
                            next.push(a);
                        }
                    }
                }
            }
            live = next;
        }
        Ok((live, irrational))
    }

    /// Orders 4 to 7 (or as far as the data reaches).
    fn base(&mut self) -> Result<(), RecoveryError> {
        let top = (self.n_max + 1).min(7);
        let out_max = self.n_max.min(7);
        let branch: Vec<u32> = [4, 6].into_iter().filter(|&j| j <= self.n_max).collect();
        let project = |a: &BTreeMap<u16, Rational>| -> Vec<Rational> {
            (4..=out_max as u16).map(|j| a[&j].clone()).collect()
        };
        let (mut live, irrational) = self.branches(top, &branch, false)?;
        if live.is_empty() {
            return Err(self.dead_end(top, irrational));
        }
        let mut eq_used = format!("4..{top}");
        let chosen = match self.mode {
            RecoveryMode::SymmetricStar => {
                let mut distinct = distinct_projections(&live, &project);
                let k4_zero = live.iter().all(|a| a[&4].is_zero());
                if distinct > 1 && k4_zero && self.n_max + 1 >= 9 {
                    // K_4 = 0: equations 8 and 9 decide K_6.
                    let (more, irr) = self.branches(9, &[4, 6, 8], false)?;
                    if more.is_empty() {
                        return Err(self.dead_end(9, irr));
                    }
                    live = more;
                    eq_used = "4..9".into();
                    distinct = distinct_projections(&live, &project);
                }
                if distinct > 1 {
                    return Err(RecoveryError::Ambiguous {
                        order: 4,
                        reason: format!("{distinct} sign patterns for K_4, K_6 fit the data"),
                    });
                }
                live.swap_remove(0)
            }
            RecoveryMode::Positive | RecoveryMode::Alternating => {
                let want4 = self.mode == RecoveryMode::Positive;
                let sign_ok = |v: &Rational, positive: bool| {
                    v.is_zero() || (positive && v.is_positive()) || (!positive && v.is_negative())
                };
                let fits = |a: &BTreeMap<u16, Rational>| {
                    sign_ok(&a[&4], want4) && a.get(&6).is_none_or(|v| sign_ok(v, true))
                };
                let Some(pos) = live.iter().position(fits) else {
                    return Err(RecoveryError::Inconsistent {
                        order: 4,
                        reason: format!("no branch has the signs required by mode {}", self.mode),
                    });
                };
                let chosen = live.swap_remove(pos);
                // Rivals must die on a negative square; a positive odd square
                // would fit a centred but asymmetric law. Under the alternating
                // hypothesis the sign of K_4 is given, so only K_6 is contested.
                let (relaxed, _) = self.branches(top, &branch, true)?;
                let rival = relaxed.iter().find(|a| {
                    project(a) != project(&chosen)
                        && (self.mode == RecoveryMode::Positive || a[&4] == chosen[&4])
                });
                if rival.is_some() {
                    return Err(RecoveryError::Ambiguous {
                        order: 4,
                        reason: "the rejected signs are not ruled out by the available equations"
                            .into(),
                    });
                }
                chosen
            }
        };
        let rule = match self.mode {
            RecoveryMode::SymmetricStar => "unique-branch",
            RecoveryMode::Positive => "mode-positive",
            RecoveryMode::Alternating => "alternating-pattern",
        };
        for j in 4..=out_max {
            let v = chosen[&(j as u16)].clone();
            let r = if j % 2 == 1 { "odd-zero" } else { rule };
            self.record(j, eq_used.clone(), &v.abs(), r, None);
            self.known.insert(j as u16, v);
        }
        if self.n_max + 1 == 7 {
            // K_7 is output as zero; it was checked inside the branch walk.
            self.known.insert(7, Rational::zero());
        }
        Ok(())
    }

    fn dead_end(&self, order: u32, irrational: bool) -> RecoveryError {
        if irrational {
            RecoveryError::Irrational {
                order,
                value: "a required square root".into(),
            }
        } else {
            RecoveryError::Inconsistent {
                order,
                reason: format!("no sign pattern satisfies equations 4..{order}"),
            }
        }
    }
}

fn distinct_projections<F>(live: &[BTreeMap<u16, Rational>], project: &F) -> usize
where
    F: Fn(&BTreeMap<u16, Rational>) -> Vec<Rational>,
{
    let mut seen: Vec<Vec<Rational>> = Vec::new();
    for a in live {
        let p = project(a);
        if !seen.contains(&p) {
            seen.push(p);
        }
    }
    seen.len()
}

/// Recovers `K_2, ..., K_{n_max}` from `d_1, ..., d_{n_max}`. When
/// `n_max + 1` is odd, `K_{n_max + 1} = 0` is included as well, so that the
/// result re-evaluates to all of `d`.
pub fn recover_cumulants(
    d: &DerivSeq,
    mode: RecoveryMode,
    n_max: u32,
    table: &RnTable,
) -> Result<Recovery, RecoveryError> {
    if n_max < 1 {
        return Err(MmseError::Order.into());
    }
    if d.max_order() < n_max {
        return Err(MmseError::InsufficientDerivs {
            need: n_max,
            have: d.max_order(),
        }
        .into());
    }
    let mut st = State {
        d,
        table,
        mode,
        n_max,
        known: BTreeMap::new(),
        trace: Vec::new(),
    };
    let top = n_max + 1;

    let sq2 = -d.values[&1].clone();
    let k2 = st.root(2, &sq2)?;
    st.known.insert(2, k2.clone());
    st.record(2, "2".into(), &k2, "variance-nonnegative", None);

    if k2.is_zero() {
        // Point mass: every cumulant vanishes and so must every derivative.
        for j in 3..=top {
            let sq = st.square(j, &st.known)?;
            if !sq.is_zero() {
                return Err(RecoveryError::Inconsistent {
                    order: j,
                    reason: "K_2 = 0 forces all derivatives to vanish".into(),
                });
            }
            st.known.insert(j as u16, Rational::zero());
        }
        st.record(
            3,
            format!("3..{top}"),
            &Rational::zero(),
            "point-mass",
            None,
        );
    } else {
        if top >= 3 {
            st.odd(3)?;
        }
        if top >= 4 {
            if n_max >= 4 {
                st.base()?;
            } else {
                st.tail_even(4)?;
            }
        }
        for j in 8..=top {
            if j % 2 == 1 {
                st.odd(j)?;
            } else if j == top {
                st.tail_even(j)?;
            } else {
                st.even_step(j)?;
            }
        }
    }

    let out_max = if top % 2 == 1 { top } else { n_max };
    let values: BTreeMap<u32, Rational> = st
        .known
        .iter()
        .filter(|(&k, _)| k as u32 <= out_max)
        .map(|(&k, v)| (k as u32, v.clone()))
        .collect();
    let cumulants = CumulantSeq::new(values, Provenance::Recovered)?.into_symmetric()?;
    Ok(Recovery {
        cumulants,
        trace: st.trace,
    })
}

/// Gaussian reference: `d_n = (-1)^n n! sigma^{2(n+1)}`.
pub fn gaussian_derivs(variance: &Rational, n_max: u32) -> DerivSeq {
    let mut values = BTreeMap::new();
    let mut fact = Rational::one();
    for n in 1..=n_max {
        fact *= Rational::from_integer(n.into());
        let mut v = &fact * crate::rational::pow(variance, n + 1);
        if n % 2 == 1 {
            v = -v;
        }
        values.insert(n, v);
    }
    DerivSeq { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::{cumulants_gaussian, cumulants_laplace, cumulants_rademacher};
    use crate::rational::{int, ratio};

    #[test]
    fn simple_derivatives() {
        let t = RnTable::in_memory();
        let r = cumulants_rademacher(3).unwrap();
        let d = evaluate_derivs(&r, 2, &t).unwrap();
        assert_eq!(d.get(1), Some(&int(-1)));
        assert_eq!(d.get(2), Some(&int(2)));
        let l = cumulants_laplace(&int(1), 3).unwrap();
        let d = evaluate_derivs(&l, 2, &t).unwrap();
        assert_eq!((d.get(1), d.get(2)), (Some(&int(-4)), Some(&int(16))));
        assert!(matches!(
            evaluate_derivs(&r, 3, &t),
            Err(MmseError::InsufficientOrders { need: 4, have: 3 })
        ));
    }

    #[test]
    fn gaussian_matches_reference() {
        let t = RnTable::in_memory();
        let v = ratio(1, 3);
        let g = cumulants_gaussian(&v, 9).unwrap();
        assert_eq!(evaluate_derivs(&g, 8, &t).unwrap(), gaussian_derivs(&v, 8));
    }

    #[test]
    fn order_map() {
        assert_eq!(mmse_to_mmse_order_map(&ratio(1, 2)).unwrap(), int(1));
        assert_eq!(mmse_to_mmse_order_map(&int(1)).unwrap(), ratio(1, 2));
        assert_eq!(mmse_to_mmse_order_map(&int(2)).unwrap(), ratio(1, 4));
        assert!(mmse_to_mmse_order_map(&int(0)).is_err());
    }

    #[test]
    fn rademacher_round_trip_small() {
        let t = RnTable::in_memory();
        let k = cumulants_rademacher(11).unwrap();
        let d = evaluate_derivs(&k, 10, &t).unwrap();
        let rec = recover_cumulants(&d, RecoveryMode::Alternating, 10, &t).unwrap();
        assert_eq!(rec.cumulants.values(), k.values());
    }

    #[test]
    fn point_mass() {
        let t = RnTable::in_memory();
        let d = DerivSeq::new((1..=5).map(|n| (n, int(0))).collect()).unwrap();
        let rec = recover_cumulants(&d, RecoveryMode::SymmetricStar, 5, &t).unwrap();
        assert!(rec.cumulants.values().values().all(|v| v.is_zero()));
        let bad = DerivSeq::new([(1, int(0)), (2, int(1))].into_iter().collect()).unwrap();
        assert!(matches!(
            recover_cumulants(&bad, RecoveryMode::SymmetricStar, 2, &t),
            Err(RecoveryError::Inconsistent { .. })
        ));
    }

    #[test]
    fn irrational_variance() {
        let t = RnTable::in_memory();
        let d = DerivSeq::new([(1, int(-2))].into_iter().collect()).unwrap();
        assert!(matches!(
            recover_cumulants(&d, RecoveryMode::Positive, 1, &t),
            Err(RecoveryError::Irrational { order: 2, .. })
        ));
    }
}
