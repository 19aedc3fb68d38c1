//! `verify`: the invariant suites against a table.

use gammaflow::closed_forms::{closed_coeff, cross_validate, degree_checks, ClosedCoeff};
use gammaflow::cumulants::cumulants_gaussian;
use gammaflow::format::serialize;
use gammaflow::golden;
use gammaflow::laws::structure_violations;
use gammaflow::mmse::evaluate_derivs;
use gammaflow::rational::{factorial, format_rational, int, pow, ratio};
use gammaflow::{Rational, RnTable};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::Failure;

/// Published numbers of distinct monomials in `R_n`.
pub const TERM_COUNTS: [(u32, usize); 10] = [
    (3, 1),
    (4, 2),
    (5, 4),
    (6, 8),
    (7, 14),
    (8, 24),
    (9, 42),
    (10, 69),
    (15, 665),
    (20, 4555),
];

pub struct Section {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl Section {
    fn new(name: &'static str) -> Self {
        Section {
            name,
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub struct Report {
    pub max_n: u32,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(Section::passed)
    }

    pub fn to_json(&self) -> Value {
        let sections: Vec<Value> = self
            .sections
            .iter()
            .map(|s| {
                json!({
                    "name": s.name,
                    "passed": s.passed(),
                    "checked": s.checked,
                    "failures": s.failures,
                })
            })
            .collect();
        json!({ "max_n": self.max_n, "passed": self.passed(), "sections": sections })
    }

    pub fn to_pretty(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            let status = if s.passed() { "ok" } else { "FAILED" };
            out.push_str(&format!("{:<14} {status} ({} checks)\n", s.name, s.checked));
            for f in &s.failures {
                out.push_str(&format!("  {f}\n"));
            }
        }
        out.push_str(if self.passed() {
            "all checks passed"
        } else {
            "verification failed"
        });
        out
    }
}

fn laws(t: &RnTable, max_n: u32) -> Result<Section, Failure> {
    let mut s = Section::new("laws");
    for n in 3..=max_n {
        let r = t.get(n)?;
        for v in structure_violations(&r, n) {
            s.failures.push(format!("{v:?}"));
        }
        s.checked += r.len();
    }
    let r4 = t.get(4)?;
    for c in degree_checks(3, &r4) {
        s.check(c.passed, || {
            format!(
                "n=3 {}: expected {}, found {}",
                c.check, c.expected, c.found
            )
        });
    }
    Ok(s)
}

fn closed_forms(t: &RnTable, max_n: u32) -> Result<Section, Failure> {
    let mut s = Section::new("closed-forms");
    let report = cross_validate(max_n - 1, t)?;
    for c in &report.checks {
        s.check(c.passed, || {
            format!(
                "n={} {}: expected {}, found {}",
                c.n, c.check, c.expected, c.found
            )
        });
    }
    for n in 4..=max_n {
        let r = t.get(n)?;
        for (alpha, c) in r.iter() {
            if let ClosedCoeff::Value { value, source } = closed_coeff(alpha, n) {
                s.check(&value == c, || {
                    format!("R_{n} {alpha}: {source} gives {value}, found {c}")
                });
            }
        }
    }
    Ok(s)
}

fn gaussian(t: &RnTable, max_n: u32) -> Result<Section, Failure> {
    let mut s = Section::new("gaussian");
    for v in [int(1), int(2), ratio(1, 3)] {
        let k = cumulants_gaussian(&v, max_n)?;
        let d = evaluate_derivs(&k, max_n - 1, t)?;
        for n in 1..max_n {
            let mut expect = Rational::from_integer(factorial(n as u64)) * pow(&v, n + 1);
            if n % 2 == 1 {
                expect = -expect;
            }
            let found = d.get(n).cloned().unwrap_or_else(Rational::zero);
            s.check(found == expect, || {
                format!(
                    "var {}: d_{n} = {}, expected {}",
                    format_rational(&v),
                    format_rational(&found),
                    format_rational(&expect)
                )
            });
        }
    }
    Ok(s)
}

fn counts(t: &RnTable, max_n: u32) -> Result<Section, Failure> {
    let mut s = Section::new("term-counts");
    for (n, c) in TERM_COUNTS.into_iter().filter(|&(n, _)| n <= max_n) {
        let got = t.term_count(n)?;
        s.check(got == c, || format!("R_{n} has {got} terms, expected {c}"));
    }
    Ok(s)
}

fn goldens(t: &RnTable, max_n: u32) -> Result<Section, Failure> {
    let mut s = Section::new("golden");
    for n in golden::ORDERS.into_iter().filter(|&n| n <= max_n) {
        let expected = golden::golden(n).expect("listed order");
        let r = t.get(n)?;
        s.check(serialize(&r, n) == serialize(&expected, n), || {
            format!("R_{n} differs from its listing")
        });
    }
    Ok(s)
}

pub fn run(t: &RnTable, max_n: u32) -> Result<Report, Failure> {
    if max_n < 4 {
        return Err(Failure::usage(format!(
            "verify needs --max-n >= 4, got {max_n}"
        )));
    }
    t.get(max_n)?;
    let sections = vec![
        laws(t, max_n)?,
        closed_forms(t, max_n)?,
        gaussian(t, max_n)?,
        counts(t, max_n)?,
        goldens(t, max_n)?,
    ];
    Ok(Report { max_n, sections })
}
