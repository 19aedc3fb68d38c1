//! Structural laws every `R_n` obeys, as checkable predicates.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::partition::Partition;
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// Weight `2n`.
    Weight,
    /// Parts in `[2, n - 1]`.
    PartRange,
    /// Length in `[3, n]`.
    Length,
    /// Coefficient sign is `(-1)^length`.
    Sign,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub law: Law,
    pub n: u32,
    pub partition: Vec<u16>,
    pub coeff: String,
}

fn violation(law: Law, n: u32, part: &Partition, c: &BigInt) -> Violation {
    Violation {
        law,
        n,
        partition: part.parts().to_vec(),
        coeff: c.to_string(),
    }
}

/// All violations of the weight, part-range, length and sign laws in `r`,
/// which is taken to be `R_n`. Empty for a correct table.
pub fn structure_violations(r: &Poly, n: u32) -> Vec<Violation> {
    let mut out = Vec::new();
    for (part, c) in r.terms() {
        if part.weight() != 2 * n {
            out.push(violation(Law::Weight, n, part, c));
        }
        if part.parts().iter().any(|&p| p < 2 || p as u32 > n - 1) {
            out.push(violation(Law::PartRange, n, part, c));
        }
        if part.len() < 3 || part.len() > n as usize {
            out.push(violation(Law::Length, n, part, c));
        }
        let sign_ok = if part.len() % 2 == 0 {
            !c.is_negative()
        } else {
            !c.is_positive()
        };
        if !sign_ok {
            out.push(violation(Law::Sign, n, part, c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_each_law() {
        let good: Poly = "-12*T2*T3^2 + 6*T2^4".parse().unwrap();
        assert!(structure_violations(&good, 4).is_empty());
        let bad: Poly = "12*T2*T3^2 + 6*T2^3 - T4*T2^2".parse().unwrap();
        let laws: Vec<Law> = structure_violations(&bad, 4)
            .iter()
            .map(|v| v.law)
            .collect();
        assert!(laws.contains(&Law::Sign));
        assert!(laws.contains(&Law::Weight));
        assert!(laws.contains(&Law::PartRange));
        let short: Poly = "T4*T4".parse().unwrap();
        assert!(structure_violations(&short, 4)
            .iter()
            .any(|v| v.law == Law::Length));
    }
}
