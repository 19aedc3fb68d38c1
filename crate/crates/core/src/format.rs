//! Canonical polynomial file format.
//!
//! ```json
//! {"n":3,"terms":[{"partition":[2,2,2],"coeff":"-2"}]}
//! ```
//!
//! Terms are emitted in graded-lex descending order and coefficients as signed
//! decimal strings, so the byte stream is a pure function of the polynomial.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::Partition;
use crate::poly::Poly;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed polynomial JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("partition {0:?} is not weakly decreasing")]
    NotDecreasing(Vec<u16>),
    #[error("partition {0:?} contains a zero part")]
    ZeroPart(Vec<u16>),
    #[error("invalid coefficient {0:?}")]
    BadCoeff(String),
    #[error("zero coefficient for partition {0:?}")]
    ZeroCoeff(Vec<u16>),
    #[error("duplicate partition {0:?}")]
    Duplicate(Vec<u16>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    partition: Vec<u16>,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRecord {
    n: u32,
    terms: Vec<TermRecord>,
}

/// A parsed polynomial file: the declared order and the polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFile {
    pub n: u32,
    pub poly: Poly,
}

pub fn serialize(p: &Poly, n: u32) -> String {
    let record = PolyRecord {
        n,
        terms: p
            .terms()
            .into_iter()
            .map(|(part, c)| TermRecord {
                partition: part.parts().to_vec(),
                coeff: c.to_string(),
            })
            .collect(),
    };
    serde_json::to_string(&record).expect("polynomial records always serialize")
}

pub fn parse(bytes: &[u8]) -> Result<PolyFile, FormatError> {
    let record: PolyRecord = serde_json::from_slice(bytes)?;
    let mut seen: HashSet<Vec<u16>> = HashSet::with_capacity(record.terms.len());
    let mut terms = Vec::with_capacity(record.terms.len());
    for t in record.terms {
        if t.partition.contains(&0) {
            return Err(FormatError::ZeroPart(t.partition));
        }
        if t.partition.windows(2).any(|w| w[0] < w[1]) {
            return Err(FormatError::NotDecreasing(t.partition));
        }
        let coeff = parse_coeff(&t.coeff)?;
        if coeff.is_zero() {
            return Err(FormatError::ZeroCoeff(t.partition));
        }
        if !seen.insert(t.partition.clone()) {
            return Err(FormatError::Duplicate(t.partition));
        }
        let part = Partition::new(t.partition).expect("validated above");
        terms.push((part, coeff));
    }
    Ok(PolyFile {
        n: record.n,
        poly: Poly::from_terms(terms),
    })
}

/// Strict signed decimal: optional leading `-`, then digits only.
fn parse_coeff(s: &str) -> Result<BigInt, FormatError> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(FormatError::BadCoeff(s.to_string()));
    }
    s.parse().map_err(|_| FormatError::BadCoeff(s.to_string()))
}
