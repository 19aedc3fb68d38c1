//! JSON files for rational sequences and discrete symmetric laws.
//!
//! ```json
//! {"kind":"cumulants","max_order":4,"values":{"2":"1/3","3":"0","4":"-2/15"}}
//! {"points":[{"x":"2","p":"1/4"}]}
//! ```

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::rational::{format_rational, parse_rational, Rational, RationalParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqKind {
    Cumulants,
    Moments,
    MmseDerivs,
}

impl SeqKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SeqKind::Cumulants => "cumulants",
            SeqKind::Moments => "moments",
            SeqKind::MmseDerivs => "mmse-derivs",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "cumulants" => Some(SeqKind::Cumulants),
            "moments" => Some(SeqKind::Moments),
            "mmse-derivs" => Some(SeqKind::MmseDerivs),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SeqFileError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown sequence kind {0:?}")]
    Kind(String),
    #[error("order key {0:?} is not a non-negative integer")]
    Key(String),
    #[error("value for order {order}: {source}")]
    Value {
        order: String,
        #[source]
        source: RationalParseError,
    },
    #[error("max_order {declared} does not match largest order {found}")]
    MaxOrder { declared: u32, found: u32 },
}

/// A sequence as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqFile {
    pub kind: SeqKind,
    pub values: BTreeMap<u32, Rational>,
}

impl SeqFile {
    pub fn max_order(&self) -> u32 {
        self.values.keys().next_back().copied().unwrap_or(0)
    }

    /// Canonical JSON: keys in numeric order, values as `p/q` strings.
    pub fn to_json(&self) -> String {
        let mut values = Map::new();
        for (k, v) in &self.values {
            values.insert(k.to_string(), Value::String(format_rational(v)));
        }
        let doc = json!({
            "kind": self.kind.as_str(),
            "max_order": self.max_order(),
            "values": Value::Object(values),
        });
        serde_json::to_string(&doc).expect("sequence serializes")
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, SeqFileError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            kind: String,
            max_order: u32,
            values: BTreeMap<String, String>,
        }
        let raw: Raw = serde_json::from_slice(bytes)?;
        let kind = SeqKind::parse(&raw.kind).ok_or_else(|| SeqFileError::Kind(raw.kind.clone()))?;
        let mut values = BTreeMap::new();
        for (k, v) in raw.values {
            if k.is_empty() || !k.bytes().all(|b| b.is_ascii_digit()) {
                return Err(SeqFileError::Key(k));
            }
            let order: u32 = k.parse().map_err(|_| SeqFileError::Key(k.clone()))?;
            let q =
                parse_rational(&v).map_err(|source| SeqFileError::Value { order: k, source })?;
            values.insert(order, q);
        }
        let file = SeqFile { kind, values };
        if file.max_order() != raw.max_order {
            return Err(SeqFileError::MaxOrder {
                declared: raw.max_order,
                found: file.max_order(),
            });
        }
        Ok(file)
    }
}

/// Atoms `(x_j, p_j)` of `sum_j (p_j / 2)(delta_{x_j} + delta_{-x_j})`.
pub fn parse_points(bytes: &[u8]) -> Result<Vec<(Rational, Rational)>, SeqFileError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Point {
        x: String,
        p: String,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        points: Vec<Point>,
    }
    let raw: Raw = serde_json::from_slice(bytes)?;
    raw.points
        .into_iter()
        .enumerate()
        .map(|(i, pt)| {
            let x = parse_rational(&pt.x).map_err(|source| SeqFileError::Value {
                order: format!("points[{i}].x"),
                source,
            })?;
            let p = parse_rational(&pt.p).map_err(|source| SeqFileError::Value {
                order: format!("points[{i}].p"),
                source,
            })?;
            Ok((x, p))
        })
        .collect()
}
