//! Partitions: the exponent structure of one monomial `T_{a1} T_{a2} ... T_{ar}`.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

/// Part storage. Monomials of `R_n` have at most `n` parts, so 16 inline slots
/// cover every order the engine is used at without spilling to the heap.
pub type Parts = SmallVec<[u16; 16]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("partition parts must be >= 1, got 0")]
    ZeroPart,
    #[error("invalid partition syntax: {0:?}")]
    Syntax(String),
}

/// A weakly decreasing tuple of positive integers. The empty partition is the
/// constant monomial.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition {
    parts: Parts,
}

impl Partition {
    /// Builds a partition from parts in any order.
    pub fn new<I: IntoIterator<Item = u16>>(parts: I) -> Result<Self, PartitionError> {
        let mut parts: Parts = parts.into_iter().collect();
        if parts.contains(&0) {
            return Err(PartitionError::ZeroPart);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    /// Caller guarantees the parts are nonzero and weakly decreasing.
    pub(crate) fn from_sorted(parts: Parts) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(parts.iter().all(|&p| p > 0));
        Partition { parts }
    }

    /// `(j, j, ..., j)` with `len` copies.
    pub fn repeated(part: u16, len: usize) -> Self {
        assert!(part > 0 || len == 0);
        Partition {
            parts: std::iter::repeat_n(part, len).collect(),
        }
    }

    pub fn parts(&self) -> &[u16] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().map(|&p| p as u32).sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Largest part, if any.
    pub fn first(&self) -> Option<u16> {
        self.parts.first().copied()
    }

    /// Number of occurrences of `part`.
    pub fn multiplicity(&self, part: u16) -> usize {
        self.parts.iter().filter(|&&p| p == part).count()
    }

    /// Distinct parts (descending) with their multiplicities.
    pub fn runs(&self) -> Vec<(u16, usize)> {
        let mut out: Vec<(u16, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, m)) if *q == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Concatenation of the parts of both partitions (monomial product).
    pub fn merge(&self, other: &Partition) -> Partition {
        let mut parts = Parts::with_capacity(self.len() + other.len());
        let (a, b) = (&self.parts, &other.parts);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] >= b[j] {
                parts.push(a[i]);
                i += 1;
            } else {
                parts.push(b[j]);
                j += 1;
            }
        }
        parts.extend_from_slice(&a[i..]);
        parts.extend_from_slice(&b[j..]);
        Partition::from_sorted(parts)
    }

    /// Removes one copy of `part`; `None` if absent.
    pub fn remove_one(&self, part: u16) -> Option<Partition> {
        let pos = self.parts.iter().position(|&p| p == part)?;
        let mut parts = self.parts.clone();
        parts.remove(pos);
        Some(Partition::from_sorted(parts))
    }

    /// Adds one copy of `part`.
    pub fn with_part(&self, part: u16) -> Partition {
        assert!(part > 0);
        let mut parts = self.parts.clone();
        let pos = parts.iter().position(|&p| p < part).unwrap_or(parts.len());
        parts.insert(pos, part);
        Partition::from_sorted(parts)
    }

    /// Parses `"8,8,2"` (any order, whitespace tolerated). The empty string is
    /// the empty partition.
    pub fn parse_list(s: &str) -> Result<Partition, PartitionError> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u16>()
                    .map_err(|_| PartitionError::Syntax(s.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Partition::new(parts)
    }
}

/// Graded-lexicographic order: weight first, then parts lexicographically.
/// Canonical output lists terms in *descending* order of this relation.
impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.parts.as_slice().cmp(other.parts.as_slice()))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.parts.as_slice())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", strs.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_sorts() {
        let p = Partition::new([2, 8, 8]).unwrap();
        assert_eq!(p.parts(), &[8, 8, 2]);
        assert_eq!(p.weight(), 18);
        assert_eq!(p.len(), 3);
        assert_eq!(p, Partition::new([8, 2, 8]).unwrap());
    }

    #[test]
    fn zero_part_rejected() {
        assert_eq!(Partition::new([3, 0]), Err(PartitionError::ZeroPart));
    }

    #[test]
    fn graded_lex() {
        let a = Partition::new([3, 3, 2]).unwrap();
        let b = Partition::new([2, 2, 2, 2]).unwrap();
        let c = Partition::new([2, 2, 2]).unwrap();
        assert!(a > b);
        assert!(b > c);
        assert!(Partition::empty() < c);
    }

    #[test]
    fn runs_merge_remove() {
        let p = Partition::new([5, 5, 3, 2, 2, 2]).unwrap();
        assert_eq!(p.runs(), vec![(5, 2), (3, 1), (2, 3)]);
        let q = Partition::new([4, 2]).unwrap();
        assert_eq!(p.merge(&q).parts(), &[5, 5, 4, 3, 2, 2, 2, 2]);
        assert_eq!(p.remove_one(3).unwrap().parts(), &[5, 5, 2, 2, 2]);
        assert!(p.remove_one(4).is_none());
        assert_eq!(p.with_part(4).parts(), &[5, 5, 4, 3, 2, 2, 2]);
        assert_eq!(p.multiplicity(2), 3);
    }

    #[test]
    fn parse_list() {
        assert_eq!(Partition::parse_list("8, 2,8").unwrap().parts(), &[8, 8, 2]);
        assert!(Partition::parse_list("").unwrap().is_empty());
        assert!(matches!(
            Partition::parse_list("8;2"),
            Err(PartitionError::Syntax(_))
        ));
    }
}
