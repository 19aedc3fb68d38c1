//! `--dist` specifications.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gammaflow::cumulants::{
    cumulants_discrete_symmetric, cumulants_laplace, cumulants_rademacher, cumulants_uniform,
    moments_to_cumulants, CumulantSeq, MomentSeq, Provenance,
};
use gammaflow::rational::{parse_rational, Rational};
use gammaflow::seqfile::{parse_points, SeqFile, SeqKind};

use crate::error::Failure;

#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Uniform,
    Laplace(Rational),
    Rademacher,
    Discrete(PathBuf),
    FromFile(PathBuf),
}

impl FromStr for DistSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("uniform", None) => Ok(DistSpec::Uniform),
            ("rademacher", None) => Ok(DistSpec::Rademacher),
            ("laplace", Some(b)) => parse_rational(b)
                .map(DistSpec::Laplace)
                .map_err(|e| format!("laplace scale: {e}")),
            ("discrete", Some(p)) if !p.is_empty() => Ok(DistSpec::Discrete(p.into())),
            ("from-file", Some(p)) if !p.is_empty() => Ok(DistSpec::FromFile(p.into())),
            _ => Err(format!(
                "unknown distribution {s:?}; expected uniform, laplace:<b>, rademacher, \
                 discrete:<file> or from-file:<file>"
            )),
        }
    }
}

pub fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::io(path, e))
}

impl DistSpec {
    /// `K_2, ..., K_max`.
    pub fn cumulants(&self, max: u32) -> Result<CumulantSeq, Failure> {
        Ok(match self {
            DistSpec::Uniform => cumulants_uniform(max)?,
            DistSpec::Rademacher => cumulants_rademacher(max)?,
            DistSpec::Laplace(b) => cumulants_laplace(b, max)?,
            DistSpec::Discrete(path) => {
                cumulants_discrete_symmetric(&parse_points(&read(path)?)?, max)?
            }
            DistSpec::FromFile(path) => {
                let file = SeqFile::parse(&read(path)?)?;
                let have = file.max_order();
                let seq = match file.kind {
                    SeqKind::Cumulants => CumulantSeq::new(file.values, Provenance::File)?,
                    SeqKind::Moments => moments_to_cumulants(&MomentSeq::new(file.values)?)?,
                    SeqKind::MmseDerivs => {
                        return Err(Failure::usage(format!(
                            "{} holds mmse derivatives; use `recover` on it",
                            path.display()
                        )))
                    }
                };
                if have < max {
                    return Err(Failure::data(format!(
                        "{} stops at order {have}, order {max} requested",
                        path.display()
                    )));
                }
                seq.truncated(max)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gammaflow::rational::ratio;

    #[test]
    fn parses_specs() {
        assert_eq!("uniform".parse(), Ok(DistSpec::Uniform));
        assert_eq!("laplace:2/3".parse(), Ok(DistSpec::Laplace(ratio(2, 3))));
        assert_eq!(
            "discrete:pts.json".parse(),
            Ok(DistSpec::Discrete("pts.json".into()))
        );
        assert!("laplace".parse::<DistSpec>().is_err());
        assert!("uniform:1".parse::<DistSpec>().is_err());
        assert!("cauchy".parse::<DistSpec>().is_err());
        assert!("from-file:".parse::<DistSpec>().is_err());
    }
}
