//! Exact computation of the heat-flow entropy-derivative polynomials `R_n`,
//! closed-form coefficient checks, cumulant sequences and mmse-derivative
//! evaluation and inversion.

pub mod closed_forms;
pub mod cumulants;
pub mod format;
pub mod golden;
pub mod laws;
pub mod mmse;
pub mod ops;
pub mod partition;
pub mod poly;
pub mod rational;
pub mod seqfile;
pub mod table;

pub use partition::{Partition, PartitionError};
pub use poly::{Poly, RatPoly, SparsePoly};
pub use rational::Rational;
pub use table::{RnTable, TableError};
