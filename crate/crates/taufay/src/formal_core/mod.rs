//! Graded formal series in the times, Laurent objects in local variables,
//! the insertion operator, residues and correlators.

mod coeff;
mod laurent;
mod series;

use thiserror::Error;

pub use coeff::{rat, Coeff, GaussianRational};
pub use laurent::{
    correlator, formal_potential_differential, insertion, log_up_to_constant, miwa_jimbo,
    sato_shift, Counterterms, LaurentSeries, Potential,
};
pub use series::{GradedSeries, Monomial, TimesVector, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("truncation degrees differ: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("logarithm of a series with zero constant term")]
    LogOfZeroConstant,
    #[error("series with zero constant term is not invertible")]
    NotInvertible,
    #[error("constant term has no exp/log in the coefficient field")]
    ConstantNotRepresentable,
    #[error("truncation degree {available} too low, need {needed}")]
    InsufficientTruncation { needed: u32, available: u32 },
    #[error("residue of an object without a differential")]
    NotADifferential,
    #[error("Laurent objects in different variables")]
    VariableMismatch,
    #[error("differential flags do not combine")]
    DifferentialMismatch,
}
