//! Genus-0 and genus-1 surfaces: theta function, prime form, canonical
//! meromorphic forms and the Szegő kernel.

use num_complex::Complex64;
use thiserror::Error;

use crate::divisors::DivisorError;
use crate::quadrature::QuadError;

pub mod forms;
pub mod surface;
pub mod szego;
pub mod theta;

pub use forms::{
    decompose, extract_times, round_trip_error, Component, FormEvaluator, FormTerm, FormTimes, MeromorphicForm,
    PathIntegral,
};
pub use surface::{Characteristic, ComplexRecord, SurfaceContext, DEFAULT_TAIL};
pub use szego::{MonodromyReport, SzegoKernel};
pub use theta::{quasi_periodicity_residual, theta, theta_gradient, Theta};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("modulus {0} does not have positive imaginary part")]
    NotSiegel(Complex64),
    #[error("theta vanishes at {0}")]
    ThetaZero(Complex64),
    #[error("genus {0} is not supported here")]
    UnsupportedGenus(u32),
    #[error("no pole-free path from {0} to {1}")]
    PathThroughPole(Complex64, Complex64),
    #[error("pole at {0} lies on a marked loop")]
    PoleOnLoop(Complex64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error("{0}")]
    Invalid(String),
}
