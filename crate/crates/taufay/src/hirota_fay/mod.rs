//! Hirota bilinear operators, the KP equation and Fay identities, checked
//! both on truncated series and numerically.

use thiserror::Error;

use crate::divisors::DivisorError;
use crate::formal_core::SeriesError;

pub mod operator;
pub mod symbolic;
pub mod formal;
pub mod numeric;

pub use formal::{
    fay_det_residual, fay_n2_residual, hirota_divisor_residual, hirota_residual, kernel_ratio,
    reproducing_residual, wn_determinantal_residual, TauContext,
};
pub use numeric::{fay_numeric, kernel, kernel_leading, reproducing_numeric, Check, ShiftedTau};
pub use operator::{
    apply_bilinear, dmu, kp_residual, kp_residual_first_derivative_variant, BilinearOperator,
    OpMonomial,
};
pub use symbolic::{kp_bilinear_form, kp_log_form, DiffPoly};

#[derive(Debug, Error)]
pub enum HirotaError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error("cannot parse bilinear operator {0:?}")]
    Parse(String),
    #[error(transparent)]
    Geometry(#[from] crate::riemann_geometry::GeometryError),
    #[error("{0}")]
    Backend(String),
    #[error("{0}")]
    Invalid(String),
}
