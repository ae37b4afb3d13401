//! Tau functions, Hirota bilinear equations and Fay identities.
//!
//! Tau functions are built three ways: by theta functions on genus-0/1
//! surfaces, by Sato shifts of the Airy spectral curve, and by Hermitian
//! matrix-model moment determinants. The identities are checked in exact
//! truncated-series arithmetic and numerically.

pub mod exec;
pub mod formal_core;
pub mod divisors;
pub mod quadrature;
pub mod hirota_fay;
pub mod riemann_geometry;
pub mod theta_tau;
pub mod matrix_tau;
pub mod spectral_curve;
pub mod cli_report;
