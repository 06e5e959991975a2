//! Normalized gradient methods for generalized-smooth nonconvex optimization.
//!
//! The crate is organised around a handful of layers:
//!
//! - [`types`], [`constants`] and [`rng`]: the shared vocabulary. Smoothness
//!   parameters `(alpha, L0, L1)`, noise parameters `(Gamma, Lambda)`, the
//!   closed-form constants derived from them, and seeded random streams.
//! - [`objectives`]: finite-sum objectives with hand-derived gradients
//!   (polynomial and exponential witnesses, phase retrieval, chi-square DRO)
//!   plus data generation and CSV ingestion.
//! - [`smoothness`]: sampled verifiers for the smoothness conditions and
//!   descent lemmas, and envelope estimators for their constants.
//! - [`optimizers`]: beta-normalized GD, clipped GD, the SGD family and
//!   normalized SPIDER, with theoretical hyperparameter calculators and a
//!   divergence certificate for under-normalized GD.
//! - [`harness`]: experiment configs, builtin presets, CSV emission and the
//!   property-suite driver used by the CLI.
//!
//! All gradients are written by hand and cross-checked against finite
//! differences in the test suite.

// Negated comparisons are used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod objectives;
pub mod optimizers;
pub mod rng;
pub mod smoothness;
pub mod types;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use types::{NoiseSpec, ParamPoint, SmoothnessSpec, Vector};
