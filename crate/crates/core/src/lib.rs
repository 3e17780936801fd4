//! Classification p-values.
//!
//! A scoring classifier plus a held-out calibration set yields, for any new
//! object, the empirical probability that an object of a given class scores
//! at least as far toward the other class. Thresholding that p-value at α
//! bounds the class's error rate by α.
//!
//! The crate also carries everything needed for the normality experiment:
//! data generation, a logistic scorer, classical baseline tests, and an
//! evaluation harness.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calib_io;
pub mod classical;
pub mod datagen;
pub mod decision;
pub mod error;
pub mod harness;
pub mod moments;
pub mod pvalue;
pub mod rng;
pub mod scoring;

pub use decision::{Decision, DerivedTest};
pub use error::{Error, Result};
pub use pvalue::{
    dkw_band, dkw_required_n, min_calibration_size, CalibrationSet, Class, EstimatorMode, PValueEstimate, Score,
};
