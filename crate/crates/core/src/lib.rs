//! Free-boundary plaque-growth model.
//!
//! Negated float comparisons such as `!(x > 0.0)` are used on purpose so that
//! NaN inputs are rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod closed_form;
pub mod config;
pub mod continuation;
pub mod error;
pub mod fb_solver;
pub mod linalg;
pub mod output;
pub mod polar_disc;
pub mod special_fn;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
