//! Grunsky operators of univalent functions and the quasiconformal machinery around them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beltrami;
pub mod cli;
pub mod error;
pub mod grunsky;
pub mod lspace;
pub mod metrics;
pub mod models;
pub mod quad;
pub mod series;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
