//! Rejections are written as `!(x > 0.0)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod initial_data;
pub mod norms;
pub(crate) mod numerics;
pub mod spectral;

pub use error::{Error, Result};
