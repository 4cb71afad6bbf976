//! Fourier representation of periodic vector fields and the structural
//! operators (projection, curl) the dynamics act through.

pub mod fft;
mod field;
mod grid;

pub use field::{
    biot_savart, curl_hat, leray_project, transform_forward, transform_inverse, PhysicalField,
    SpectralField,
};
pub use grid::{make_grid, Grid};
