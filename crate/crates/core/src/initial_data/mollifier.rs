use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralField;

/// Fourier symbol family of the mollifier. Both satisfy `symbol(0) = 1` and
/// `0 < symbol <= 1`, and both are symbols of nonnegative unit-mass kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifierShape {
    /// `exp(-|xi|^2 / 2)`, the heat kernel at unit time.
    Gaussian,
    /// `exp(-|xi|)`, the Poisson kernel.
    Poisson,
}

impl MollifierShape {
    pub fn symbol(self, xi: f64) -> f64 {
        match self {
            MollifierShape::Gaussian => (-0.5 * xi * xi).exp(),
            MollifierShape::Poisson => (-xi.abs()).exp(),
        }
    }
}

impl fmt::Display for MollifierShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MollifierShape::Gaussian => "gaussian",
            MollifierShape::Poisson => "poisson",
        })
    }
}

impl FromStr for MollifierShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(MollifierShape::Gaussian),
            "poisson" => Ok(MollifierShape::Poisson),
            other => Err(invalid("mollifier", format!("unknown shape `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub shape: MollifierShape,
    pub lambda: f64,
}

impl MollifierSpec {
    pub fn new(shape: MollifierShape, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(MollifierSpec { shape, lambda })
    }

    pub fn gaussian(lambda: f64) -> Result<Self> {
        Self::new(MollifierShape::Gaussian, lambda)
    }

    /// `zeta_hat(lambda |xi|)`.
    pub fn symbol(&self, xi: f64) -> f64 {
        self.shape.symbol(self.lambda * xi)
    }
}

/// Convolution with the rescaled mollifier: `v0_hat(k) zeta_hat(lambda |2 pi k / L|)`.
pub fn mollify(v0: &SpectralField, spec: &MollifierSpec) -> Result<SpectralField> {
    if !(spec.lambda > 0.0 && spec.lambda.is_finite()) {
        return Err(invalid("lambda", format!("must be positive, got {}", spec.lambda)));
    }
    let mut out = v0.clone();
    let grid = std::sync::Arc::clone(v0.grid());
    let solenoidal = v0.is_solenoidal();
    out.apply_symbol(|idx| spec.symbol(grid.magnitude(idx)));
    if solenoidal {
        out.refresh_solenoidal();
    }
    Ok(out)
}
