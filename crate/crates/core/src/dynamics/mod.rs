//! Galerkin-truncated incompressible Navier-Stokes on the periodic box:
//! `d/dt v(k) = N(v)(k) - mu |k|^2 v(k)` with `N(v) = -P[(v . grad v)^]`.

mod nonlinear;
mod run;
mod stepper;

pub use nonlinear::{
    convective_hat, nonlinear_term, pressure_hat, rhs, NonlinearMethod, DIRECT_LIMIT,
};
pub use run::{ensemble, simulate, simulate_from, simulate_with, Ensemble, Trajectory};
pub use stepper::{resolve_dt, step, Scheme, Stepper, StepperConfig, TimeStep};

use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralField;

/// Velocity, time, viscosity and step counter of one run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub(crate) v: SpectralField,
    pub(crate) t: f64,
    pub(crate) mu: f64,
    pub(crate) step_count: u64,
}

impl SolverState {
    /// Initial state at `t = 0`. The field must be real, solenoidal and
    /// mean-free; modes outside the retained band are discarded.
    pub fn new(v: SpectralField, mu: f64) -> Result<Self> {
        Self::at(v, mu, 0.0, 0)
    }

    pub fn at(mut v: SpectralField, mu: f64, t: f64, step_count: u64) -> Result<Self> {
        Self::validate(&v, mu, t, step_count)?;
        v.apply_dealias();
        v.symmetrize();
        v.refresh_solenoidal();
        Ok(SolverState { v, t, mu, step_count })
    }

    /// Rebuilds a saved state with its coefficients untouched, so a resumed
    /// run continues bit for bit.
    pub(crate) fn restore(mut v: SpectralField, mu: f64, t: f64, step_count: u64) -> Result<Self> {
        Self::validate(&v, mu, t, step_count)?;
        if !v.is_band_limited() {
            return Err(invalid("v", "saved state has modes outside the retained band"));
        }
        v.refresh_solenoidal();
        Ok(SolverState { v, t, mu, step_count })
    }

    fn validate(v: &SpectralField, mu: f64, t: f64, step_count: u64) -> Result<()> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid("mu", format!("viscosity must be positive, got {mu}")));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid("t", format!("time must be finite and >= 0, got {t}")));
        }
        if !v.is_finite() {
            return Err(Error::Breakdown { t, step: step_count });
        }
        if v.hermitian_defect() > 1e-12 {
            return Err(invalid("v", "coefficients are not Hermitian (field is not real)"));
        }
        if v.divergence_residual() > 1e-12 {
            return Err(invalid("v", "field is not divergence-free"));
        }
        let scale = v.max_magnitude();
        if v.mean_magnitude() > 1e-14 * scale {
            return Err(Error::NonzeroMean(v.mean_magnitude()));
        }
        Ok(())
    }

    pub fn velocity(&self) -> &SpectralField {
        &self.v
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn viscosity(&self) -> f64 {
        self.mu
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn into_velocity(self) -> SpectralField {
        self.v
    }
}
