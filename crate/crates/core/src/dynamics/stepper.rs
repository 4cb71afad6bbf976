use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nonlinear::{nonlinear_term, NonlinearMethod};
use super::SolverState;
use crate::error::{invalid, Error, Result};
use crate::norms::velocity_linf;
use crate::spectral::{leray_project, Grid, SpectralField};

/// Smallest velocity scale used by the CFL rule, so a vanishing field does
/// not produce an unbounded step.
pub const CFL_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    Fixed(f64),
    Auto,
}

impl fmt::Display for TimeStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeStep::Fixed(dt) => write!(f, "{dt}"),
            TimeStep::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for TimeStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(TimeStep::Auto);
        }
        let dt: f64 = s
            .parse()
            .map_err(|_| invalid("dt", format!("expected a number or `auto`, got `{s}`")))?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        Ok(TimeStep::Fixed(dt))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical RK4 on `exp(mu |k|^2 t) v`, viscous decay integrated exactly.
    #[default]
    IntegratingFactorRk4,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("if_rk4")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "if_rk4" => Ok(Scheme::IntegratingFactorRk4),
            other => Err(invalid("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: TimeStep,
    pub cfl_safety: f64,
    pub scheme: Scheme,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt: TimeStep::Auto,
            cfl_safety: 0.5,
            scheme: Scheme::IntegratingFactorRk4,
        }
    }
}

impl StepperConfig {
    pub fn fixed(dt: f64) -> Self {
        StepperConfig {
            dt: TimeStep::Fixed(dt),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("dt", format!("must be positive, got {dt}")));
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(invalid(
                "cfl_safety",
                format!("must lie in (0, 1], got {}", self.cfl_safety),
            ));
        }
        Ok(())
    }
}

/// Step size for a run of length `span` starting from `v`.
///
/// A fixed step is returned as is. The automatic step starts from
/// `cfl_safety dx / max(|v|_inf, 1e-8)` and is shortened so that a whole
/// number of steps covers `span`.
pub fn resolve_dt(v: &SpectralField, cfg: &StepperConfig, span: f64) -> Result<f64> {
    cfg.validate()?;
    match cfg.dt {
        TimeStep::Fixed(dt) => Ok(dt),
        TimeStep::Auto => {
            let umax = velocity_linf(v).max(CFL_FLOOR);
            let dt_cfl = cfg.cfl_safety * v.grid().spacing() / umax;
            if !(span > 0.0 && span.is_finite()) {
                return Ok(dt_cfl);
            }
            let steps = (span / dt_cfl).ceil().max(1.0);
            Ok(span / steps)
        }
    }
}

/// Integrating-factor RK4 with cached decay factors for one step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Arc<Grid>,
    mu: f64,
    dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

type Coeffs = [Vec<Complex64>; 3];

fn combine<F>(g: &Grid, f: F) -> Coeffs
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    std::array::from_fn(|c| (0..g.len()).into_par_iter().map(|idx| f(c, idx)).collect())
}

impl Stepper {
    pub fn new(grid: &Arc<Grid>, mu: f64, dt: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid("mu", format!("viscosity must be positive, got {mu}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        let decay = |h: f64| -> Vec<f64> {
            grid.magnitudes()
                .iter()
                .map(|&m| (-mu * m * m * h).exp())
                .collect()
        };
        Ok(Stepper {
            grid: Arc::clone(grid),
            mu,
            dt,
            full: decay(dt),
            half: decay(0.5 * dt),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn n_of(&self, c: &Coeffs) -> Result<Coeffs> {
        let f = SpectralField::from_parts(&self.grid, c.clone(), true);
        Ok(nonlinear_term(&f, NonlinearMethod::PseudoSpectral)?.into_coeffs())
    }

    /// Advances `state` by one step of length `dt`, returning the new state.
    /// Non-finite coefficients yield [`Error::Breakdown`] and leave `state` intact.
    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        if **state.v.grid() != *self.grid {
            return Err(invalid("grid", "state and stepper use different grids"));
        }
        if state.mu.to_bits() != self.mu.to_bits() {
            return Err(invalid("mu", "state and stepper use different viscosities"));
        }
        let g = &self.grid;
        let (e, eh, h) = (&self.full, &self.half, self.dt);
        let v = state.v.coeffs();

        let a = self.n_of(v)?;
        let v2 = combine(g, |c, i| eh[i] * (v[c][i] + 0.5 * h * a[c][i]));
        let b = self.n_of(&v2)?;
        let v3 = combine(g, |c, i| eh[i] * v[c][i] + 0.5 * h * b[c][i]);
        let c3 = self.n_of(&v3)?;
        let v4 = combine(g, |c, i| e[i] * v[c][i] + h * eh[i] * c3[c][i]);
        let d = self.n_of(&v4)?;
        let next = combine(g, |c, i| {
            e[i] * v[c][i] + h / 6.0 * (e[i] * a[c][i] + 2.0 * eh[i] * (b[c][i] + c3[c][i]) + d[c][i])
        });

        let raw = SpectralField::from_parts(g, next, false);
        let mut v_new = leray_project(&raw);
        v_new.symmetrize();
        v_new.apply_dealias();
        let t_new = state.t + h;
        let step_new = state.step_count + 1;
        if !v_new.is_finite() {
            return Err(Error::Breakdown {
                t: t_new,
                step: step_new,
            });
        }
        Ok(SolverState {
            v: v_new,
            t: t_new,
            mu: self.mu,
            step_count: step_new,
        })
    }
}

/// One step of the configured scheme. An automatic step is resolved from
/// the current field alone.
pub fn step(state: &SolverState, cfg: &StepperConfig) -> Result<SolverState> {
    let dt = resolve_dt(&state.v, cfg, f64::NAN)?;
    Stepper::new(state.v.grid(), state.mu, dt)?.step(state)
}
