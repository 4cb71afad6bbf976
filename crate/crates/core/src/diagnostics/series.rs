use serde::{Deserialize, Serialize};

use crate::dynamics::{rhs, SolverState};
use crate::error::{invalid, Result};
use crate::norms::{energy, grad_linf, hs_norm, x_norm};
use crate::spectral::curl_hat;

/// One sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub step: u64,
    pub x_minus1: f64,
    pub x0: f64,
    pub x1: f64,
    /// Trapezoid accumulation of `X^1` over the samples so far.
    pub int_x1: f64,
    /// `x_minus1 + (mu - x_minus1 at t = 0) int_x1`.
    pub theorem_lhs: f64,
    pub grad_linf: f64,
    pub int_grad_linf: f64,
    /// `X^0` of the vorticity.
    pub omega_x0: f64,
    pub int_omega_x0: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    /// `1/2 sum_k |v(k)|^2`.
    pub energy_l2: f64,
    pub div_residual: f64,
    /// `X^{-1}` of the full right-hand side.
    pub dtv_x_minus1: f64,
    /// Largest coefficient of the nonlinear term.
    pub nonlinear_max: f64,
}

impl DiagnosticsRow {
    /// `H^k` seminorm for `k` in {1, 2, 3}.
    pub fn hk(&self, k: u32) -> Option<f64> {
        match k {
            1 => Some(self.h1),
            2 => Some(self.h2),
            3 => Some(self.h3),
            _ => None,
        }
    }
}

/// Instantaneous quantities of one state, before time accumulation.
#[derive(Debug, Clone, Copy)]
struct Snapshot {
    t: f64,
    step: u64,
    x_minus1: f64,
    x0: f64,
    x1: f64,
    grad_linf: f64,
    omega_x0: f64,
    h: [f64; 3],
    energy: f64,
    div_residual: f64,
    dtv_x_minus1: f64,
    nonlinear_max: f64,
}

fn snapshot(state: &SolverState) -> Result<Snapshot> {
    let v = state.velocity();
    let r = rhs(v, state.viscosity())?;
    // largest |N(k)|, with N = rhs + mu |k|^2 v
    let g = v.grid();
    let mu = state.viscosity();
    let mut worst: f64 = 0.0;
    for idx in 0..g.len() {
        let k2 = g.magnitude(idx).powi(2);
        let m: f64 = (0..3)
            .map(|c| (r.component(c)[idx] + mu * k2 * v.component(c)[idx]).norm_sqr())
            .sum();
        worst = worst.max(m.sqrt());
    }
    Ok(Snapshot {
        t: state.time(),
        step: state.step_count(),
        x_minus1: x_norm(v, -1.0)?,
        x0: x_norm(v, 0.0)?,
        x1: x_norm(v, 1.0)?,
        grad_linf: grad_linf(v),
        omega_x0: x_norm(&curl_hat(v), 0.0)?,
        h: [hs_norm(v, 1.0)?, hs_norm(v, 2.0)?, hs_norm(v, 3.0)?],
        energy: energy(v),
        div_residual: v.divergence_residual(),
        dtv_x_minus1: x_norm(&r, -1.0)?,
        nonlinear_max: worst,
    })
}

/// Builds the series of a run, one row per sampled state, integrating the
/// time-accumulated columns with the trapezoid rule over the samples.
#[derive(Debug, Clone)]
pub struct SeriesRecorder {
    mu: f64,
    x_minus1_initial: Option<f64>,
    rows: Vec<DiagnosticsRow>,
}

impl SeriesRecorder {
    pub fn new(mu: f64) -> Self {
        SeriesRecorder {
            mu,
            x_minus1_initial: None,
            rows: Vec::new(),
        }
    }

    /// Continues an earlier series, e.g. after restarting from a checkpoint.
    pub fn resume(mu: f64, rows: Vec<DiagnosticsRow>) -> Result<Self> {
        if rows.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(invalid("series", "sample times must increase"));
        }
        Ok(SeriesRecorder {
            mu,
            x_minus1_initial: rows.first().map(|r| r.x_minus1),
            rows,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn x_minus1_initial(&self) -> Option<f64> {
        self.x_minus1_initial
    }

    pub fn rows(&self) -> &[DiagnosticsRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&DiagnosticsRow> {
        self.rows.last()
    }

    pub fn into_rows(self) -> Vec<DiagnosticsRow> {
        self.rows
    }

    /// Samples `state` and appends the row. A state at the same step as the
    /// last row is not recorded twice.
    pub fn record(&mut self, state: &SolverState) -> Result<DiagnosticsRow> {
        if let Some(last) = self.rows.last() {
            if last.step == state.step_count() {
                return Ok(*last);
            }
            if !(state.time() > last.t) {
                return Err(invalid("series", "sample times must increase"));
            }
        }
        let s = snapshot(state)?;
        let x_init = *self.x_minus1_initial.get_or_insert(s.x_minus1);
        let (int_x1, int_grad, int_omega) = match self.rows.last() {
            None => (0.0, 0.0, 0.0),
            Some(p) => {
                let h = 0.5 * (s.t - p.t);
                (
                    p.int_x1 + h * (p.x1 + s.x1),
                    p.int_grad_linf + h * (p.grad_linf + s.grad_linf),
                    p.int_omega_x0 + h * (p.omega_x0 + s.omega_x0),
                )
            }
        };
        let row = DiagnosticsRow {
            t: s.t,
            step: s.step,
            x_minus1: s.x_minus1,
            x0: s.x0,
            x1: s.x1,
            int_x1,
            theorem_lhs: s.x_minus1 + (self.mu - x_init) * int_x1,
            grad_linf: s.grad_linf,
            int_grad_linf: int_grad,
            omega_x0: s.omega_x0,
            int_omega_x0: int_omega,
            h1: s.h[0],
            h2: s.h[1],
            h3: s.h[2],
            energy_l2: s.energy,
            div_residual: s.div_residual,
            dtv_x_minus1: s.dtv_x_minus1,
            nonlinear_max: s.nonlinear_max,
        };
        self.rows.push(row);
        Ok(row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::shear_flow;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn shear_row_values() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let v = shear_flow(1, 0, 0.5, &g).unwrap();
        let s = SolverState::new(v, 1.0).unwrap();
        let mut rec = SeriesRecorder::new(1.0);
        let r = rec.record(&s).unwrap();
        assert!((r.x_minus1 - 0.5).abs() < 1e-15);
        assert!((r.x1 - 0.5).abs() < 1e-15);
        assert!((r.omega_x0 - 0.5).abs() < 1e-15);
        assert!((r.grad_linf - 0.5).abs() < 1e-12);
        // pure dissipation: |dv/dt| = mu |k|^2 |v|
        assert!((r.dtv_x_minus1 - 0.5).abs() < 1e-14);
        assert!(r.nonlinear_max < 1e-14);
        assert!((r.energy_l2 - 0.0625).abs() < 1e-15);
        assert_eq!(r.int_x1, 0.0);
        assert_eq!(r.theorem_lhs, r.x_minus1);
        // same step is not duplicated
        rec.record(&s).unwrap();
        assert_eq!(rec.rows().len(), 1);
    }
}
