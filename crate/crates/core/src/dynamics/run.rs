use super::stepper::{resolve_dt, Stepper, StepperConfig};
use super::SolverState;
use crate::diagnostics::{DiagnosticsRow, SeriesRecorder};
use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralField;

/// Relative slack under which a final partial step is treated as a full one.
const STEP_SLACK: f64 = 1e-9;

/// Outcome of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub series: Vec<DiagnosticsRow>,
    /// Last valid state (the breakdown point when `breakdown` is set).
    pub final_state: SolverState,
    pub dt: f64,
    /// Time and step at which non-finite coefficients appeared.
    pub breakdown: Option<(f64, u64)>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.breakdown.is_none()
    }
}

fn check_run(horizon: f64, sample_every: u64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", format!("must be positive, got {horizon}")));
    }
    if sample_every == 0 {
        return Err(invalid("sample_every", "must be at least 1"));
    }
    Ok(())
}

/// Runs from `v0` at `t = 0` to `horizon`, recording a row every
/// `sample_every` steps and at the final time.
pub fn simulate(
    v0: &SpectralField,
    mu: f64,
    horizon: f64,
    cfg: &StepperConfig,
    sample_every: u64,
) -> Result<Trajectory> {
    let state = SolverState::new(v0.clone(), mu)?;
    simulate_from(state, horizon, cfg, sample_every, SeriesRecorder::new(mu))
}

/// Continues `state` to `horizon`, appending to `recorder`.
pub fn simulate_from(
    state: SolverState,
    horizon: f64,
    cfg: &StepperConfig,
    sample_every: u64,
    recorder: SeriesRecorder,
) -> Result<Trajectory> {
    simulate_with(state, horizon, cfg, sample_every, recorder, |_, _| Ok(()))
}

/// [`simulate_from`] with a callback after every completed step.
pub fn simulate_with<F>(
    state: SolverState,
    horizon: f64,
    cfg: &StepperConfig,
    sample_every: u64,
    mut recorder: SeriesRecorder,
    mut on_step: F,
) -> Result<Trajectory>
where
    F: FnMut(&SolverState, &SeriesRecorder) -> Result<()>,
{
    check_run(horizon, sample_every)?;
    if state.t > horizon {
        return Err(invalid("horizon", format!("state time {} is past the horizon", state.t)));
    }
    let dt = resolve_dt(&state.v, cfg, horizon - state.t)?;
    let stepper = Stepper::new(state.v.grid(), state.mu, dt)?;
    let mut state = state;
    if state.step_count.is_multiple_of(sample_every) || recorder.rows().is_empty() {
        recorder.record(&state)?;
    }
    let mut breakdown = None;
    while state.t < horizon {
        let remaining = horizon - state.t;
        let last = remaining <= dt * (1.0 + STEP_SLACK);
        let result = if last && (remaining - dt).abs() > STEP_SLACK * dt {
            Stepper::new(state.v.grid(), state.mu, remaining)?.step(&state)
        } else {
            stepper.step(&state)
        };
        match result {
            Ok(mut next) => {
                if last {
                    next.t = horizon;
                }
                state = next;
            }
            Err(Error::Breakdown { t, step }) => {
                breakdown = Some((t, step));
                break;
            }
            Err(e) => return Err(e),
        }
        if last || state.step_count.is_multiple_of(sample_every) {
            recorder.record(&state)?;
        }
        on_step(&state, &recorder)?;
    }
    Ok(Trajectory {
        series: recorder.into_rows(),
        final_state: state,
        dt,
        breakdown,
    })
}

/// Several runs advanced in lockstep with one common step size.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub members: Vec<Trajectory>,
    pub dt: f64,
}

/// Runs every datum with the same step (the smallest automatic step among
/// them when `cfg` is automatic), calling `on_sample` with all member states
/// at every common sample time.
pub fn ensemble<F>(
    data: &[SpectralField],
    mu: f64,
    horizon: f64,
    cfg: &StepperConfig,
    sample_every: u64,
    mut on_sample: F,
) -> Result<Ensemble>
where
    F: FnMut(&[SolverState]) -> Result<()>,
{
    check_run(horizon, sample_every)?;
    if data.is_empty() {
        return Err(invalid("data", "ensemble needs at least one member"));
    }
    for d in &data[1..] {
        data[0].check_same_grid(d)?;
    }
    let mut states = data
        .iter()
        .map(|v| SolverState::new(v.clone(), mu))
        .collect::<Result<Vec<_>>>()?;
    let mut dt = f64::INFINITY;
    for s in &states {
        dt = dt.min(resolve_dt(&s.v, cfg, horizon)?);
    }
    let steps = ((horizon / dt) - STEP_SLACK).ceil().max(1.0) as u64;
    let dt = horizon / steps as f64;
    let stepper = Stepper::new(data[0].grid(), mu, dt)?;
    let mut recorders: Vec<SeriesRecorder> = states.iter().map(|_| SeriesRecorder::new(mu)).collect();
    for (r, s) in recorders.iter_mut().zip(&states) {
        r.record(s)?;
    }
    on_sample(&states)?;
    let mut breakdown = None;
    for k in 1..=steps {
        let mut next = Vec::with_capacity(states.len());
        for s in &states {
            match stepper.step(s) {
                Ok(n) => next.push(n),
                Err(Error::Breakdown { t, step }) => {
                    breakdown = Some((t, step));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if breakdown.is_some() {
            break;
        }
        if k == steps {
            for s in &mut next {
                s.t = horizon;
            }
        }
        states = next;
        if k == steps || k % sample_every == 0 {
            for (r, s) in recorders.iter_mut().zip(&states) {
                r.record(s)?;
            }
            on_sample(&states)?;
        }
    }
    let members = recorders
        .into_iter()
        .zip(states)
        .map(|(r, s)| Trajectory {
            series: r.into_rows(),
            final_state: s,
            dt,
            breakdown,
        })
        .collect();
    Ok(Ensemble { members, dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{random_divfree, shear_flow};
    use crate::norms::x_norm;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn shear_run_follows_heat_decay() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let v = shear_flow(1, 0, 0.5, &g).unwrap();
        let tr = simulate(&v, 1.0, 1.0, &StepperConfig::default(), 4).unwrap();
        assert!(tr.completed());
        let last = tr.series.last().unwrap();
        assert_eq!(last.t, 1.0);
        assert_eq!(tr.final_state.time(), 1.0);
        let got = x_norm(tr.final_state.velocity(), -1.0).unwrap();
        assert!((got - 0.5 * (-1.0f64).exp()).abs() < 1e-6);
        assert!(tr.series.iter().all(|r| r.nonlinear_max < 1e-14));
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let tr = simulate(&SpectralField::zeros(&g), 1.0, 0.5, &StepperConfig::fixed(0.1), 1).unwrap();
        assert_eq!(tr.series.len(), 6);
        for r in &tr.series {
            assert_eq!(r.x_minus1, 0.0);
            assert_eq!(r.energy_l2, 0.0);
            assert_eq!(r.theorem_lhs, 0.0);
        }
    }

    #[test]
    fn fixed_step_with_remainder_lands_on_horizon() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let v = shear_flow(0, 2, 0.3, &g).unwrap();
        let tr = simulate(&v, 1.0, 0.25, &StepperConfig::fixed(0.1), 1).unwrap();
        let ts: Vec<f64> = tr.series.iter().map(|r| r.t).collect();
        assert_eq!(ts.len(), 4);
        assert_eq!(*ts.last().unwrap(), 0.25);
        let got = x_norm(tr.final_state.velocity(), -1.0).unwrap();
        assert!((got - 0.3 * (-0.25f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn subcritical_x_minus1_nonincreasing_and_energy_law() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let v = random_divfree(21, -1.0, 5, 0.8, &g).unwrap();
        let tr = simulate(&v, 1.0, 0.1, &StepperConfig::fixed(0.002), 1).unwrap();
        for w in tr.series.windows(2) {
            assert!(w[1].x_minus1 <= w[0].x_minus1 * (1.0 + 1e-12));
        }
        // E(t2) - E(t0) = -mu int |grad v|^2, integrated by Simpson over sample pairs
        for w in tr.series.windows(3).step_by(2) {
            let de = w[2].energy_l2 - w[0].energy_l2;
            let h = w[2].t - w[0].t;
            let want = -h / 6.0 * (w[0].h1.powi(2) + 4.0 * w[1].h1.powi(2) + w[2].h1.powi(2));
            assert!((de - want).abs() <= 1e-4 * want.abs(), "{de} vs {want}");
        }
        for r in &tr.series {
            assert!(r.div_residual < 1e-11);
        }
    }

    #[test]
    fn ensemble_matches_separate_runs() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let a = random_divfree(1, -1.0, 2, 0.5, &g).unwrap();
        let b = random_divfree(2, -1.0, 2, 0.5, &g).unwrap();
        let cfg = StepperConfig::fixed(0.05);
        let mut calls = 0;
        let ens = ensemble(&[a.clone(), b], 1.0, 0.2, &cfg, 2, |s| {
            assert_eq!(s.len(), 2);
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(calls, 3);
        let solo = simulate(&a, 1.0, 0.2, &cfg, 2).unwrap();
        assert_eq!(ens.members[0].series, solo.series);
    }

    #[test]
    fn rejects_bad_run_parameters() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let v = SpectralField::zeros(&g);
        assert!(simulate(&v, 1.0, 0.0, &StepperConfig::default(), 1).is_err());
        assert!(simulate(&v, 1.0, 1.0, &StepperConfig::default(), 0).is_err());
        assert!(simulate(&v, -1.0, 1.0, &StepperConfig::default(), 1).is_err());
    }
}
