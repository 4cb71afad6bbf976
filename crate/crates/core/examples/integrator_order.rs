//! Fourth-order convergence of the integrating-factor Runge-Kutta step.

use std::f64::consts::PI;

use critical_ns::dynamics::{simulate, StepperConfig};
use critical_ns::initial_data::random_divfree;
use critical_ns::norms::x_norm;
use critical_ns::spectral::{make_grid, SpectralField};

fn main() -> critical_ns::Result<()> {
    let grid = make_grid(16, 2.0 * PI)?;
    let v0 = random_divfree(3, -2.0, 4, 0.8, &grid)?;
    let run = |dt: f64| -> critical_ns::Result<SpectralField> {
        Ok(simulate(&v0, 1.0, 0.1, &StepperConfig::fixed(dt), 1000)?.final_state.into_velocity())
    };
    let dt = 0.02;
    let reference = run(dt / 8.0)?;
    let e1 = x_norm(&run(dt)?.difference(&reference)?, -1.0)?;
    let e2 = x_norm(&run(dt / 2.0)?.difference(&reference)?, -1.0)?;
    println!("error at dt   {e1:.3e}");
    println!("error at dt/2 {e2:.3e}");
    println!("ratio {:.3} (4th order: 16)", e1 / e2);
    Ok(())
}
