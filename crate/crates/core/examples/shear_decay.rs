//! A shear layer is an exact solution: the nonlinear term vanishes and every
//! mode decays like the heat equation.

use std::f64::consts::PI;

use critical_ns::dynamics::{simulate, StepperConfig};
use critical_ns::initial_data::shear_flow;
use critical_ns::spectral::make_grid;

fn main() -> critical_ns::Result<()> {
    let grid = make_grid(16, 2.0 * PI)?;
    let mu = 1.0;
    let v0 = shear_flow(1, 0, 0.5, &grid)?;
    let run = simulate(&v0, mu, 1.0, &StepperConfig::fixed(0.01), 10)?;
    println!("{:>6} {:>14} {:>14} {:>10}", "t", "X^-1", "exact", "|N|max");
    for r in &run.series {
        let exact = 0.5 * (-mu * r.t).exp();
        println!("{:6.2} {:14.10} {:14.10} {:10.2e}", r.t, r.x_minus1, exact, r.nonlinear_max);
    }
    Ok(())
}
