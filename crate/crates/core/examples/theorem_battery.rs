//! Subcritical random data: the uniform bound, the dissipation inequality,
//! the time-derivative budget and the energy growth bound.
//!
//! `cargo run --release --example theorem_battery -- [n] [horizon] [seed]`

use std::f64::consts::PI;

use critical_ns::diagnostics::{
    dissipation_residual, energy_growth_monitor, theorem_monitor, time_derivative_budget, Tolerances,
};
use critical_ns::dynamics::{simulate, StepperConfig};
use critical_ns::initial_data::random_divfree;
use critical_ns::spectral::make_grid;

fn main() -> critical_ns::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(16);
    let horizon: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let mu = 1.0;
    let grid = make_grid(n, 2.0 * PI)?;
    let k_max = (grid.retained_max() as u32).min(8);
    let v0 = random_divfree(seed, -2.0, k_max, 0.8 * mu, &grid)?;
    let run = simulate(&v0, mu, horizon, &StepperConfig::fixed(0.01), 1)?;
    let tol = Tolerances::default().with_dt(run.dt);
    let x0 = run.series[0].x_minus1;

    let last = run.series.last().expect("nonempty");
    println!("n = {n}, seed = {seed}, steps = {}", last.step);
    println!("X^-1: {:.6} -> {:.6}", x0, last.x_minus1);
    println!(
        "int |grad v|_inf = {:.4}, budget X0/(mu - X0) = {:.4}",
        last.int_grad_linf,
        x0 / (mu - x0)
    );
    for v in [
        theorem_monitor(&run.series, mu, x0, &tol)?,
        dissipation_residual(&run.series, mu, &tol)?,
        time_derivative_budget(&run.series, mu, &tol)?,
        energy_growth_monitor(&run.series, 2, &tol)?,
    ] {
        println!("{:<18} holds = {:<5} worst margin {:.3e} at t = {:.2}", v.name, v.holds, v.worst_margin, v.worst_t);
    }
    Ok(())
}
