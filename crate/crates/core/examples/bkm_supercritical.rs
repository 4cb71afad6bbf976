//! Data above the viscosity threshold: the vorticity integral still controls
//! the X^-1 and X^0 growth, and the splitting constants follow from it.

use std::f64::consts::PI;

use critical_ns::diagnostics::{bkm_constants, bkm_monitor, Tolerances};
use critical_ns::dynamics::{simulate, StepperConfig};
use critical_ns::initial_data::random_divfree;
use critical_ns::spectral::make_grid;

fn main() -> critical_ns::Result<()> {
    let mu = 1.0;
    let grid = make_grid(16, 2.0 * PI)?;
    let v0 = random_divfree(7, -2.0, 5, 2.0 * mu, &grid)?;
    let run = simulate(&v0, mu, 1.0, &StepperConfig::fixed(0.01), 1)?;
    if let Some((t, step)) = run.breakdown {
        println!("breakdown at t = {t} (step {step})");
        return Ok(());
    }
    let tol = Tolerances::default().with_dt(run.dt);
    let m = bkm_monitor(&run.series, &tol)?;
    println!("bkm bounds hold = {} (worst margin {:.3e})", m.holds, m.worst_margin);
    let c = bkm_constants(1.0, &run.series, mu, run.series[0].x0, &grid, 200_000, 1)?;
    println!(
        "W = {:.4}, eps = {:.3e}, M = {}, verified = {} ({} samples, {} band)",
        c.w,
        c.eps_s,
        c.m_s,
        c.verified,
        c.samples,
        if c.within_band { "inside" } else { "beyond" }
    );
    Ok(())
}
