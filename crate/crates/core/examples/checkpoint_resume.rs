//! Save a checkpoint partway through a run, resume from it, and compare with
//! the run that never stopped.

use std::f64::consts::PI;

use critical_ns::diagnostics::SeriesRecorder;
use critical_ns::dynamics::{simulate_from, simulate_with, SolverState, StepperConfig};
use critical_ns::experiment::{checkpoint_load, checkpoint_save};
use critical_ns::initial_data::random_divfree;
use critical_ns::spectral::make_grid;

fn main() -> critical_ns::Result<()> {
    let grid = make_grid(16, 2.0 * PI)?;
    let v0 = random_divfree(11, -1.0, 5, 0.6, &grid)?;
    let cfg = StepperConfig::fixed(0.01);
    let path = std::env::temp_dir().join("critical_ns_example.bin");

    let mut saved_rows = Vec::new();
    let state = SolverState::new(v0, 1.0)?;
    let full = simulate_with(state, 0.4, &cfg, 1, SeriesRecorder::new(1.0), |s, rec| {
        if s.step_count() == 20 {
            checkpoint_save(s, &path)?;
            saved_rows = rec.rows().to_vec();
        }
        Ok(())
    })?;

    let state = checkpoint_load(&path)?;
    println!("resuming at t = {} (step {})", state.time(), state.step_count());
    let resumed = simulate_from(state, 0.4, &cfg, 1, SeriesRecorder::resume(1.0, saved_rows)?)?;
    std::fs::remove_file(&path)?;

    println!("{} rows, identical after resume: {}", full.series.len(), full.series == resumed.series);
    Ok(())
}
