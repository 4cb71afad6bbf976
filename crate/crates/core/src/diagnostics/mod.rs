//! Runtime monitors for the a priori estimates of the truncated system.
//! Every monitor is a pure function of recorded series.

mod bilinear;
mod bkm;
mod monitors;
mod series;

pub use bilinear::{bilinear_chain, BilinearChain};
pub use bkm::{bkm_constants, BkmConstants};
pub use monitors::{
    bkm_monitor, cauchy_pair_monitor, dissipation_residual, energy_growth_monitor, push_pair_diff,
    theorem_monitor, time_derivative_budget, young_split_check, MonitorVerdict, PairDiffRow, Tolerances,
};
pub use series::{DiagnosticsRow, SeriesRecorder};
