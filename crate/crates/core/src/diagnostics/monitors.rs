use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::series::DiagnosticsRow;
use crate::dynamics::SolverState;
use crate::error::{invalid, Error, Result};
use crate::norms::x_norm;

/// Slack model shared by the monitors.
///
/// Differential checks allow `tol_dyn = c1 ds^2 + c2 dt^4` with `ds` the
/// local sampling interval and `dt` the integrator step; Gronwall-type
/// bounds are relaxed by the factor `1 + rel_gronwall`, monotonicity by
/// `1 + rel_monotone`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel_gronwall: f64,
    pub rel_monotone: f64,
    pub c1: f64,
    pub c2: f64,
    pub dt: f64,
    pub energy_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel_gronwall: 0.05,
            rel_monotone: 0.01,
            c1: 1.0,
            c2: 1.0,
            dt: 0.0,
            energy_cap: 10.0,
        }
    }
}

impl Tolerances {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn tol_dyn(&self, ds: f64) -> f64 {
        self.c1 * ds * ds + self.c2 * self.dt.powi(4)
    }
}

/// Result of one monitor. `worst_margin` is the smallest slack
/// `bound - observed` with the tolerance already folded into the bound, so
/// `holds` is exactly `worst_margin >= 0` for an applicable monitor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorVerdict {
    pub name: String,
    pub holds: bool,
    pub applicable: bool,
    pub worst_margin: f64,
    pub worst_t: f64,
    pub tolerances: Tolerances,
    pub details: BTreeMap<String, f64>,
}

/// Running minimum of margins over samples.
struct Worst {
    margin: f64,
    t: f64,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            t: 0.0,
        }
    }

    fn see(&mut self, margin: f64, t: f64) {
        // NaN never compares smaller, so treat it as a failure explicitly
        if margin < self.margin || margin.is_nan() && !self.margin.is_nan() {
            self.margin = margin;
            self.t = t;
        }
    }

    fn finish(self, name: &str, tolerances: Tolerances, details: BTreeMap<String, f64>) -> MonitorVerdict {
        let margin = if self.margin == f64::INFINITY { 0.0 } else { self.margin };
        MonitorVerdict {
            name: name.to_string(),
            holds: margin >= 0.0,
            applicable: true,
            worst_margin: margin,
            worst_t: self.t,
            tolerances,
            details,
        }
    }
}

fn not_applicable(name: &str, tolerances: Tolerances, reason_key: &str, value: f64) -> MonitorVerdict {
    let mut details = BTreeMap::new();
    details.insert(reason_key.to_string(), value);
    MonitorVerdict {
        name: name.to_string(),
        holds: false,
        applicable: false,
        worst_margin: 0.0,
        worst_t: 0.0,
        tolerances,
        details,
    }
}

fn monitor_err(monitor: &'static str, reason: impl Into<String>) -> Error {
    Error::Monitor {
        monitor,
        reason: reason.into(),
    }
}

/// `(a/b + b/a)/2 - 1`, the slack in `1 <= (a/b + b/a)/2`.
pub fn young_split_check(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(invalid("a, b", format!("need positive finite inputs, got ({a}, {b})")));
    }
    // (a - b)^2 / (2ab) avoids the cancellation of the textbook form
    Ok((a - b) * (a - b) / (2.0 * a * b))
}

/// Three-point derivative at the middle of possibly uneven samples.
fn centered_derivative(t: [f64; 3], x: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    (h1 * h1 * x[2] - h2 * h2 * x[0] + (h2 * h2 - h1 * h1) * x[1]) / (h1 * h2 * (h1 + h2))
}

/// `d/dt X^{-1} + mu X^1 <= X^{-1} X^1 + tol_dyn` at interior samples.
pub fn dissipation_residual(series: &[DiagnosticsRow], mu: f64, tol: &Tolerances) -> Result<MonitorVerdict> {
    if series.len() < 3 {
        return Err(monitor_err("dissipation", format!("need >= 3 samples, got {}", series.len())));
    }
    let mut worst = Worst::new();
    let mut max_lhs: f64 = f64::NEG_INFINITY;
    for w in series.windows(3) {
        let t = [w[0].t, w[1].t, w[2].t];
        let d = centered_derivative(t, [w[0].x_minus1, w[1].x_minus1, w[2].x_minus1]);
        let ds = (t[1] - t[0]).max(t[2] - t[1]);
        let lhs = d + mu * w[1].x1;
        max_lhs = max_lhs.max(lhs);
        worst.see(w[1].x_minus1 * w[1].x1 + tol.tol_dyn(ds) - lhs, w[1].t);
    }
    let mut details = BTreeMap::new();
    details.insert("max_lhs".into(), max_lhs);
    details.insert("interior_samples".into(), (series.len() - 2) as f64);
    Ok(worst.finish("dissipation", *tol, details))
}

/// The uniform functional bound, monotone decay of `X^{-1}` and the
/// gradient budget `int |grad v|_inf <= X0 / (mu - X0)` for `X0 < mu`.
pub fn theorem_monitor(
    series: &[DiagnosticsRow],
    mu: f64,
    x_minus1_initial: f64,
    tol: &Tolerances,
) -> Result<MonitorVerdict> {
    if series.is_empty() {
        return Err(monitor_err("theorem", "empty series"));
    }
    if !(x_minus1_initial < mu) {
        return Ok(not_applicable("theorem", *tol, "supercritical_ratio", x_minus1_initial / mu));
    }
    let budget = x_minus1_initial / (mu - x_minus1_initial);
    let mut worst = Worst::new();
    let mut sub = [f64::INFINITY; 3];
    let mut sup_lhs: f64 = f64::NEG_INFINITY;
    for (i, r) in series.iter().enumerate() {
        let lhs = r.x_minus1 + (mu - x_minus1_initial) * r.int_x1;
        sup_lhs = sup_lhs.max(lhs);
        let m_functional = x_minus1_initial * (1.0 + tol.rel_gronwall) - lhs;
        let m_grad = budget * (1.0 + tol.rel_gronwall) - r.int_grad_linf;
        let m_mono = if i == 0 {
            f64::INFINITY
        } else {
            series[i - 1].x_minus1 * (1.0 + tol.rel_monotone) - r.x_minus1
        };
        for (s, m) in sub.iter_mut().zip([m_functional, m_mono, m_grad]) {
            *s = s.min(m);
            worst.see(m, r.t);
        }
    }
    let last = series.last().expect("nonempty");
    let mut details = BTreeMap::new();
    details.insert("sup_functional".into(), sup_lhs);
    details.insert("functional_margin".into(), sub[0]);
    details.insert("monotone_margin".into(), if sub[1].is_finite() { sub[1] } else { 0.0 });
    details.insert("gradient_margin".into(), sub[2]);
    details.insert("int_grad_linf".into(), last.int_grad_linf);
    details.insert("gradient_budget".into(), budget);
    details.insert("int_x1".into(), last.int_x1);
    Ok(worst.finish("theorem", *tol, details))
}

/// Difference norms of two states sampled at the same time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDiffRow {
    pub t: f64,
    pub diff_x_minus1: f64,
    pub diff_x1: f64,
    /// Trapezoid accumulation of `diff_x1`.
    pub int_diff_x1: f64,
}

/// Appends the difference row of `a` and `b` to `rows`.
pub fn push_pair_diff(rows: &mut Vec<PairDiffRow>, a: &SolverState, b: &SolverState) -> Result<PairDiffRow> {
    if a.time() != b.time() {
        return Err(monitor_err("cauchy_pair", "states sampled at different times"));
    }
    let d = a.velocity().difference(b.velocity())?;
    let diff_x_minus1 = x_norm(&d, -1.0)?;
    let diff_x1 = x_norm(&d, 1.0)?;
    let int_diff_x1 = match rows.last() {
        None => 0.0,
        Some(p) => p.int_diff_x1 + 0.5 * (a.time() - p.t) * (p.diff_x1 + diff_x1),
    };
    let row = PairDiffRow {
        t: a.time(),
        diff_x_minus1,
        diff_x1,
        int_diff_x1,
    };
    rows.push(row);
    Ok(row)
}

/// Stability of two subcritical solutions:
/// `|v_a - v_b|_{X^{-1}}(t)` and `(mu - X0) int |v_a - v_b|_{X^1}` both at
/// most `gap exp(X0 / (mu - X0))`, where `X0` bounds both initial norms.
#[allow(clippy::too_many_arguments)]
pub fn cauchy_pair_monitor(
    series_a: &[DiagnosticsRow],
    series_b: &[DiagnosticsRow],
    diffs: &[PairDiffRow],
    mu: f64,
    x_minus1_initial: f64,
    data_gap: f64,
    tol: &Tolerances,
) -> Result<MonitorVerdict> {
    if series_a.len() != series_b.len() || series_a.len() != diffs.len() || diffs.is_empty() {
        return Err(monitor_err(
            "cauchy_pair",
            format!(
                "mismatched sampling: {} / {} / {} rows",
                series_a.len(),
                series_b.len(),
                diffs.len()
            ),
        ));
    }
    for ((a, b), d) in series_a.iter().zip(series_b).zip(diffs) {
        if a.t != b.t || a.t != d.t {
            return Err(monitor_err("cauchy_pair", format!("sample times differ near t = {}", a.t)));
        }
    }
    if !(x_minus1_initial < mu) {
        return Ok(not_applicable("cauchy_pair", *tol, "supercritical_ratio", x_minus1_initial / mu));
    }
    // prerequisite: both runs obey the uniform bound with the common X0
    let prereq = series_a.iter().chain(series_b).all(|r| {
        r.x_minus1 + (mu - x_minus1_initial) * r.int_x1 <= x_minus1_initial * (1.0 + tol.rel_gronwall)
    });
    if !prereq {
        return Ok(not_applicable("cauchy_pair", *tol, "prerequisite_failed", 1.0));
    }
    let factor = (x_minus1_initial / (mu - x_minus1_initial)).exp();
    let bound = data_gap * factor * (1.0 + tol.rel_gronwall);
    let mut worst = Worst::new();
    let mut sup_diff: f64 = 0.0;
    for d in diffs {
        sup_diff = sup_diff.max(d.diff_x_minus1);
        worst.see(bound - d.diff_x_minus1, d.t);
        worst.see(bound - (mu - x_minus1_initial) * d.int_diff_x1, d.t);
    }
    let last = diffs.last().expect("nonempty");
    let mut details = BTreeMap::new();
    details.insert("data_gap".into(), data_gap);
    details.insert("bound_factor".into(), factor);
    details.insert("sup_diff_x_minus1".into(), sup_diff);
    details.insert("int_diff_x1".into(), last.int_diff_x1);
    if data_gap > 0.0 {
        details.insert("observed_factor".into(), sup_diff / data_gap);
    }
    Ok(worst.finish("cauchy_pair", *tol, details))
}

/// `int |d_t v|_{X^{-1}} <= mu int X^1 + sup X^{-1} int X^1 + (pressure share)`
/// at every sample, the pressure share budgeted like the convective term.
pub fn time_derivative_budget(series: &[DiagnosticsRow], mu: f64, tol: &Tolerances) -> Result<MonitorVerdict> {
    if series.is_empty() {
        return Err(monitor_err("time_derivative", "empty series"));
    }
    if series.iter().any(|r| !r.dtv_x_minus1.is_finite()) {
        return Err(monitor_err("time_derivative", "missing right-hand-side records"));
    }
    let mut worst = Worst::new();
    let mut int_dtv = 0.0;
    let mut sup_x = series[0].x_minus1;
    for (i, r) in series.iter().enumerate() {
        if i > 0 {
            let p = &series[i - 1];
            int_dtv += 0.5 * (r.t - p.t) * (p.dtv_x_minus1 + r.dtv_x_minus1);
        }
        sup_x = sup_x.max(r.x_minus1);
        let budget = mu * r.int_x1 + 2.0 * sup_x * r.int_x1;
        worst.see(budget * (1.0 + tol.rel_gronwall) - int_dtv, r.t);
    }
    let last = series.last().expect("nonempty");
    let mut details = BTreeMap::new();
    details.insert("int_dtv_x_minus1".into(), int_dtv);
    details.insert("dissipative_budget".into(), mu * last.int_x1);
    details.insert("convective_budget".into(), sup_x * last.int_x1);
    details.insert("pressure_budget".into(), sup_x * last.int_x1);
    Ok(worst.finish("time_derivative", *tol, details))
}

/// Vorticity-controlled growth bounds, valid for any data:
/// `X^{-1}(t) <= X^{-1}(0) e^{W(t)}` and `X^0(t) <= X^0(0) e^{2 W(t)}`
/// with `W(t) = int |omega|_{X^0}`.
pub fn bkm_monitor(series: &[DiagnosticsRow], tol: &Tolerances) -> Result<MonitorVerdict> {
    let first = series.first().ok_or_else(|| monitor_err("bkm", "empty series"))?;
    let mut worst = Worst::new();
    let mut ratio = [0.0f64; 2];
    for r in series {
        let e = r.int_omega_x0.exp();
        let b1 = first.x_minus1 * e;
        let b2 = first.x0 * e * e;
        worst.see(b1 * (1.0 + tol.rel_gronwall) - r.x_minus1, r.t);
        worst.see(b2 * (1.0 + tol.rel_gronwall) - r.x0, r.t);
        if b1 > 0.0 {
            ratio[0] = ratio[0].max(r.x_minus1 / b1);
        }
        if b2 > 0.0 {
            ratio[1] = ratio[1].max(r.x0 / b2);
        }
    }
    let mut details = BTreeMap::new();
    details.insert("max_ratio_x_minus1".into(), ratio[0]);
    details.insert("max_ratio_x0".into(), ratio[1]);
    details.insert("int_omega_x0".into(), series.last().expect("nonempty").int_omega_x0);
    Ok(worst.finish("bkm", *tol, details))
}

/// Empirical constant in `|v(t)|_{H^k} <= |v_0|_{H^k} exp(c int |grad v|_inf)`:
/// the supremum of `log(hk(t)/hk(0)) / int |grad v|_inf`, required to stay
/// below `energy_cap`.
pub fn energy_growth_monitor(series: &[DiagnosticsRow], k: u32, tol: &Tolerances) -> Result<MonitorVerdict> {
    let first = series.first().ok_or_else(|| monitor_err("energy_growth", "empty series"))?;
    let h0 = first
        .hk(k)
        .ok_or_else(|| monitor_err("energy_growth", format!("H^{k} is not recorded (k in 1..=3)")))?;
    let name = format!("energy_growth_h{k}");
    let mut details = BTreeMap::new();
    if h0 == 0.0 {
        details.insert("vacuous".into(), 1.0);
        return Ok(Worst::new().finish(&name, *tol, details));
    }
    let mut worst = Worst::new();
    let mut sup_r = f64::NEG_INFINITY;
    for r in series {
        if r.int_grad_linf <= 1e-8 {
            continue;
        }
        let hk = r.hk(k).expect("k checked");
        let ratio = (hk / h0).ln() / r.int_grad_linf;
        sup_r = sup_r.max(ratio);
        worst.see(tol.energy_cap - ratio, r.t);
    }
    if sup_r.is_finite() {
        details.insert("sup_ratio".into(), sup_r);
    }
    Ok(worst.finish(&name, *tol, details))
}
