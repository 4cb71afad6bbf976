//! The subcommands behind the `critical-ns` binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use super::artifacts::{
    pair_csv, parse_series_csv, series_csv, summarize, table_csv, verdicts_json, ArtifactWriter, RunManifest,
};
use super::checkpoint::{checkpoint_load, encode};
use super::config::{ExperimentConfig, Generator};
use crate::diagnostics::{
    bkm_constants, bkm_monitor, cauchy_pair_monitor, dissipation_residual, energy_growth_monitor, push_pair_diff,
    theorem_monitor, time_derivative_budget, DiagnosticsRow, MonitorVerdict, PairDiffRow, SeriesRecorder, Tolerances,
};
use crate::dynamics::{ensemble, simulate_with, SolverState, Trajectory};
use crate::error::{Error, Result};
use crate::initial_data::{
    chemin_gallagher, counterexample_table, mollify, random_divfree, shear_flow, MollifierSpec, ProfileShape,
    RadialProfile,
};
use crate::norms::x_norm;
use crate::spectral::{make_grid, SpectralField};

/// Monitors run by `verify-theorem`.
pub const THEOREM_BATTERY: &[&str] = &["theorem", "dissipation", "time_derivative", "energy_growth"];
/// Monitors run by `bkm`.
pub const BKM_BATTERY: &[&str] = &["bkm", "bkm_constants"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    MonitorFailure = 1,
    ConfigError = 2,
    Breakdown = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Breakdown { .. } => ExitStatus::Breakdown,
            Error::Monitor { .. } => ExitStatus::MonitorFailure,
            _ => ExitStatus::ConfigError,
        }
    }

    fn of_verdicts(verdicts: &[MonitorVerdict]) -> Self {
        if verdicts.iter().all(|v| v.holds || !v.applicable) {
            ExitStatus::Success
        } else {
            ExitStatus::MonitorFailure
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: ExitStatus,
    pub message: String,
    pub verdicts: Vec<MonitorVerdict>,
    pub manifest: RunManifest,
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// The configured datum before any mollification.
pub fn base_datum(cfg: &ExperimentConfig) -> Result<SpectralField> {
    let grid = make_grid(cfg.n, cfg.box_size)?;
    match cfg.generator {
        Generator::RandomDivfree {
            target_x_minus1,
            spectrum_slope,
            k_max,
        } => random_divfree(cfg.seed, spectrum_slope, k_max, target_x_minus1, &grid),
        Generator::ShearFlow { axis, vary, amplitude } => shear_flow(axis, vary, amplitude, &grid),
        Generator::CheminGallagher { m, amplitude } => chemin_gallagher(m, amplitude, &grid),
        Generator::Zero => Ok(SpectralField::zeros(&grid)),
    }
}

/// The configured datum, mollified when `data.lambda` is set.
pub fn initial_datum(cfg: &ExperimentConfig) -> Result<SpectralField> {
    let v = base_datum(cfg)?;
    match cfg.lambda {
        Some(l) => mollify(&v, &MollifierSpec::new(cfg.mollifier, l)?),
        None => Ok(v),
    }
}

fn bkm_verdict(cfg: &ExperimentConfig, series: &[DiagnosticsRow], tol: &Tolerances) -> Result<MonitorVerdict> {
    let grid = make_grid(cfg.n, cfg.box_size)?;
    let x0 = series.first().map_or(0.0, |r| r.x0);
    let c = bkm_constants(cfg.bkm_s, series, cfg.mu, x0, &grid, cfg.bkm_samples, cfg.seed)?;
    let mut details = BTreeMap::new();
    details.insert("s".into(), c.s);
    details.insert("w".into(), c.w);
    details.insert("eps_s".into(), c.eps_s);
    details.insert("m_s".into(), c.m_s);
    details.insert("samples".into(), c.samples as f64);
    details.insert("violations".into(), c.violations as f64);
    details.insert("within_band".into(), f64::from(u8::from(c.within_band)));
    details.insert("degenerate".into(), f64::from(u8::from(c.degenerate)));
    Ok(MonitorVerdict {
        name: "bkm_constants".into(),
        holds: c.verified,
        applicable: true,
        worst_margin: -(c.violations as f64),
        worst_t: series.last().map_or(0.0, |r| r.t),
        tolerances: *tol,
        details,
    })
}

/// Evaluates the named monitors on one series.
pub fn run_monitors(
    cfg: &ExperimentConfig,
    names: &[String],
    series: &[DiagnosticsRow],
    dt: f64,
) -> Result<Vec<MonitorVerdict>> {
    let tol = cfg.tolerances.with_dt(dt);
    let x_init = series.first().map_or(0.0, |r| r.x_minus1);
    names
        .iter()
        .map(|name| match name.as_str() {
            "theorem" => theorem_monitor(series, cfg.mu, x_init, &tol),
            "dissipation" => dissipation_residual(series, cfg.mu, &tol),
            "time_derivative" => time_derivative_budget(series, cfg.mu, &tol),
            "bkm" => bkm_monitor(series, &tol),
            "bkm_constants" => bkm_verdict(cfg, series, &tol),
            "energy_growth" => energy_growth_monitor(series, cfg.energy_k, &tol),
            other => Err(config_err("monitors", format!("unknown monitor `{other}`"))),
        })
        .collect()
}

fn threads() -> usize {
    rayon::current_num_threads()
}

fn manifest(command: &str, cfg_echo: BTreeMap<String, String>, started: Instant) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        threads: threads(),
        wall_time_s: started.elapsed().as_secs_f64(),
        exit_code: 0,
        config: cfg_echo,
        verdicts: Vec::new(),
        files: Vec::new(),
    }
}

fn describe(status: ExitStatus, verdicts: &[MonitorVerdict], breakdown: Option<(f64, u64)>) -> String {
    let mut lines: Vec<String> = verdicts
        .iter()
        .map(|v| {
            let tag = match (v.applicable, v.holds) {
                (false, _) => "n/a ",
                (true, true) => "PASS",
                (true, false) => "FAIL",
            };
            format!("{tag} {} (worst margin {:.3e} at t = {})", v.name, v.worst_margin, v.worst_t)
        })
        .collect();
    if let Some((t, step)) = breakdown {
        lines.push(format!("numerical breakdown at t = {t} (step {step})"));
    }
    lines.push(format!("exit {}", status.code()));
    lines.join("\n")
}

fn initial_state(cfg: &ExperimentConfig) -> Result<(SolverState, SeriesRecorder)> {
    let Some(ckpt) = &cfg.resume_checkpoint else {
        let v = initial_datum(cfg)?;
        return Ok((SolverState::new(v, cfg.mu)?, SeriesRecorder::new(cfg.mu)));
    };
    let state = checkpoint_load(ckpt)?;
    let g = state.velocity().grid();
    if g.n() != cfg.n || g.box_size() != cfg.box_size {
        return Err(config_err("resume.checkpoint", "grid differs from grid.n / grid.box_size"));
    }
    if state.viscosity() != cfg.mu {
        return Err(config_err("resume.checkpoint", "viscosity differs from mu"));
    }
    let series_path = cfg
        .resume_series
        .as_ref()
        .ok_or_else(|| config_err("resume.series", "required together with resume.checkpoint"))?;
    let text = std::fs::read_to_string(series_path)
        .map_err(|e| config_err("resume.series", format!("cannot read {}: {e}", series_path.display())))?;
    let rows: Vec<DiagnosticsRow> = parse_series_csv(&text)?
        .into_iter()
        .filter(|r| r.step <= state.step_count())
        .collect();
    if rows.is_empty() {
        return Err(config_err("resume.series", "no rows at or before the checkpoint step"));
    }
    Ok((state, SeriesRecorder::resume(cfg.mu, rows)?))
}

/// Runs one trajectory and the given monitors, writing `series.csv`,
/// `verdicts.json`, `manifest.json` and any checkpoints to `output.dir`.
pub fn simulate_command(cfg: &ExperimentConfig, command: &str, monitors: &[String]) -> Result<Outcome> {
    let started = Instant::now();
    let (state, recorder) = initial_state(cfg)?;
    let mut out = ArtifactWriter::new(&cfg.output_dir)?;
    let every = cfg.checkpoint_every;
    let traj: Trajectory = simulate_with(
        state,
        cfg.horizon,
        &cfg.stepper,
        cfg.sample_every,
        recorder,
        |s, rec| {
            if every > 0 && s.step_count() % every == 0 {
                out.write(&format!("checkpoint_{:08}.bin", s.step_count()), &encode(s))?;
                out.write("series.csv", series_csv(rec.rows()).as_bytes())?;
            }
            Ok(())
        },
    )?;
    out.write("series.csv", series_csv(&traj.series).as_bytes())?;
    if traj.breakdown.is_some() {
        out.write("breakdown_state.bin", &encode(&traj.final_state))?;
    }
    let verdicts = if traj.breakdown.is_some() {
        // partial series: keep whichever monitors can still be evaluated
        monitors
            .iter()
            .filter_map(|m| run_monitors(cfg, std::slice::from_ref(m), &traj.series, traj.dt).ok())
            .flatten()
            .collect()
    } else {
        run_monitors(cfg, monitors, &traj.series, traj.dt)?
    };
    out.write("verdicts.json", verdicts_json(&verdicts)?.as_bytes())?;
    let status = if traj.breakdown.is_some() {
        ExitStatus::Breakdown
    } else {
        ExitStatus::of_verdicts(&verdicts)
    };
    let mut m = manifest(command, cfg.echo.clone(), started);
    m.exit_code = status.code();
    m.verdicts = summarize(&verdicts);
    let manifest = out.finish(m)?;
    Ok(Outcome {
        status,
        message: describe(status, &verdicts, traj.breakdown),
        verdicts,
        manifest,
    })
}

/// `simulate`: the monitors listed in the configuration.
pub fn cli_simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    simulate_command(cfg, "simulate", &cfg.monitors)
}

/// `verify-theorem`: the theorem battery on subcritical data.
pub fn cli_verify_theorem(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.resume_checkpoint.is_none() {
        let x = x_norm(&initial_datum(cfg)?, -1.0)?;
        if !(x < cfg.mu) {
            return Err(config_err(
                "data.target_x_minus1",
                format!("initial X^-1 norm {x} is not below mu = {}", cfg.mu),
            ));
        }
    }
    let names: Vec<String> = THEOREM_BATTERY.iter().map(|s| s.to_string()).collect();
    simulate_command(cfg, "verify-theorem", &names)
}

/// `bkm`: the vorticity bounds and splitting constants, typically on
/// supercritical data.
pub fn cli_bkm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let names: Vec<String> = BKM_BATTERY.iter().map(|s| s.to_string()).collect();
    simulate_command(cfg, "bkm", &names)
}

/// Mollifier gaps to the base datum must shrink along the list; equal
/// entries give equal gaps.
fn gap_verdict(lambdas: &[f64], gaps: &[f64], norms: &[f64], base: f64, tol: &Tolerances) -> MonitorVerdict {
    let mut holds = true;
    let mut worst = f64::INFINITY;
    for i in 0..lambdas.len() - 1 {
        let drop = gaps[i] - gaps[i + 1];
        if lambdas[i + 1] == lambdas[i] {
            holds &= drop == 0.0;
        } else {
            holds &= drop > 0.0;
            worst = worst.min(drop);
        }
    }
    for &n in norms {
        holds &= n <= base;
        worst = worst.min(base - n);
    }
    let mut details = BTreeMap::new();
    for (i, (&l, &g)) in lambdas.iter().zip(gaps).enumerate() {
        details.insert(format!("lambda_{i}"), l);
        details.insert(format!("gap_{i}"), g);
    }
    MonitorVerdict {
        name: "mollifier_gaps".into(),
        holds,
        applicable: true,
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
        worst_t: 0.0,
        tolerances: *tol,
        details,
    }
}

/// `cauchy-sweep`: runs every mollified datum in lockstep and checks the
/// stability bound on consecutive pairs.
pub fn cli_cauchy_sweep(cfg: &ExperimentConfig, lambdas: Option<&[f64]>) -> Result<Outcome> {
    let started = Instant::now();
    let lambdas: Vec<f64> = lambdas.map_or_else(|| cfg.lambda_list.clone(), <[f64]>::to_vec);
    if lambdas.len() < 2 {
        return Err(config_err("data.lambda_list", "need at least two values"));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(config_err("data.lambda_list", format!("entries must be positive, got {bad}")));
    }
    let base = base_datum(cfg)?;
    let x_init = x_norm(&base, -1.0)?;
    if !(x_init < cfg.mu) {
        return Err(config_err(
            "data.target_x_minus1",
            format!("base datum X^-1 norm {x_init} is not below mu = {}", cfg.mu),
        ));
    }
    let data = lambdas
        .iter()
        .map(|&l| mollify(&base, &MollifierSpec::new(cfg.mollifier, l)?))
        .collect::<Result<Vec<_>>>()?;
    let mut gaps = Vec::new();
    let mut norms = Vec::new();
    for d in &data {
        gaps.push(x_norm(&d.difference(&base)?, -1.0)?);
        norms.push(x_norm(d, -1.0)?);
    }
    let pair_gaps = data
        .windows(2)
        .map(|w| x_norm(&w[0].difference(&w[1])?, -1.0))
        .collect::<Result<Vec<_>>>()?;

    let mut diffs: Vec<Vec<PairDiffRow>> = vec![Vec::new(); data.len() - 1];
    let ens = ensemble(&data, cfg.mu, cfg.horizon, &cfg.stepper, cfg.sample_every, |states| {
        for (i, d) in diffs.iter_mut().enumerate() {
            push_pair_diff(d, &states[i], &states[i + 1])?;
        }
        Ok(())
    })?;
    let breakdown = ens.members.iter().find_map(|m| m.breakdown);

    let tol = cfg.tolerances.with_dt(ens.dt);
    let mut verdicts = vec![gap_verdict(&lambdas, &gaps, &norms, x_init, &tol)];
    let mut table = Vec::new();
    for i in 0..diffs.len() {
        let mut v = cauchy_pair_monitor(
            &ens.members[i].series,
            &ens.members[i + 1].series,
            &diffs[i],
            cfg.mu,
            x_init,
            pair_gaps[i],
            &tol,
        )?;
        v.name = format!("cauchy_pair_{i}");
        let factor = (x_init / (cfg.mu - x_init)).exp();
        let sup = diffs[i].iter().map(|d| d.diff_x_minus1).fold(0.0, f64::max);
        let int = diffs[i].last().map_or(0.0, |d| d.int_diff_x1);
        table.push(vec![
            lambdas[i],
            lambdas[i + 1],
            pair_gaps[i],
            sup,
            (cfg.mu - x_init) * int,
            pair_gaps[i] * factor * (1.0 + tol.rel_gronwall),
            f64::from(u8::from(v.holds)),
        ]);
        verdicts.push(v);
    }

    let mut out = ArtifactWriter::new(&cfg.output_dir)?;
    for (i, m) in ens.members.iter().enumerate() {
        out.write(&format!("series_{i}.csv"), series_csv(&m.series).as_bytes())?;
    }
    for (i, d) in diffs.iter().enumerate() {
        out.write(&format!("pair_{i}.csv"), pair_csv(d).as_bytes())?;
    }
    let columns = [
        "lambda_a",
        "lambda_b",
        "data_gap",
        "sup_diff_x_minus1",
        "scaled_int_diff_x1",
        "bound",
        "holds",
    ];
    out.write(
        "cauchy_table.csv",
        table_csv("# critical-ns cauchy-table v1", &columns, &table).as_bytes(),
    )?;
    out.write("verdicts.json", verdicts_json(&verdicts)?.as_bytes())?;
    let status = if breakdown.is_some() {
        ExitStatus::Breakdown
    } else {
        ExitStatus::of_verdicts(&verdicts)
    };
    let mut echo = cfg.echo.clone();
    let list: Vec<String> = lambdas.iter().map(f64::to_string).collect();
    echo.insert("data.lambda_list".into(), list.join(","));
    let mut m = manifest("cauchy-sweep", echo, started);
    m.exit_code = status.code();
    m.verdicts = summarize(&verdicts);
    let manifest = out.finish(m)?;
    Ok(Outcome {
        status,
        message: describe(status, &verdicts, breakdown),
        verdicts,
        manifest,
    })
}

/// Parses `1,2,4,8` into a strictly ascending list of positive indices.
pub fn parse_j_list(text: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        let j: u32 = item
            .parse()
            .map_err(|_| config_err("j_list", format!("cannot parse `{item}`")))?;
        if j == 0 {
            return Err(config_err("j_list", "indices start at 1"));
        }
        if out.last().is_some_and(|&p| j <= p) {
            return Err(config_err("j_list", "must be strictly ascending"));
        }
        out.push(j);
    }
    Ok(out)
}

/// `counterexample`: partial sums of the dyadic superposition, written to
/// `counterexample.csv`.
pub fn cli_counterexample(j_list: &[u32], sharpness: f64, out_dir: &Path) -> Result<Outcome> {
    let started = Instant::now();
    if j_list.is_empty() {
        return Err(config_err("j_list", "empty list"));
    }
    let profile = RadialProfile::new(ProfileShape::Bump { sharpness })
        .map_err(|e| config_err("sharpness", e.to_string()))?;
    let rows = counterexample_table(j_list, &profile).map_err(|e| config_err("j_list", e.to_string()))?;
    let mut worst = f64::INFINITY;
    let mut worst_j = 0;
    for r in &rows {
        let margin = 1e-10 * r.x_minus1_partial - r.harmonic_residual.abs();
        if margin < worst {
            worst = margin;
            worst_j = r.j;
        }
    }
    let mut details = BTreeMap::new();
    details.insert("l1_mass".into(), profile.l1_mass());
    details.insert("worst_j".into(), f64::from(worst_j));
    let verdict = MonitorVerdict {
        name: "harmonic_identity".into(),
        holds: worst >= 0.0,
        applicable: true,
        worst_margin: worst,
        worst_t: 0.0,
        tolerances: Tolerances::default(),
        details,
    };
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                f64::from(r.j),
                r.x_minus1_partial,
                r.h_half_partial,
                r.harmonic_residual,
                r.x_minus1_exact_partial,
            ]
        })
        .collect();
    let columns = [
        "j",
        "x_minus1_partial",
        "h_half_partial",
        "harmonic_residual",
        "x_minus1_exact_partial",
    ];
    let mut out = ArtifactWriter::new(out_dir)?;
    out.write(
        "counterexample.csv",
        table_csv("# critical-ns counterexample v1", &columns, &table).as_bytes(),
    )?;
    let verdicts = vec![verdict];
    out.write("verdicts.json", verdicts_json(&verdicts)?.as_bytes())?;
    let status = ExitStatus::of_verdicts(&verdicts);
    let mut echo = BTreeMap::new();
    let list: Vec<String> = j_list.iter().map(u32::to_string).collect();
    echo.insert("j_list".into(), list.join(","));
    echo.insert("sharpness".into(), sharpness.to_string());
    let mut m = manifest("counterexample", echo, started);
    m.exit_code = status.code();
    m.verdicts = summarize(&verdicts);
    let manifest = out.finish(m)?;
    Ok(Outcome {
        status,
        message: describe(status, &verdicts, None),
        verdicts,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::artifacts::verify_manifest;

    fn cfg(text: &str, dir: &Path) -> ExperimentConfig {
        let o = vec![("output.dir".to_string(), dir.display().to_string())];
        ExperimentConfig::parse(text, &o).unwrap()
    }

    #[test]
    fn shear_simulate_matches_heat_decay() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(
            "grid.n = 16\ndata.generator = shear_flow\ndata.amplitude = 0.5\nhorizon = 1\nstepper.dt = 0.01\n",
            dir.path(),
        );
        let o = cli_simulate(&c).unwrap();
        assert_eq!(o.status, ExitStatus::Success, "{}", o.message);
        let rows = parse_series_csv(&std::fs::read_to_string(dir.path().join("series.csv")).unwrap()).unwrap();
        let last = rows.last().unwrap();
        assert!((last.x_minus1 - 0.5 * (-1.0f64).exp()).abs() < 1e-6);
        assert!(verify_manifest(dir.path()).unwrap().is_empty());
        assert_eq!(o.manifest.files.len(), 2);
    }

    #[test]
    fn verify_theorem_refuses_supercritical_data() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("grid.n = 16\ndata.k_max = 4\ndata.target_x_minus1 = 1.5\n", dir.path());
        let e = cli_verify_theorem(&c).unwrap_err();
        assert_eq!(ExitStatus::of_error(&e), ExitStatus::ConfigError);
    }

    #[test]
    fn cauchy_sweep_list_checks() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("grid.n = 16\ndata.k_max = 4\nhorizon = 0.05\nstepper.dt = 0.01\n", dir.path());
        assert!(matches!(
            cli_cauchy_sweep(&c, Some(&[0.5])).unwrap_err(),
            Error::Config { .. }
        ));
        let o = cli_cauchy_sweep(&c, Some(&[0.5, 0.5])).unwrap();
        assert_eq!(o.status, ExitStatus::Success, "{}", o.message);
        let pair = &o.verdicts[1];
        assert!(pair.holds);
        assert_eq!(pair.details["sup_diff_x_minus1"], 0.0);
        // increasing lambda grows the gap to the base datum
        let o = cli_cauchy_sweep(&c, Some(&[0.125, 0.5])).unwrap();
        assert_eq!(o.status, ExitStatus::MonitorFailure);
        assert!(!o.verdicts[0].holds);
    }

    #[test]
    fn counterexample_command() {
        let dir = tempfile::tempdir().unwrap();
        let j = parse_j_list("1, 2,4,8").unwrap();
        let o = cli_counterexample(&j, 1.0, dir.path()).unwrap();
        assert_eq!(o.status, ExitStatus::Success);
        assert!(parse_j_list("2,1").is_err());
        assert!(parse_j_list("0,1").is_err());
        assert!(parse_j_list("1,x").is_err());
        assert!(cli_counterexample(&[], 1.0, dir.path()).is_err());
    }
}
