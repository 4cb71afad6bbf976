//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # subcritical run
//! grid.n = 32
//! mu = 1.0
//! data.generator = random_divfree
//! data.target_x_minus1 = 0.8
//! stepper.dt = 0.01
//! horizon = 5
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::diagnostics::Tolerances;
use crate::dynamics::{Scheme, StepperConfig, TimeStep};
use crate::error::{Error, Result};
use crate::initial_data::MollifierShape;

/// Every key the parser accepts, with its default (empty: no default).
const KEYS: &[(&str, &str)] = &[
    ("grid.n", "32"),
    ("grid.box_size", "6.283185307179586"),
    ("mu", "1.0"),
    ("horizon", "1.0"),
    ("sample_every", "1"),
    ("seed", "1"),
    ("data.generator", "random_divfree"),
    ("data.target_x_minus1", "0.8"),
    ("data.spectrum_slope", "-2.0"),
    ("data.k_max", "8"),
    ("data.amplitude", "1.0"),
    ("data.axis", "1"),
    ("data.vary", "0"),
    ("data.m", "4"),
    ("data.mollifier", "gaussian"),
    ("data.lambda", ""),
    ("data.lambda_list", "0.5,0.25,0.125"),
    ("stepper.dt", "auto"),
    ("stepper.cfl_safety", "0.5"),
    ("stepper.scheme", "if_rk4"),
    ("monitors", "theorem,dissipation,time_derivative,bkm,energy_growth"),
    ("monitors.tol_rel", "0.05"),
    ("monitors.tol_monotone", "0.01"),
    ("monitors.c1", "1.0"),
    ("monitors.c2", "1.0"),
    ("monitors.energy_cap", "10.0"),
    ("monitors.energy_k", "2"),
    ("monitors.bkm_s", "1.0"),
    ("monitors.bkm_samples", "1000000"),
    ("output.dir", "out"),
    ("output.checkpoint_every", "0"),
    ("resume.checkpoint", ""),
    ("resume.series", ""),
];

pub const MONITOR_NAMES: &[&str] = &[
    "theorem",
    "dissipation",
    "time_derivative",
    "bkm",
    "bkm_constants",
    "energy_growth",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    RandomDivfree {
        target_x_minus1: f64,
        spectrum_slope: f64,
        k_max: u32,
    },
    ShearFlow {
        axis: usize,
        vary: usize,
        amplitude: f64,
    },
    CheminGallagher {
        m: u32,
        amplitude: f64,
    },
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub box_size: f64,
    pub mu: f64,
    pub horizon: f64,
    pub sample_every: u64,
    pub seed: u64,
    pub generator: Generator,
    pub mollifier: MollifierShape,
    pub lambda: Option<f64>,
    pub lambda_list: Vec<f64>,
    pub stepper: StepperConfig,
    pub monitors: Vec<String>,
    pub tolerances: Tolerances,
    pub energy_k: u32,
    pub bkm_s: f64,
    pub bkm_samples: u64,
    pub output_dir: PathBuf,
    pub checkpoint_every: u64,
    pub resume_checkpoint: Option<PathBuf>,
    pub resume_series: Option<PathBuf>,
    /// Effective key/value pairs after defaults, for the manifest.
    pub echo: BTreeMap<String, String>,
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn raw(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or("")
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| config_err(key, format!("cannot parse `{raw}`")))
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v: f64 = self.get(key)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_err(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        let raw = self.raw(key);
        (!raw.is_empty()).then(|| PathBuf::from(raw))
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// unknown or repeated keys are errors.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(&format!("line {}", lineno + 1), "expected `key = value`"))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if KEYS.iter().all(|(name, _)| *name != k) {
            return Err(config_err(&k, "unknown key"));
        }
        if seen.insert(k.clone(), ()).is_some() {
            return Err(config_err(&k, "key given twice"));
        }
        out.push((k, v));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("file", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &[])
    }

    /// Parses `text`, then applies `overrides` (which may repeat keys of the file).
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in parse_pairs(text)? {
            values.insert(k, v);
        }
        for (k, v) in overrides {
            if KEYS.iter().all(|(name, _)| name != k) {
                return Err(config_err(k, "unknown key"));
            }
            values.insert(k.clone(), v.clone());
        }
        Self::from_values(Values(values))
    }

    fn from_values(v: Values) -> Result<Self> {
        let n: usize = v.get("grid.n")?;
        if n < 8 || !n.is_multiple_of(2) {
            return Err(config_err("grid.n", format!("must be even and >= 8, got {n}")));
        }
        let box_size = v.positive("grid.box_size")?;
        let mu = v.positive("mu")?;
        let horizon = v.positive("horizon")?;
        let sample_every: u64 = v.get("sample_every")?;
        if sample_every == 0 {
            return Err(config_err("sample_every", "must be at least 1"));
        }
        let generator = match v.raw("data.generator") {
            "random_divfree" => {
                let target: f64 = v.get("data.target_x_minus1")?;
                if !(target >= 0.0 && target.is_finite()) {
                    return Err(config_err("data.target_x_minus1", "must be finite and >= 0"));
                }
                let k_max: u32 = v.get("data.k_max")?;
                let retained = ((n - 1) / 3) as u32;
                if k_max == 0 || k_max > retained {
                    return Err(config_err(
                        "data.k_max",
                        format!("must lie in 1..={retained} for grid.n = {n}"),
                    ));
                }
                Generator::RandomDivfree {
                    target_x_minus1: target,
                    spectrum_slope: v.get("data.spectrum_slope")?,
                    k_max,
                }
            }
            "shear_flow" => {
                let axis: usize = v.get("data.axis")?;
                let vary: usize = v.get("data.vary")?;
                if axis > 2 || vary > 2 || axis == vary {
                    return Err(config_err("data.axis", "axis and vary must be distinct values in 0..=2"));
                }
                Generator::ShearFlow {
                    axis,
                    vary,
                    amplitude: v.get("data.amplitude")?,
                }
            }
            "chemin_gallagher" => {
                let m: u32 = v.get("data.m")?;
                if m == 0 || 3 * m as usize >= n {
                    return Err(config_err("data.m", format!("need 0 < 3m < grid.n, got m = {m}")));
                }
                Generator::CheminGallagher {
                    m,
                    amplitude: v.get("data.amplitude")?,
                }
            }
            "zero" => Generator::Zero,
            other => return Err(config_err("data.generator", format!("unknown generator `{other}`"))),
        };
        let mollifier: MollifierShape = v
            .get::<String>("data.mollifier")?
            .parse()
            .map_err(|_| config_err("data.mollifier", "expected `gaussian` or `poisson`"))?;
        let lambda = match v.raw("data.lambda") {
            "" => None,
            _ => Some(v.positive("data.lambda")?),
        };
        let mut lambda_list = Vec::new();
        for item in v.list("data.lambda_list") {
            let l: f64 = item
                .parse()
                .map_err(|_| config_err("data.lambda_list", format!("cannot parse `{item}`")))?;
            if !(l > 0.0 && l.is_finite()) {
                return Err(config_err("data.lambda_list", format!("entries must be positive, got {l}")));
            }
            lambda_list.push(l);
        }
        let dt: TimeStep = v
            .raw("stepper.dt")
            .parse()
            .map_err(|e: Error| config_err("stepper.dt", e.to_string()))?;
        let stepper = StepperConfig {
            dt,
            cfl_safety: v.get("stepper.cfl_safety")?,
            scheme: v
                .raw("stepper.scheme")
                .parse::<Scheme>()
                .map_err(|e| config_err("stepper.scheme", e.to_string()))?,
        };
        stepper
            .validate()
            .map_err(|e| config_err("stepper.cfl_safety", e.to_string()))?;
        let monitors = v.list("monitors");
        for m in &monitors {
            if !MONITOR_NAMES.contains(&m.as_str()) {
                return Err(config_err("monitors", format!("unknown monitor `{m}`")));
            }
        }
        let tolerances = Tolerances {
            rel_gronwall: v.get("monitors.tol_rel")?,
            rel_monotone: v.get("monitors.tol_monotone")?,
            c1: v.get("monitors.c1")?,
            c2: v.get("monitors.c2")?,
            dt: 0.0,
            energy_cap: v.get("monitors.energy_cap")?,
        };
        let energy_k: u32 = v.get("monitors.energy_k")?;
        if !(1..=3).contains(&energy_k) {
            return Err(config_err("monitors.energy_k", "must be 1, 2 or 3"));
        }
        let resume_checkpoint = v.path("resume.checkpoint");
        if resume_checkpoint.is_some() && dt == TimeStep::Auto {
            return Err(config_err(
                "stepper.dt",
                "resuming from a checkpoint needs a fixed step so the continuation matches",
            ));
        }
        Ok(ExperimentConfig {
            n,
            box_size,
            mu,
            horizon,
            sample_every,
            seed: v.get("seed")?,
            generator,
            mollifier,
            lambda,
            lambda_list,
            stepper,
            monitors,
            tolerances,
            energy_k,
            bkm_s: v.positive("monitors.bkm_s")?,
            bkm_samples: v.get("monitors.bkm_samples")?,
            output_dir: PathBuf::from(v.raw("output.dir")),
            checkpoint_every: v.get("output.checkpoint_every")?,
            resume_checkpoint,
            resume_series: v.path("resume.series"),
            echo: v.0,
        })
    }
}
