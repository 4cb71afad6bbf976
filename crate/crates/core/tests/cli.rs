use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use critical_ns::experiment::{parse_series_csv, verify_manifest};
use critical_ns::initial_data::RadialProfile;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_critical-ns"));
    c.env("CRITNS_THREADS", "1");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    let text = format!("{body}\noutput.dir = {}\n", dir.join(format!("{name}.out")).display());
    std::fs::write(&p, text).unwrap();
    p
}

fn series(dir: &Path) -> Vec<critical_ns::diagnostics::DiagnosticsRow> {
    parse_series_csv(&std::fs::read_to_string(dir.join("series.csv")).unwrap()).unwrap()
}

const SMALL: &str = "grid.n = 16\ndata.generator = random_divfree\ndata.k_max = 5\n\
                     data.target_x_minus1 = 0.6\nstepper.dt = 0.01\nhorizon = 0.2";

#[test]
fn shear_flow_decays_exactly() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        d.path(),
        "shear.cfg",
        "grid.n = 16\ndata.generator = shear_flow\ndata.amplitude = 0.7\nhorizon = 0.5\nstepper.dt = 0.01",
    );
    let o = run(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = d.path().join("shear.cfg.out");
    let rows = series(&out);
    let want = (-0.5f64).exp() * rows[0].x_minus1;
    assert!((rows.last().unwrap().x_minus1 - want).abs() < 1e-6);
    assert!(verify_manifest(&out).unwrap().is_empty());
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "bad.cfg", "mu = 0");
    let o = run(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`mu`"));

    let o = run(&["simulate", d.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(code(&o), 2);

    let cfg = write_cfg(d.path(), "ok.cfg", SMALL);
    let o = run(&["simulate", cfg.to_str().unwrap(), "--set", "horizon=-1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizon"));

    let o = bin().env("CRITNS_THREADS", "zero").args(["simulate", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn breakdown_exits_3_with_partial_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        d.path(),
        "boom.cfg",
        "grid.n = 16\ndata.k_max = 5\ndata.target_x_minus1 = 1e4\nstepper.dt = 0.5\nhorizon = 5",
    );
    let o = run(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let out = d.path().join("boom.cfg.out");
    assert!(!series(&out).is_empty());
    assert!(out.join("breakdown_state.bin").exists());
    assert!(verify_manifest(&out).unwrap().is_empty());
}

#[test]
fn verify_theorem_needs_subcritical_data() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "sub.cfg", SMALL);
    assert_eq!(code(&run(&["verify-theorem", cfg.to_str().unwrap()])), 0);
    let o = run(&["verify-theorem", cfg.to_str().unwrap(), "--set", "data.target_x_minus1=1.2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bkm_subcommand_runs_supercritical_data() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        d.path(),
        "sup.cfg",
        "grid.n = 16\ndata.k_max = 5\ndata.target_x_minus1 = 2\nstepper.dt = 0.01\nhorizon = 0.2\n\
         monitors.bkm_samples = 10000",
    );
    let o = run(&["bkm", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = std::fs::read_to_string(d.path().join("sup.cfg.out/verdicts.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|x| x["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["bkm", "bkm_constants"]);
}

#[test]
fn cauchy_sweep_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "c.cfg", SMALL);
    let c = cfg.to_str().unwrap();
    let o = run(&["cauchy-sweep", c]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = d.path().join("c.cfg.out");
    for f in ["series_0.csv", "series_2.csv", "pair_1.csv", "cauchy_table.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(code(&run(&["cauchy-sweep", c, "--lambdas", "0.5"])), 2);
    assert_eq!(code(&run(&["cauchy-sweep", c, "--lambdas", "0.25,0.25"])), 0);
    // growing lambda moves the data away from the base datum
    assert_eq!(code(&run(&["cauchy-sweep", c, "--lambdas", "0.125,0.5"])), 1);
}

#[test]
fn counterexample_table_follows_harmonic_numbers() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("ce");
    let o = run(&["counterexample", "--j-list", "1,2,4,8", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(out.join("counterexample.csv")).unwrap();
    let mass = RadialProfile::bump().l1_mass();
    let want = [1.0, 1.5, 25.0 / 12.0, 761.0 / 280.0];
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for (r, w) in rows.iter().zip(want) {
        assert!((r[1] - mass * w).abs() <= 1e-12 * r[1], "{r:?}");
    }
    assert_eq!(code(&run(&["counterexample", "--j-list", "4,2", "--out", out.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["counterexample", "--j-list", "1,a", "--out", out.to_str().unwrap()])), 2);
}

#[test]
fn repeated_runs_are_bit_identical_and_resume_matches() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_cfg(d.path(), "det.cfg", SMALL);
    let c = cfg.to_str().unwrap();
    let dir = |s: &str| d.path().join(s);
    let set = |s: &str| format!("output.dir={}", dir(s).display());
    assert_eq!(code(&run(&["simulate", c, "--set", &set("a"), "--set", "output.checkpoint_every=7"])), 0);
    assert_eq!(code(&run(&["simulate", c, "--set", &set("b")])), 0);
    let a = std::fs::read(dir("a").join("series.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir("b").join("series.csv")).unwrap());
    assert!(dir("a").join("checkpoint_00000014.bin").exists());

    let resume = [
        format!("resume.checkpoint={}", dir("a").join("checkpoint_00000007.bin").display()),
        format!("resume.series={}", dir("a").join("series.csv").display()),
    ];
    let o = run(&["simulate", c, "--set", &set("r"), "--set", &resume[0], "--set", &resume[1]]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(a, std::fs::read(dir("r").join("series.csv")).unwrap());
    assert_eq!(series(&dir("r")).len(), 21);

    // resuming needs a fixed step
    let o = run(&["simulate", c, "--set", "stepper.dt=auto", "--set", &resume[0], "--set", &resume[1]]);
    assert_eq!(code(&o), 2);

    let bad = dir("bad.bin");
    let mut bytes = std::fs::read(dir("a").join("checkpoint_00000007.bin")).unwrap();
    bytes[..4].copy_from_slice(b"NOPE");
    std::fs::write(&bad, bytes).unwrap();
    let o = run(&[
        "simulate",
        c,
        "--set",
        &format!("resume.checkpoint={}", bad.display()),
        "--set",
        &resume[1],
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("LLNS"));
}
