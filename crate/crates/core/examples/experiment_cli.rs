//! The `simulate` driver from library code: config text in, artifacts out.

use critical_ns::experiment::{cli_simulate, verify_manifest, ExperimentConfig};

fn main() -> critical_ns::Result<()> {
    let dir = std::env::temp_dir().join("critical_ns_experiment");
    let text = "grid.n = 16\n\
                data.generator = random_divfree\n\
                data.k_max = 5\n\
                data.target_x_minus1 = 0.5\n\
                stepper.dt = 0.01\n\
                horizon = 0.5\n\
                monitors = theorem,dissipation\n";
    let cfg = ExperimentConfig::parse(text, &[("output.dir".into(), dir.display().to_string())])?;
    let outcome = cli_simulate(&cfg)?;
    println!("{}", outcome.message);
    for f in &outcome.manifest.files {
        println!("{} {} bytes sha256 {}", f.path, f.bytes, f.sha256);
    }
    println!("checksum mismatches: {:?}", verify_manifest(&dir)?);
    Ok(())
}
