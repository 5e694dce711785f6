//! Runs a config through the experiment runner, as the `frontlab` binary
//! does, and prints the gates. Defaults to the fast suite.
//!
//! cargo run --release --example run_suite -- [config.toml] [out dir]

use std::path::PathBuf;

use frontlab::runner::{emit_report, run_experiment, Settings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/quick.toml"));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("frontlab-runs"));
    let settings = Settings {
        out,
        ..Settings::default()
    };

    let record = run_experiment(&config, &settings)?;
    let summary = emit_report(std::slice::from_ref(&record), &record.dir)?;
    for line in &summary.lines {
        println!("{line}");
    }
    println!(
        "{} gates, {} failed, {:.1} s; report in {}",
        summary.gates,
        summary.failed,
        record.elapsed_seconds,
        record.dir.display()
    );
    Ok(())
}
