//! End-to-end batch run on the bundled risk/return data: report.json,
//! classification.csv and one SVG frame per history step.
//!
//! Usage: cargo run --release --example batch_report [out_dir]

use std::path::{Path, PathBuf};

use equiclass::cli::{run, RunConfig};

fn main() -> equiclass::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/risk_return.csv");
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "risk-return-out".into())
        .into();

    let mut config = RunConfig::new(3, vec!["semidev".into()], vec!["avgret".into()]);
    config.emit_plots = true;
    config.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run(&config, &data, &out)?;

    println!("{:<16} {:>10} {:>10} {:>10} {:>10}", "", "P^1", "P^2", "P^3", "total");
    for step in &report.history {
        let p: Vec<String> = step
            .categories
            .iter()
            .map(|c| format!("{:>10.6}", c.proximity))
            .collect();
        println!("{:<16} {} {:>10.6}", step.label, p.join(" "), step.total);
    }
    println!("wrote {}", out.display());
    Ok(())
}
