use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use equiclass::cli::{parse_uncertainty, run, RunConfig};

#[derive(Parser)]
#[command(
    name = "equiclass",
    version,
    about = "Classify objects by proximity to equitable efficiency"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seed and improve a classification of the objects in a CSV file.
    Classify {
        /// Input CSV with a header row, one object per data row.
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated input characteristic columns.
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<String>,
        /// Comma-separated output characteristic columns.
        #[arg(long, value_delimiter = ',', required = true)]
        outputs: Vec<String>,
        /// Number of categories.
        #[arg(long)]
        categories: usize,
        /// Column with object labels.
        #[arg(long)]
        id_column: Option<String>,
        /// `identity` or `diagonal:<w,...>`.
        #[arg(long, default_value = "identity")]
        uncertainty: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        eps_eff: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        workers: Option<usize>,
        /// Min-max scale every characteristic to [0.1, 1] before solving.
        #[arg(long)]
        scale: bool,
        /// Write one SVG frame per history step (one input, one output only).
        #[arg(long)]
        plots: bool,
        /// Output directory.
        #[arg(long, default_value = "equiclass-out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let Command::Classify {
        data,
        inputs,
        outputs,
        categories,
        id_column,
        uncertainty,
        delta,
        epsilon,
        eps_eff,
        max_iters,
        workers,
        scale,
        plots,
        out,
    } = Cli::parse().command;

    let uncertainty = match parse_uncertainty(&uncertainty) {
        Ok(u) => u,
        Err(e) => {
            eprintln!("equiclass: {e}");
            return ExitCode::from(2);
        }
    };
    let mut config = RunConfig::new(categories, inputs, outputs);
    config.id_column = id_column;
    config.uncertainty = uncertainty;
    config.delta = delta.unwrap_or(config.delta);
    config.epsilon = epsilon.unwrap_or(config.epsilon);
    config.eps_eff = eps_eff.unwrap_or(config.eps_eff);
    config.max_iters = max_iters.unwrap_or(config.max_iters);
    config.workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    config.scale_data = scale;
    config.emit_plots = plots;

    match run(&config, &data, &out) {
        Ok(report) => {
            let last = report.final_step();
            println!(
                "{} improvements, final total {:.6}; wrote {}",
                report.history.len() - 1,
                last.total,
                out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("equiclass: {e}");
            ExitCode::FAILURE
        }
    }
}
