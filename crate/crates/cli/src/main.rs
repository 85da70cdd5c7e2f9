use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use cospectrum::harness::{
    emit_csv, emit_plot, run_experiment, HarnessError, MethodChoice, ScenarioConfig, SweepKind,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Gs,
    Tp,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepArg {
    Iterations,
    Snr,
    Users,
}

/// Monte Carlo simulation of subcarrier matching plus WMMSE precoding.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// JSON scenario file
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    sweep: Option<SweepArg>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write an SVG chart next to the CSV
    #[arg(long)]
    emit_plots: bool,
}

fn load(args: &Args) -> Result<ScenarioConfig, String> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let mut cfg = ScenarioConfig::from_json(&text).map_err(|e| e.to_string())?;
    if let Some(m) = args.method {
        cfg.method = match m {
            MethodArg::Gs => MethodChoice::GaleShapley,
            MethodArg::Tp => MethodChoice::Transportation,
            MethodArg::Both => MethodChoice::Both,
        };
    }
    if let Some(s) = args.sweep {
        cfg.sweep = match s {
            SweepArg::Iterations => SweepKind::Iterations,
            SweepArg::Snr => SweepKind::Snr,
            SweepArg::Users => SweepKind::Users,
        };
    }
    if let Some(n) = args.samples {
        cfg.samples = n;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();

    let cfg = match load(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let table = match run_experiment(&cfg) {
        Ok(t) => t,
        Err(e @ HarnessError::TooManyFailures { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(HarnessError::Config(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if let Err(e) = std::fs::create_dir_all(&args.out_dir) {
        eprintln!("error: cannot create {}: {e}", args.out_dir.display());
        return ExitCode::from(1);
    }
    let stem = format!("{}_{}", cfg.sweep.name(), cfg.method.short_name());
    let csv_path = args.out_dir.join(format!("{stem}.csv"));
    if let Err(e) = emit_csv(&table, &csv_path) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    println!("{}", csv_path.display());
    if args.emit_plots {
        let svg_path = args.out_dir.join(format!("{stem}.svg"));
        if let Err(e) = emit_plot(&table, cfg.sweep, &svg_path) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        println!("{}", svg_path.display());
    }
    ExitCode::SUCCESS
}
