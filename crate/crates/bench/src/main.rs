use std::path::PathBuf;
use std::process::ExitCode;

use alefem_bench::{experiments, write_outputs, Experiment, ExperimentConfig};
use clap::Parser;

/// Moving-domain heat equation benchmarks.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// stability | convergence | accuracy | scl-check | verify
    #[arg(long)]
    experiment: Option<String>,
    /// Comma-separated scheme list, e.g. mIE,mCN,mBDF2,mBDF3
    #[arg(long)]
    scheme: Option<String>,
    /// Comma-separated time steps.
    #[arg(long)]
    dt: Option<String>,
    /// Comma-separated velocity strategies: dc, c
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated maps: stability, convergence, A, B, identity
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    /// Defaults to nx.
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    final_time: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip SVG plots.
    #[arg(long)]
    no_svg: bool,
}

fn build_config(cli: &Cli) -> alefem::Result<ExperimentConfig> {
    let experiment: Experiment = cli.experiment.as_deref().unwrap_or("verify").parse()?;
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| alefem::Error::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_text(&text, experiment)?
        }
        None => ExperimentConfig::defaults(experiment),
    };
    if cli.config.is_some() && cli.experiment.is_some() {
        cfg.experiment = experiment;
    }
    let overrides = [
        ("scheme", &cli.scheme),
        ("dt", &cli.dt),
        ("strategy", &cli.strategy),
        ("map", &cli.map),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(nx) = cli.nx {
        cfg.nx = nx;
        cfg.ny = cli.ny.unwrap_or(nx);
    } else if let Some(ny) = cli.ny {
        cfg.ny = ny;
    }
    if let Some(d) = cli.degree {
        cfg.degree = d;
    }
    if cli.final_time.is_some() {
        cfg.final_time = cli.final_time;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if cli.no_svg {
        cfg.svg = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|cfg| {
        let outputs = experiments::run(&cfg)?;
        write_outputs(&cfg.out, &outputs, cfg.svg)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::FAILURE
        }
    }
}
