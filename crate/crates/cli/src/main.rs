use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use aqw_cli::config::parse_model;
use aqw_cli::suites::{check_suite, compare_engines, CheckLine, CompareSpec};
use aqw_cli::{parse_config, run_experiment, run_preset, Engine, Overrides, Preset};
use aqw_core::Model;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aqw", version, about = "Decoherent 2D alternative quantum walk: simulations, moments and correlations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Seed for the trajectory engine; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// exact, trajectory or analytic; overrides the config.
    #[arg(long, global = true, value_parser = parse_engine)]
    engine: Option<Engine>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the data behind one figure.
    Preset {
        #[arg(value_parser = parse_preset)]
        name: Preset,
        #[arg(long)]
        out: PathBuf,
    },
    /// Completeness and superoperator consistency checks.
    Check,
    /// Exact, trajectory and analytic variances side by side for t <= 20.
    Compare {
        #[arg(long, value_parser = parse_model_arg, default_value = "broken_line")]
        model: Model,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5])]
        f: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        t_max: usize,
        #[arg(long, default_value_t = 5000)]
        n_traj: usize,
    },
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

fn parse_model_arg(s: &str) -> Result<Model, String> {
    parse_model(s)
}

fn report(lines: &[CheckLine]) -> bool {
    for line in lines {
        println!("{}", line.render());
    }
    lines.iter().all(|l| l.pass)
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let overrides = Overrides { seed: cli.global.seed, engine: cli.global.engine };
    match cli.command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = parse_config(&text).with_context(|| format!("in {}", config.display()))?;
            overrides.apply(&mut cfg);
            if let Some(out) = out {
                cfg.output_path = out;
            }
            cfg.validate()?;
            for path in run_experiment(&cfg)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Preset { name, out } => {
            for path in run_preset(name, &out, overrides)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Check => Ok(report(&check_suite()?)),
        Command::Compare { model, f, t_max, n_traj } => {
            let mut ok = true;
            for f in f {
                let spec = CompareSpec { model, f, t_max, n_traj, seed: cli.global.seed.unwrap_or(0) };
                ok &= report(&compare_engines(&spec)?);
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
