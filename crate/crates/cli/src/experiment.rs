use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use aqw_core::channels::{build_family, trajectory_run, ExactEvolution, TrajectoryOptions};
use aqw_core::correlations::{correlation_report, correlation_report_from_parts, ReducedParts, MAX_XY_WINDOW};
use aqw_core::moments::{long_time_diffusion, moment_series, recommended_grid, BlochVector, DiffusionReport};
use aqw_core::walk::moment_report;
use aqw_core::{Error, Model, MomentReport, PositionDistribution, WalkConfig};
use rayon::prelude::*;

use crate::config::{Engine, Experiment, ExperimentConfig, DEFAULT_DIFFUSION_GRID};

/// One output file before it is written.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvFile {
    pub name: String,
    pub contents: String,
}

/// Twelve significant digits; `-0` prints as `0`.
pub fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

fn f_tag(f: f64) -> String {
    format!("f{f}")
}

fn walk_config(config: &ExperimentConfig, f: f64) -> WalkConfig {
    WalkConfig::new(config.model, f, config.t_max).with_coin(config.coin)
}

fn hint(err: Error) -> anyhow::Error {
    match err {
        Error::WindowOverflow { .. } => {
            anyhow::Error::new(err).context("the state left the lattice window; raise the window or lower t_max")
        }
        other => other.into(),
    }
}

fn exact_evolution(config: &ExperimentConfig, f: f64) -> Result<ExactEvolution> {
    let family = build_family(config.model, f)?;
    Ok(ExactEvolution::new(&family, config.coin))
}

fn trajectories(config: &ExperimentConfig, f: f64, opts: &TrajectoryOptions) -> Result<aqw_core::channels::TrajectoryEnsembleResult> {
    trajectory_run(&walk_config(config, f), config.n_traj, config.seed, opts).map_err(hint)
}

fn distribution_at_t_max(config: &ExperimentConfig, f: f64) -> Result<PositionDistribution> {
    match config.resolved_engine() {
        Engine::Exact => {
            let mut evo = exact_evolution(config, f)?;
            for _ in 0..config.t_max {
                evo.step().map_err(hint)?;
            }
            Ok(evo.position_distribution())
        }
        Engine::Trajectory => Ok(trajectories(config, f, &TrajectoryOptions::default())?.p_hat),
        Engine::Analytic => anyhow::bail!("the analytic engine does not produce distributions"),
    }
}

fn distribution_csv(config: &ExperimentConfig, f: f64) -> Result<String> {
    let p = distribution_at_t_max(config, f)?;
    let mut out = String::from("x,y,P\n");
    for (x, y, v) in p.iter() {
        writeln!(out, "{x},{y},{}", num(v))?;
    }
    Ok(out)
}

/// Moment series `t = 0..=t_max` from the configured engine.
pub fn variance_series(config: &ExperimentConfig, f: f64) -> Result<Vec<MomentReport>> {
    match config.resolved_engine() {
        Engine::Exact => {
            let mut evo = exact_evolution(config, f)?;
            let mut out = vec![moment_report(&evo.position_distribution(), 0)];
            for t in 1..=config.t_max {
                evo.step().map_err(hint)?;
                out.push(moment_report(&evo.position_distribution(), t));
            }
            Ok(out)
        }
        Engine::Trajectory => {
            let run = trajectories(config, f, &TrajectoryOptions::default())?;
            Ok(run.series.into_iter().map(|e| e.report).collect())
        }
        Engine::Analytic => {
            let bloch = BlochVector::from_coin(config.coin)?;
            let grid = config.grid_n.unwrap_or_else(|| recommended_grid(config.t_max));
            Ok(moment_series(config.model, f, &bloch, config.t_max, grid)?)
        }
    }
}

fn variance_csv(config: &ExperimentConfig, f: f64) -> Result<String> {
    let engine = config.resolved_engine();
    let mut out = String::from("t,var_x,var_y,engine\n");
    for r in variance_series(config, f)? {
        writeln!(out, "{},{},{},{engine}", r.t, num(r.var_x), num(r.var_y))?;
    }
    Ok(out)
}

/// Diffusion row for one `f`. The fully broken line has a singular resolvent;
/// there `σ_x² ≡ 0` and `σ_y² = t²`, so the row uses those closed forms.
pub fn diffusion_row(model: Model, f: f64, grid_n: usize) -> Result<DiffusionReport> {
    match long_time_diffusion(model, f, grid_n) {
        Err(Error::SingularResolvent { .. }) if model == Model::BrokenLine && f == 1.0 => Ok(DiffusionReport {
            f,
            d_x: 0.0,
            d_y: f64::INFINITY,
            b_x: f64::NAN,
            b_y: f64::INFINITY,
            divergent_x: false,
            divergent_y: true,
            grid_n,
        }),
        other => Ok(other?),
    }
}

fn diffusion_csv(config: &ExperimentConfig) -> Result<String> {
    let grid = config.grid_n.unwrap_or(DEFAULT_DIFFUSION_GRID);
    let rows: Vec<Result<DiffusionReport>> =
        config.f_values.par_iter().map(|&f| diffusion_row(config.model, f, grid)).collect();
    let mut out = String::from("f,D_x,D_y,B_x,B_y,divergent_y\n");
    for r in rows {
        let r = r?;
        writeln!(out, "{},{},{},{},{},{}", num(r.f), num(r.d_x), num(r.d_y), num(r.b_x), num(r.b_y), r.divergent_y)?;
    }
    Ok(out)
}

fn correlations_csv(config: &ExperimentConfig, f: f64) -> Result<String> {
    let with_xy = config.t_max <= MAX_XY_WINDOW;
    let mut reports = Vec::with_capacity(config.t_max);
    match config.resolved_engine() {
        Engine::Exact => {
            let mut evo = exact_evolution(config, f)?;
            for t in 1..=config.t_max {
                evo.step().map_err(hint)?;
                reports.push(correlation_report(evo.rho(), t, config.model, f, with_xy)?);
            }
        }
        Engine::Trajectory => {
            let opts = TrajectoryOptions { collect_rho: false, reduced_at: (1..=config.t_max).collect(), reduced_xy: with_xy };
            let run = trajectories(config, f, &opts)?;
            for r in &run.reduced {
                let parts = ReducedParts { p: &r.p, xy: r.xy.as_ref(), xc: &r.xc, yc: &r.yc };
                reports.push(correlation_report_from_parts(r.t, config.model, f, &parts)?);
            }
        }
        Engine::Analytic => anyhow::bail!("the analytic engine does not produce correlations"),
    }
    let mut out = String::from("t,I_c,mid_xy,mid_xc,mid_yc\n");
    for r in reports {
        writeln!(out, "{},{},{},{},{}", r.t, num(r.i_c), num(r.mid_xy), num(r.mid_xc), num(r.mid_yc))?;
    }
    Ok(out)
}

fn file_stem(config: &ExperimentConfig) -> String {
    format!("{}_{}", config.experiment.as_str(), config.model.as_str())
}

/// Computes every CSV of an experiment without touching the file system.
/// Independent `f` values run in parallel; the output order follows `f_values`.
pub fn render_experiment(config: &ExperimentConfig) -> Result<Vec<CsvFile>> {
    config.validate()?;
    let stem = file_stem(config);
    if config.experiment == Experiment::DiffusionVsF {
        return Ok(vec![CsvFile { name: format!("{stem}.csv"), contents: diffusion_csv(config)? }]);
    }
    config
        .f_values
        .par_iter()
        .map(|&f| {
            let contents = match config.experiment {
                Experiment::Distribution => distribution_csv(config, f),
                Experiment::VarianceVsT => variance_csv(config, f),
                Experiment::CorrelationsVsT => correlations_csv(config, f),
                Experiment::DiffusionVsF => unreachable!("handled above"),
            }
            .with_context(|| format!("{stem} at f = {f}"))?;
            Ok(CsvFile { name: format!("{stem}_{}.csv", f_tag(f)), contents })
        })
        .collect()
}

fn manifest(config: &ExperimentConfig, files: &[CsvFile], seconds: f64) -> String {
    let mut out = String::new();
    out += "# aqw run manifest\n";
    out += &format!("aqw-cli = {}\n", env!("CARGO_PKG_VERSION"));
    out += &format!("aqw-core = {}\n", aqw_core::VERSION);
    out += &format!("resolved_engine = {}\n", config.resolved_engine());
    out += &format!("threads = {}\n", rayon::current_num_threads());
    out += &format!("wall_time_s = {seconds:.3}\n");
    for f in files {
        out += &format!("file = {}\n", f.name);
    }
    out += "\n# config\n";
    out += &config.to_text();
    out
}

/// Runs `config` and writes its CSVs plus a manifest into `dir`.
pub fn run_experiment_in(config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    let files = render_experiment(config)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::with_capacity(files.len() + 1);
    for f in &files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    let path = dir.join(format!("{}.manifest.txt", file_stem(config)));
    fs::write(&path, manifest(config, &files, start.elapsed().as_secs_f64()))
        .with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(written)
}

/// Runs `config` into its own `output_path`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    run_experiment_in(config, &config.output_path)
}
