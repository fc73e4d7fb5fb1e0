use anyhow::Result;
use aqw_core::channels::{build_family, completeness_check, stencil_consistency, trajectory_run, SignConvention, TrajectoryOptions};
use aqw_core::moments::{superops_consistency, superops_fd_consistency, trace_identity_deviation};
use aqw_core::{Model, WalkConfig};

use crate::config::{Engine, Experiment, ExperimentConfig};
use crate::experiment::variance_series;

/// One line of a check or comparison report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl CheckLine {
    fn below(name: String, value: f64, limit: f64) -> Self {
        Self { name, value, limit, pass: value < limit }
    }

    /// Passes when the value reaches the limit; used for negative controls.
    fn above(name: String, value: f64, limit: f64) -> Self {
        Self { name, value, limit, pass: value >= limit }
    }

    pub fn render(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        format!("{status} {:<52} {:.3e} (limit {:.0e})", self.name, self.value, self.limit)
    }
}

const CHECK_F: [f64; 5] = [0.0, 0.1, 0.5, 0.9, 1.0];

/// Completeness, superoperator and stencil consistency checks.
pub fn check_suite() -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    for model in [Model::BrokenLine, Model::CoinMeasure] {
        for f in CHECK_F {
            let family = build_family(model, f)?;
            out.push(CheckLine::below(format!("completeness {model} f={f}"), completeness_check(&family, 100), 1e-12));
            out.push(CheckLine::below(format!("superoperators vs Kraus {model} f={f}"), superops_consistency(model, f, 50)?, 1e-12));
            out.push(CheckLine::below(
                format!("superoperators vs differences {model} f={f}"),
                superops_fd_consistency(model, f, 50, 1e-5)?,
                1e-5,
            ));
        }
        let family = build_family(model, 0.3)?;
        out.push(CheckLine::below(
            format!("stencils vs coherent step {model}"),
            stencil_consistency(&family, SignConvention::Forward)?,
            1e-12,
        ));
        out.push(CheckLine::above(
            format!("reversed stencils rejected {model}"),
            stencil_consistency(&family, SignConvention::Reversed)?,
            1e-3,
        ));
    }
    for f in CHECK_F {
        out.push(CheckLine::below(format!("trace sums broken_line f={f} t<=50"), trace_identity_deviation(f, 20, 50)?, 1e-9));
    }
    Ok(out)
}

/// `|estimate - exact|` in standard errors. Deviations at rounding level
/// score zero: when every trajectory yields the same value the standard
/// error is rounding noise too, and their ratio is meaningless.
pub fn standard_score(estimate: f64, exact: f64, se: f64) -> f64 {
    let d = (estimate - exact).abs();
    if d <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else if se > 0.0 {
        d / se
    } else {
        f64::INFINITY
    }
}

/// Settings of the `compare` subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareSpec {
    pub model: Model,
    pub f: f64,
    pub t_max: usize,
    pub n_traj: usize,
    pub seed: u64,
}

/// Largest exact-vs-analytic variance gap and the largest trajectory
/// deviation from exact in units of its standard error, over `t ≤ t_max`.
pub fn compare_engines(spec: &CompareSpec) -> Result<Vec<CheckLine>> {
    let mut config = ExperimentConfig::new(Experiment::VarianceVsT, spec.model, vec![spec.f], spec.t_max);
    config.engine = Some(Engine::Exact);
    config.validate()?;
    let exact = variance_series(&config, spec.f)?;
    config.engine = Some(Engine::Analytic);
    let analytic = variance_series(&config, spec.f)?;
    let walk = WalkConfig::new(spec.model, spec.f, spec.t_max).with_coin(config.coin);
    let traj = trajectory_run(&walk, spec.n_traj, spec.seed, &TrajectoryOptions::default())?;

    let gap = exact
        .iter()
        .zip(&analytic)
        .map(|(e, a)| (e.var_x - a.var_x).abs().max((e.var_y - a.var_y).abs()))
        .fold(0.0, f64::max);
    let worst_z = exact
        .iter()
        .zip(&traj.series)
        .map(|(e, t)| {
            standard_score(t.report.var_x, e.var_x, t.se_var_x).max(standard_score(t.report.var_y, e.var_y, t.se_var_y))
        })
        .fold(0.0, f64::max);
    let tag = format!("{} f={} t<={}", spec.model, spec.f, spec.t_max);
    Ok(vec![
        CheckLine::below(format!("analytic vs exact variance {tag}"), gap, 1e-6),
        CheckLine::below(format!("trajectory vs exact variance [SE] {tag}"), worst_z, 3.0),
    ])
}
