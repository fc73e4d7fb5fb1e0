use std::path::Path;
use std::str::FromStr;

use anyhow::Result;
use aqw_core::Model;

use crate::config::{Engine, Experiment, ExperimentConfig};
use crate::experiment::run_experiment_in;

/// Figure reproductions with the parameters of the figure captions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig2, Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
        }
    }

    pub fn configs(self) -> Vec<ExperimentConfig> {
        let trend = [0.0, 0.1, 0.5, 1.0];
        match self {
            Preset::Fig2 => moments_and_diffusion(Model::BrokenLine),
            Preset::Fig4 => moments_and_diffusion(Model::CoinMeasure),
            Preset::Fig5 => [Model::BrokenLine, Model::CoinMeasure]
                .map(|m| ExperimentConfig::new(Experiment::Distribution, m, vec![0.0, 0.5, 1.0], 20))
                .to_vec(),
            Preset::Fig6 => [Model::BrokenLine, Model::CoinMeasure]
                .map(|m| ExperimentConfig::new(Experiment::CorrelationsVsT, m, trend.to_vec(), 15))
                .to_vec(),
            Preset::Fig7 => [Model::BrokenLine, Model::CoinMeasure]
                .map(|m| ExperimentConfig::new(Experiment::CorrelationsVsT, m, vec![0.0, 0.1, 0.5], 15))
                .to_vec(),
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset {s:?} (expected fig2, fig4, fig5, fig6 or fig7)"))
    }
}

/// Diffusion curve on `f = 0.05, 0.10, …, 0.95, 0.99, 1` and analytic
/// variances for `f ∈ {0, 0.1, 0.5, 1}` up to `t = 100`.
fn moments_and_diffusion(model: Model) -> Vec<ExperimentConfig> {
    let mut fs: Vec<f64> = (1..=19).map(|i| i as f64 * 5.0 / 100.0).collect();
    fs.extend([0.99, 1.0]);
    let diffusion = ExperimentConfig::new(Experiment::DiffusionVsF, model, fs, 0);
    let mut variance = ExperimentConfig::new(Experiment::VarianceVsT, model, vec![0.0, 0.1, 0.5, 1.0], 100);
    variance.engine = Some(Engine::Analytic);
    vec![diffusion, variance]
}

/// Command-line overrides shared by every config of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub engine: Option<Engine>,
}

impl Overrides {
    /// The engine override skips diffusion experiments, which have one engine.
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(engine) = self.engine {
            if config.experiment != Experiment::DiffusionVsF {
                config.engine = Some(engine);
            }
        }
    }
}

pub fn run_preset(preset: Preset, out: &Path, overrides: Overrides) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    for mut config in preset.configs() {
        overrides.apply(&mut config);
        config.output_path = out.to_path_buf();
        written.extend(run_experiment_in(&config, out)?);
    }
    Ok(written)
}
