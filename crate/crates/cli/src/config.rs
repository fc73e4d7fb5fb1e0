use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use aqw_core::{Coin, Model};
use num_complex::Complex64;
use thiserror::Error;

/// Largest `t_max` the exact channel accepts.
pub const EXACT_T_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for \"{key}\": {message}")]
    Invalid { key: &'static str, message: String },
}

impl ConfigError {
    /// The key or line the error points at.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            ConfigError::Parse { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Distribution,
    VarianceVsT,
    DiffusionVsF,
    CorrelationsVsT,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Distribution => "distribution",
            Experiment::VarianceVsT => "variance_vs_t",
            Experiment::DiffusionVsF => "diffusion_vs_f",
            Experiment::CorrelationsVsT => "correlations_vs_t",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "distribution" => Experiment::Distribution,
            "variance_vs_t" => Experiment::VarianceVsT,
            "diffusion_vs_f" => Experiment::DiffusionVsF,
            "correlations_vs_t" => Experiment::CorrelationsVsT,
            _ => {
                return Err(format!(
                    "unknown experiment {s:?} (expected distribution, variance_vs_t, diffusion_vs_f or correlations_vs_t)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Exact,
    Trajectory,
    Analytic,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Trajectory => "trajectory",
            Engine::Analytic => "analytic",
        }
    }

    /// Exact for `t_max ≤ 20`, trajectories beyond.
    pub fn auto(t_max: usize) -> Self {
        if t_max <= EXACT_T_MAX {
            Engine::Exact
        } else {
            Engine::Trajectory
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "exact" => Engine::Exact,
            "trajectory" => Engine::Trajectory,
            "analytic" => Engine::Analytic,
            _ => return Err(format!("unknown engine {s:?} (expected exact, trajectory, analytic or auto)")),
        })
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn parse_model(s: &str) -> Result<Model, String> {
    s.parse::<Model>().map_err(|e| e.to_string())
}

/// Engine choice as written; `None` means automatic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: Model,
    pub f_values: Vec<f64>,
    pub t_max: usize,
    pub n_traj: usize,
    pub engine: Option<Engine>,
    pub seed: u64,
    /// Quadrature nodes per axis; `None` picks a size from `t_max` for
    /// finite-time moments and 64 for diffusion coefficients.
    pub grid_n: Option<usize>,
    pub coin: Coin,
    pub output_path: PathBuf,
}

pub const DEFAULT_N_TRAJ: usize = 5000;
pub const DEFAULT_DIFFUSION_GRID: usize = 64;

impl ExperimentConfig {
    pub fn new(experiment: Experiment, model: Model, f_values: Vec<f64>, t_max: usize) -> Self {
        Self {
            experiment,
            model,
            f_values,
            t_max,
            n_traj: DEFAULT_N_TRAJ,
            engine: None,
            seed: 0,
            grid_n: None,
            coin: Coin::symmetric(),
            output_path: PathBuf::from("out"),
        }
    }

    pub fn resolved_engine(&self) -> Engine {
        if self.experiment == Experiment::DiffusionVsF {
            return Engine::Analytic;
        }
        self.engine.unwrap_or_else(|| Engine::auto(self.t_max))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key, message: String| Err(ConfigError::Invalid { key, message });
        if self.f_values.is_empty() {
            return invalid("f", "at least one value is required".into());
        }
        if let Some(&f) = self.f_values.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return invalid("f", format!("{f} is outside [0, 1]"));
        }
        if self.experiment != Experiment::DiffusionVsF && self.t_max == 0 {
            return invalid("t_max", "must be at least 1".into());
        }
        let engine = self.resolved_engine();
        if engine == Engine::Exact && self.t_max > EXACT_T_MAX {
            return invalid(
                "t_max",
                format!("{} exceeds {EXACT_T_MAX}, the limit of the exact engine; use engine = trajectory or analytic", self.t_max),
            );
        }
        if engine == Engine::Trajectory && self.n_traj == 0 {
            return invalid("n_traj", "must be at least 1 for the trajectory engine".into());
        }
        match (self.experiment, self.engine) {
            (Experiment::Distribution | Experiment::CorrelationsVsT, Some(Engine::Analytic)) => {
                return invalid("engine", format!("the analytic engine gives moments only, not {}", self.experiment.as_str()));
            }
            (Experiment::DiffusionVsF, Some(e)) if e != Engine::Analytic => {
                return invalid("engine", "diffusion coefficients come from the analytic engine only".into());
            }
            _ => {}
        }
        if self.experiment == Experiment::DiffusionVsF {
            if self.model == Model::None {
                return invalid("model", "diffusion coefficients need a decoherence model".into());
            }
            if self.f_values.contains(&0.0) {
                return invalid("f", "diffusion coefficients need f > 0".into());
            }
        }
        if let Some(n) = self.grid_n {
            let min = if self.experiment == Experiment::DiffusionVsF { 32 } else { 8 };
            if n < min || n % 2 == 1 {
                return invalid("grid_n", format!("{n} must be even and at least {min}"));
            }
        }
        if !self.coin.is_normalized() {
            return invalid("coin", "amplitudes are not normalized".into());
        }
        Ok(())
    }

    /// Flat `key = value` rendering that parses back to the same config.
    pub fn to_text(&self) -> String {
        let f: Vec<String> = self.f_values.iter().map(|f| format!("{f}")).collect();
        let mut out = String::new();
        out += &format!("experiment = {}\n", self.experiment.as_str());
        out += &format!("model = {}\n", self.model.as_str());
        out += &format!("f = {}\n", f.join(", "));
        out += &format!("t_max = {}\n", self.t_max);
        out += &format!("n_traj = {}\n", self.n_traj);
        out += &format!("engine = {}\n", self.engine.map_or("auto", Engine::as_str));
        out += &format!("seed = {}\n", self.seed);
        out += &format!("grid_n = {}\n", self.grid_n.map_or("auto".to_string(), |n| n.to_string()));
        out += &format!("coin = {}, {}\n", complex_text(self.coin.a_r), complex_text(self.coin.a_l));
        out += &format!("output = {}\n", self.output_path.display());
        out
    }
}

fn complex_text(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`; `i` alone is the imaginary unit.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read {s:?} as a complex number");
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn parse_coin(value: &str) -> Result<Coin, String> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two amplitudes \"a_R, a_L\"".into());
    }
    let (a, b) = (parse_complex(parts[0])?, parse_complex(parts[1])?);
    Coin::normalized(a, b).map_err(|e| e.to_string())
}

fn parse_f_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("cannot read {:?} as a number", v.trim())))
        .collect()
}

const KEYS: [&str; 10] = ["experiment", "model", "f", "t_max", "n_traj", "engine", "seed", "grid_n", "coin", "output"];

/// Parses a flat `key = value` document. `#` starts a comment.
///
/// `experiment`, `model`, `f` and `t_max` are required (`t_max` may be
/// omitted for `diffusion_vs_f`). The coin amplitudes are normalized.
pub fn parse_config(source: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut seen: Vec<(&'static str, usize, String)> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let Some((key, value)) = text.split_once('=') else {
            return Err(ConfigError::Parse { line, message: format!("expected \"key = value\", found {text:?}") });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::Parse { line, message: format!("unknown key \"{key}\"") });
        };
        if seen.iter().any(|(k, _, _)| *k == known) {
            return Err(ConfigError::Parse { line, message: format!("duplicate key \"{key}\"") });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse { line, message: format!("missing value for \"{key}\"") });
        }
        seen.push((known, line, value.to_string()));
    }

    let get = |key: &str| seen.iter().find(|(k, _, _)| *k == key).map(|(_, l, v)| (*l, v.as_str()));
    let at = |line: usize| move |message: String| ConfigError::Parse { line, message };
    let required = |key: &'static str| {
        get(key).ok_or(ConfigError::Invalid { key, message: "missing required key".into() })
    };

    let (l, v) = required("experiment")?;
    let experiment: Experiment = v.parse().map_err(at(l))?;
    let (l, v) = required("model")?;
    let model = parse_model(v).map_err(at(l))?;
    let (l, v) = required("f")?;
    let f_values = parse_f_list(v).map_err(at(l))?;
    let t_max = match get("t_max") {
        Some((l, v)) => v.parse::<usize>().map_err(|_| at(l)(format!("t_max must be a non-negative integer, found {v:?}")))?,
        None if experiment == Experiment::DiffusionVsF => 0,
        None => return Err(ConfigError::Invalid { key: "t_max", message: "missing required key".into() }),
    };

    let mut config = ExperimentConfig::new(experiment, model, f_values, t_max);
    if let Some((l, v)) = get("n_traj") {
        config.n_traj = v.parse().map_err(|_| at(l)(format!("n_traj must be a non-negative integer, found {v:?}")))?;
    }
    if let Some((l, v)) = get("engine") {
        config.engine = if v == "auto" { None } else { Some(v.parse().map_err(at(l))?) };
    }
    if let Some((l, v)) = get("seed") {
        config.seed = v.parse().map_err(|_| at(l)(format!("seed must be a non-negative integer, found {v:?}")))?;
    }
    if let Some((l, v)) = get("grid_n") {
        config.grid_n = if v == "auto" {
            None
        } else {
            Some(v.parse().map_err(|_| at(l)(format!("grid_n must be an integer or auto, found {v:?}")))?)
        };
    }
    if let Some((l, v)) = get("coin") {
        config.coin = parse_coin(v).map_err(at(l))?;
    }
    if let Some((_, v)) = get("output") {
        config.output_path = PathBuf::from(v);
    }
    config.validate()?;
    Ok(config)
}
