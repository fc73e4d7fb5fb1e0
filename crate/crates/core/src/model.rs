use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Decoherence model acting on the x-substep of every walk step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    /// Coherent walk; `f` is ignored.
    None,
    /// Links between neighbouring x-sites are cut independently with probability `f`.
    BrokenLine,
    /// The coin is projectively measured in the R/L basis with probability `f` before each step.
    CoinMeasure,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::None, Model::BrokenLine, Model::CoinMeasure];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::None => "none",
            Model::BrokenLine => "broken_line",
            Model::CoinMeasure => "coin_measure",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" | "coherent" => Ok(Model::None),
            "broken_line" => Ok(Model::BrokenLine),
            "coin_measure" => Ok(Model::CoinMeasure),
            other => Err(Error::InvalidParameter(format!(
                "unknown model '{other}' (expected none, broken_line or coin_measure)"
            ))),
        }
    }
}
