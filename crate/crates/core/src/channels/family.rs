use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::symbol::{mat, Mat2, MomentumSymbol};
use crate::error::{check_probability, Result};
use crate::model::Model;

/// One Kraus operator `E_n = √f_n W_n` in momentum form, prefactor folded in.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOperator {
    pub symbol: MomentumSymbol,
    /// Scenario probability `f_n`.
    pub weight: f64,
    pub scenario: &'static str,
}

/// A decoherence model at strength `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausFamily {
    pub model: Model,
    pub f: f64,
    pub operators: Vec<KrausOperator>,
}

/// Coherent step `S_y H S_x H`.
pub fn coherent_symbol() -> MomentumSymbol {
    MomentumSymbol::from_terms([
        ((-1, -1), mat(0.5, 0.5, 0.0, 0.0)),
        ((1, -1), mat(0.5, -0.5, 0.0, 0.0)),
        ((-1, 1), mat(0.0, 0.0, 0.5, 0.5)),
        ((1, 1), mat(0.0, 0.0, -0.5, 0.5)),
    ])
}

/// Left link cut: the would-be `x + 1` hop of `L` stays put.
fn left_broken_symbol() -> MomentumSymbol {
    MomentumSymbol::from_terms([
        ((-1, -1), mat(0.5, 0.5, 0.0, 0.0)),
        ((0, -1), mat(0.5, -0.5, 0.0, 0.0)),
        ((-1, 1), mat(0.0, 0.0, 0.5, 0.5)),
        ((0, 1), mat(0.0, 0.0, 0.5, -0.5)),
    ])
}

/// Right link cut: the would-be `x - 1` hop of `R` stays put.
fn right_broken_symbol() -> MomentumSymbol {
    MomentumSymbol::from_terms([
        ((0, -1), mat(0.5, 0.5, 0.0, 0.0)),
        ((1, -1), mat(-0.5, 0.5, 0.0, 0.0)),
        ((0, 1), mat(0.0, 0.0, -0.5, -0.5)),
        ((1, 1), mat(0.0, 0.0, 0.5, -0.5)),
    ])
}

/// Both links cut: x is frozen, only the y-shift acts (with a phase flip on L).
fn trapped_symbol() -> MomentumSymbol {
    MomentumSymbol::from_terms([
        ((0, -1), mat(1.0, 0.0, 0.0, 0.0)),
        ((0, 1), mat(0.0, 0.0, 0.0, -1.0)),
    ])
}

fn project_column(s: &MomentumSymbol, col: usize) -> MomentumSymbol {
    let keep = if col == 0 { mat(1.0, 0.0, 0.0, 0.0) } else { mat(0.0, 0.0, 0.0, 1.0) };
    MomentumSymbol::from_terms(s.terms().map(|(l, m)| (l, m * keep)))
}

fn op(symbol: MomentumSymbol, weight: f64, scenario: &'static str) -> KrausOperator {
    KrausOperator { symbol: symbol.scaled(weight.sqrt()), weight, scenario }
}

/// Builds the Kraus family of `model` at strength `f`.
///
/// Broken line: scenarios with probabilities `(1-f)², f(1-f), f(1-f), f²`.
/// Coin measurement: `f` (measured R), `f` (measured L), `1 - f` (untouched).
pub fn build_family(model: Model, f: f64) -> Result<KrausFamily> {
    check_probability(f)?;
    let operators = match model {
        Model::None => vec![op(coherent_symbol(), 1.0, "coherent")],
        Model::BrokenLine => {
            let g = 1.0 - f;
            vec![
                op(coherent_symbol(), g * g, "intact"),
                op(left_broken_symbol(), f * g, "left link broken"),
                op(right_broken_symbol(), f * g, "right link broken"),
                op(trapped_symbol(), f * f, "both links broken"),
            ]
        }
        Model::CoinMeasure => {
            let u = coherent_symbol();
            vec![
                op(project_column(&u, 0), f, "coin measured R"),
                op(project_column(&u, 1), f, "coin measured L"),
                op(u, 1.0 - f, "no measurement"),
            ]
        }
    };
    Ok(KrausFamily { model, f, operators })
}

impl KrausFamily {
    /// Operators with non-zero scenario probability.
    pub fn active(&self) -> impl Iterator<Item = &KrausOperator> {
        self.operators.iter().filter(|o| o.weight > 0.0)
    }

    pub fn eval(&self, k: f64, p: f64) -> Vec<Mat2> {
        self.operators.iter().map(|o| o.symbol.eval(k, p)).collect()
    }

    /// `max_ij |(Σ F†F - I)_ij|` at one point.
    pub fn completeness_at(&self, k: f64, p: f64) -> f64 {
        let sum = self
            .operators
            .iter()
            .map(|o| {
                let m = o.symbol.eval(k, p);
                m.adjoint() * m
            })
            .fold(Mat2::zeros(), |a, b| a + b);
        (sum - Mat2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn reach(&self) -> usize {
        self.active().map(|o| o.symbol.reach()).max().unwrap_or(0)
    }
}

/// Max completeness deviation over `samples` pseudo-random `(k, p)`.
pub fn completeness_check(family: &KrausFamily, samples: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b72_6175_73);
    (0..samples.max(1))
        .map(|_| {
            let k = rng.random_range(-PI..PI);
            let p = rng.random_range(-PI..PI);
            family.completeness_at(k, p)
        })
        .fold(0.0, f64::max)
}
