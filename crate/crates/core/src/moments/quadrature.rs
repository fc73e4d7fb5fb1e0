use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use crate::error::{Error, Result};

const LEAF: usize = 8;

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn pairwise_sum_vecs(xs: &[Vec<f64>]) -> Vec<f64> {
    if xs.len() <= LEAF {
        let mut acc = xs[0].clone();
        for v in &xs[1..] {
            acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
        acc
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        let mut left = pairwise_sum_vecs(a);
        left.iter_mut().zip(pairwise_sum_vecs(b)).for_each(|(x, y)| *x += y);
        left
    }
}

/// Tensor-product Gauss–Legendre rule on `[-π, π]²` whose weights sum to 1,
/// so sums over it are Brillouin-zone averages `∬ dk dp / (2π)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct BzGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl BzGrid {
    /// `n` nodes per axis; `n` must be even so that no node sits at zero.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!("grid_n must be even and at least 2 (got {n})")));
        }
        let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 2"));
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            nodes: pairs.iter().map(|&(x, _)| PI * x).collect(),
            weights: pairs.iter().map(|&(_, w)| 0.5 * w).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Averages a vector-valued integrand of length `len`. Rows of the grid
    /// run in parallel; the reduction order is fixed.
    pub fn average_vec<F>(&self, len: usize, integrand: F) -> Result<Vec<f64>>
    where
        F: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
    {
        let rows: Vec<Vec<f64>> = self
            .nodes
            .par_iter()
            .zip(&self.weights)
            .map(|(&k, &wk)| {
                let cells = self
                    .nodes
                    .iter()
                    .zip(&self.weights)
                    .map(|(&p, &wp)| {
                        let mut v = integrand(k, p)?;
                        if v.len() != len {
                            return Err(Error::DimensionMismatch(format!(
                                "integrand returned {} values, expected {len}",
                                v.len()
                            )));
                        }
                        if v.iter().any(|x| !x.is_finite()) {
                            return Err(Error::NonFinite { k, p });
                        }
                        v.iter_mut().for_each(|x| *x *= wk * wp);
                        Ok(v)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(pairwise_sum_vecs(&cells))
            })
            .collect::<Result<_>>()?;
        Ok(pairwise_sum_vecs(&rows))
    }

    pub fn average<F>(&self, integrand: F) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        Ok(self.average_vec(1, |k, p| Ok(vec![integrand(k, p)]))?[0])
    }

    /// Largest `|integrand|` over the nodes.
    pub fn max_abs<F>(&self, integrand: F) -> f64
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        self.nodes
            .par_iter()
            .map(|&k| self.nodes.iter().map(|&p| integrand(k, p).abs()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

/// `∬ integrand dk dp / (2π)²` over the Brillouin zone.
pub fn integrate_bz<F>(integrand: F, grid_n: usize) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    BzGrid::new(grid_n)?.average(integrand)
}

/// Grid size that resolves the finite-time integrands up to step `t`.
///
/// After `t` steps the integrand is a trigonometric polynomial whose highest
/// harmonic is `2(t + 1)`; Gauss–Legendre on `[-π, π]` needs roughly `π/2`
/// nodes per unit of frequency, plus a margin.
pub fn recommended_grid(t: usize) -> usize {
    let n = ((PI * (t as f64 + 1.0)).ceil() as usize + 32).max(64);
    n + n % 2
}
