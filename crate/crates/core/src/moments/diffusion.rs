use nalgebra::{Matrix3, RowVector3, Vector3};
use num_complex::Complex64;

use super::quadrature::BzGrid;
use super::superops::{build_superops, BlochSuperoperatorSet, SuperopValues};
use crate::error::{Error, Result};
use crate::model::Model;

type C = Complex64;

/// Refinement stops here; a result that still moves is called divergent.
const MAX_GRID: usize = 1024;
/// Relative change allowed between a grid and its doubling.
const DOUBLING_TOL: f64 = 1e-3;
/// Node-wise integrand magnitude taken as a sign of a non-integrable singularity.
const BLOWUP: f64 = 1e6;
const MAX_COND: f64 = 1e12;

/// Long-time diffusion coefficients, `σ²(t) ≈ 2 D t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionReport {
    pub f: f64,
    pub d_x: f64,
    pub d_y: f64,
    /// `B = 2 f D / (1 - f)`, so that `D = (1 - f) B / (2 f)`.
    pub b_x: f64,
    pub b_y: f64,
    pub divergent_x: bool,
    pub divergent_y: bool,
    /// Finest grid used per axis.
    pub grid_n: usize,
}

/// Per-step growth of `⟨x²⟩` and `⟨y²⟩` at one node once the coin has relaxed:
/// `2 Re[K_{0,·} (I - M)⁻¹ K†_{·,0}] + (T_k)_{00}` and the `P`, `T_p` analogue.
pub fn diffusion_integrand(set: &BlochSuperoperatorSet, k: f64, p: f64) -> Result<[f64; 2]> {
    let s = set.eval(k, p);
    check_structure(&s)?;
    let a = Matrix3::identity() - s.m();
    let sv = a.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= MAX_COND) {
        return Err(Error::SingularResolvent { k, p, cond });
    }
    let lu = a.lu();
    let term = |d: &nalgebra::Matrix4<C>, d_dag: &nalgebra::Matrix4<C>, t: C| -> f64 {
        let row = RowVector3::new(d[(0, 1)], d[(0, 2)], d[(0, 3)]);
        let col = Vector3::new(d_dag[(1, 0)], d_dag[(2, 0)], d_dag[(3, 0)]);
        let z = lu.solve(&col).expect("conditioning checked above");
        2.0 * (row * z)[0].re + t.re
    };
    Ok([term(&s.k, &s.k_dag, s.t_k[(0, 0)]), term(&s.p, &s.p_dag, s.t_p[(0, 0)])])
}

/// The resolvent form needs `K_{00} = 0` and `L = 1 ⊕ M`.
fn check_structure(s: &SuperopValues) -> Result<()> {
    let off = (1..4)
        .map(|i| s.l[(0, i)].norm().max(s.l[(i, 0)].norm()))
        .fold(s.k[(0, 0)].norm().max(s.p[(0, 0)].norm()), f64::max);
    if off > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "superoperators do not decouple r0 (off-block entry {off:e})"
        )));
    }
    Ok(())
}

fn averages(set: &BlochSuperoperatorSet, n: usize) -> Result<[f64; 2]> {
    let v = BzGrid::new(n)?.average_vec(2, |k, p| Ok(diffusion_integrand(set, k, p)?.to_vec()))?;
    Ok([v[0], v[1]])
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= DOUBLING_TOL * b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
}

/// `D_x`, `D_y` from the resolvent integrand, refined by grid doubling.
///
/// Starting at `grid_n`, the grid doubles until two successive values agree
/// to 0.1% (up to 1024 nodes per axis). A coefficient that never settles, or
/// whose integrand exceeds 1e6 at a node, is reported as divergent with
/// `D = B = +∞`.
pub fn long_time_diffusion(model: Model, f: f64, grid_n: usize) -> Result<DiffusionReport> {
    if model == Model::None {
        return Err(Error::InvalidParameter("the coherent walk spreads ballistically; no diffusion coefficient".into()));
    }
    let set = build_superops(model, f)?;
    if f == 0.0 {
        return Err(Error::InvalidParameter("long-time diffusion needs f > 0; use finite-time moments at f = 0".into()));
    }
    if grid_n < 32 {
        return Err(Error::InvalidParameter(format!("grid_n must be at least 32 (got {grid_n})")));
    }
    let grid = BzGrid::new(grid_n)?;
    let peak = |axis: usize| grid.max_abs(|k, p| diffusion_integrand(&set, k, p).map_or(f64::INFINITY, |v| v[axis]));
    let blown = [peak(0) > BLOWUP, peak(1) > BLOWUP];

    let mut n = grid_n;
    let mut prev = averages(&set, n)?;
    let mut settled = [false; 2];
    while n < MAX_GRID && !(settled[0] && settled[1]) {
        n *= 2;
        let next = averages(&set, n)?;
        for axis in 0..2 {
            settled[axis] = close(next[axis], prev[axis]);
        }
        prev = next;
    }
    let divergent = [blown[0] || !settled[0], blown[1] || !settled[1]];
    let d = |axis: usize| if divergent[axis] { f64::INFINITY } else { 0.5 * prev[axis] };
    let b = |dv: f64| if f == 1.0 { f64::INFINITY } else { 2.0 * f * dv / (1.0 - f) };
    let (d_x, d_y) = (d(0), d(1));
    Ok(DiffusionReport {
        f,
        d_x,
        d_y,
        b_x: b(d_x),
        b_y: b(d_y),
        divergent_x: divergent[0],
        divergent_y: divergent[1],
        grid_n: n,
    })
}
