use nalgebra::Vector4;
use num_complex::Complex64;

use super::bloch::BlochVector;
use super::quadrature::BzGrid;
use super::superops::{build_superops, Mat4};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::walk::MomentReport;

type C = Complex64;

#[inline]
fn row0(m: &Mat4, v: &Vector4<C>) -> C {
    m[(0, 0)] * v[0] + m[(0, 1)] * v[1] + m[(0, 2)] * v[2] + m[(0, 3)] * v[3]
}

/// Moments for `t = 0..=t_max` from the superoperator series.
///
/// At every quadrature node the first moments accumulate `Tr K L^{m-1} ρ0`
/// and the second moments the double sum `Tr K L^{m-m'-1} K† L^{m'-1} ρ0`
/// plus the `T_k` term. The inner sum obeys `y_{m+1} = L y_m + K† L^{m-1} ρ0`,
/// so each node costs `O(t_max)`.
pub fn moment_series(
    model: Model,
    f: f64,
    coin: &BlochVector,
    t_max: usize,
    grid_n: usize,
) -> Result<Vec<MomentReport>> {
    if grid_n < 8 {
        return Err(Error::InvalidParameter(format!("grid_n must be at least 8 (got {grid_n})")));
    }
    if !coin.is_state(1e-10) {
        return Err(Error::InvalidParameter("initial coin is not a normalized state".into()));
    }
    let set = build_superops(model, f)?;
    let grid = BzGrid::new(grid_n)?;
    let r = coin.0;
    let sums = grid.average_vec(4 * t_max, |k, p| {
        let s = set.eval(k, p);
        let zero = Vector4::zeros();
        let (mut v, mut yx, mut yy) = (r, zero, zero);
        let (mut ax, mut ay, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0);
        let mut out = Vec::with_capacity(4 * t_max);
        for _ in 0..t_max {
            ax += 2.0 * row0(&s.k, &v).im;
            ay += 2.0 * row0(&s.p, &v).im;
            bx += 4.0 * row0(&s.k, &yx).re + 2.0 * row0(&s.t_k, &v).re;
            by += 4.0 * row0(&s.p, &yy).re + 2.0 * row0(&s.t_p, &v).re;
            out.extend_from_slice(&[ax, ay, bx, by]);
            yx = s.l * yx + s.k_dag * v;
            yy = s.l * yy + s.p_dag * v;
            v = s.l * v;
        }
        Ok(out)
    })?;
    let mut reports = vec![MomentReport::from_raw(0, 0.0, 0.0, 0.0, 0.0)];
    reports.extend(
        sums.chunks_exact(4)
            .enumerate()
            .map(|(i, m)| MomentReport::from_raw(i + 1, m[0], m[1], m[2], m[3])),
    );
    Ok(reports)
}

/// Moments after `t` steps; see [`moment_series`].
pub fn finite_time_moments(
    model: Model,
    f: f64,
    coin: &BlochVector,
    t: usize,
    grid_n: usize,
) -> Result<MomentReport> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    Ok(moment_series(model, f, coin, t, grid_n)?.pop().expect("series has t + 1 entries"))
}
