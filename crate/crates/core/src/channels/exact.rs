use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::family::{build_family, KrausFamily};
use super::symbol::{Mat2, SignConvention, Stencil};
use crate::density::{lattice_subsystems, DensityOperator};
use crate::error::{Error, Result};
use crate::walk::{position_distribution, step_coherent, Coin, Lattice, PositionDistribution, PureLatticeState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const NONE: u32 = u32::MAX;

/// Position-space stencils of the operators with non-zero probability.
pub fn family_stencils(family: &KrausFamily) -> Vec<Stencil> {
    family.active().map(|o| o.symbol.stencil(SignConvention::Forward)).collect()
}

fn stencils_reach(stencils: &[Stencil]) -> usize {
    stencils.iter().map(Stencil::reach).max().unwrap_or(0)
}

/// For every output site, the input site a term pulls from.
fn source_map(shift: (i64, i64), from: Lattice, to: Lattice) -> Vec<u32> {
    (0..to.sites())
        .map(|s| {
            let (x, y) = to.coords(s);
            let (sx, sy) = (x - shift.0, y - shift.1);
            if from.contains(sx, sy) {
                from.site(sx, sy) as u32
            } else {
                NONE
            }
        })
        .collect()
}

/// `Σ_n E_n ρ E_n†` with `ρ` on `from` and the result on `to`.
/// Terms that would land outside `to` are dropped; callers check room first.
fn channel_kernel(rho: &[Complex64], from: Lattice, to: Lattice, stencils: &[Stencil]) -> Vec<Complex64> {
    let (nin, nout) = (from.dim(), to.dim());
    let mut y = vec![ZERO; nout * nout];
    let mut x = vec![ZERO; nout * nin];
    for stencil in stencils {
        let plan: Vec<(Mat2, Vec<u32>)> =
            stencil.terms.iter().map(|&(d, a)| (a, source_map(d, from, to))).collect();

        // X = E ρ, gathered row by row.
        x.par_chunks_mut(nin).enumerate().for_each(|(r, xrow)| {
            xrow.fill(ZERO);
            let (s_out, c) = (r / 2, r % 2);
            for (a, src) in &plan {
                let s = src[s_out];
                if s == NONE {
                    continue;
                }
                for cp in 0..2 {
                    let coef = a[(c, cp)];
                    if coef == ZERO {
                        continue;
                    }
                    let base = (2 * s as usize + cp) * nin;
                    for (xv, &rv) in xrow.iter_mut().zip(&rho[base..base + nin]) {
                        *xv += coef * rv;
                    }
                }
            }
        });

        // Y += X E†, one row of X at a time.
        y.par_chunks_mut(nout).zip(x.par_chunks(nin)).for_each(|(yrow, xrow)| {
            if xrow.iter().all(|v| *v == ZERO) {
                return;
            }
            for (a, src) in &plan {
                let ac = a.map(|z| z.conj());
                for (sb, &s) in src.iter().enumerate() {
                    if s == NONE {
                        continue;
                    }
                    let (x0, x1) = (xrow[2 * s as usize], xrow[2 * s as usize + 1]);
                    yrow[2 * sb] += x0 * ac[(0, 0)] + x1 * ac[(0, 1)];
                    yrow[2 * sb + 1] += x0 * ac[(1, 0)] + x1 * ac[(1, 1)];
                }
            }
        });
    }
    y
}

/// Half-width of the support of a lattice operator.
fn support_extent(rho: &DensityOperator, lattice: Lattice) -> usize {
    let dim = rho.dim();
    let mut extent = 0;
    for (i, row) in rho.data().chunks_exact(dim).enumerate() {
        let (x, y) = lattice.coords(i / 2);
        let e = x.unsigned_abs().max(y.unsigned_abs()) as usize;
        if e > extent && row.iter().any(|v| *v != ZERO) {
            extent = e;
        }
    }
    extent
}

/// One channel step on a fixed window. Fails if the support would leave it.
pub fn apply_channel_exact(rho: &DensityOperator, family: &KrausFamily) -> Result<DensityOperator> {
    let lattice = rho.lattice()?;
    let stencils = family_stencils(family);
    let needed = support_extent(rho, lattice) + stencils_reach(&stencils);
    if needed > lattice.window() {
        return Err(Error::WindowOverflow { needed, window: lattice.window() });
    }
    let data = channel_kernel(rho.data(), lattice, lattice, &stencils);
    DensityOperator::new(lattice_subsystems(lattice.window()), data)
}

/// One channel step onto a window enlarged by the family's reach.
pub fn apply_channel_grow(rho: &DensityOperator, family: &KrausFamily) -> Result<DensityOperator> {
    let from = rho.lattice()?;
    let stencils = family_stencils(family);
    let to = Lattice::new(from.window() + stencils_reach(&stencils));
    let data = channel_kernel(rho.data(), from, to, &stencils);
    DensityOperator::new(lattice_subsystems(to.window()), data)
}

/// Density-matrix evolution from a localized start; the window tracks `t`.
#[derive(Clone, Debug)]
pub struct ExactEvolution {
    stencils: Vec<Stencil>,
    rho: DensityOperator,
    t: usize,
}

impl ExactEvolution {
    pub fn new(family: &KrausFamily, coin: Coin) -> Self {
        let psi = PureLatticeState::origin(0, coin);
        Self { stencils: family_stencils(family), rho: DensityOperator::from_lattice_state(&psi), t: 0 }
    }

    pub fn step(&mut self) -> Result<()> {
        let from = self.rho.lattice()?;
        let to = Lattice::new(from.window() + stencils_reach(&self.stencils));
        let data = channel_kernel(self.rho.data(), from, to, &self.stencils);
        self.rho = DensityOperator::new(lattice_subsystems(to.window()), data)?;
        self.t += 1;
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn into_rho(self) -> DensityOperator {
        self.rho
    }

    pub fn position_distribution(&self) -> PositionDistribution {
        position_distribution(&self.rho).expect("evolution keeps a full lattice operator")
    }
}

/// `E ψ` for one stencil, on the same window.
pub fn apply_stencil(state: &PureLatticeState, stencil: &Stencil) -> Result<PureLatticeState> {
    let mut out = vec![ZERO; state.amps().len()];
    let extent = apply_stencil_into(state, stencil, &mut out)?;
    Ok(PureLatticeState::from_parts(state.lattice(), out, state.step_count() + 1, extent))
}

/// Writes `E ψ` into `out` and returns the new support extent.
pub(crate) fn apply_stencil_into(
    state: &PureLatticeState,
    stencil: &Stencil,
    out: &mut [Complex64],
) -> Result<usize> {
    let lattice = state.lattice();
    let extent = state.extent() + stencil.reach();
    if extent > lattice.window() {
        return Err(Error::WindowOverflow { needed: extent, window: lattice.window() });
    }
    out.fill(ZERO);
    let e = state.extent() as i64;
    let amps = state.amps();
    for x in -e..=e {
        for y in -e..=e {
            let i = lattice.index(x, y, 0);
            let (r, l) = (amps[i], amps[i + 1]);
            if r == ZERO && l == ZERO {
                continue;
            }
            for &((dx, dy), a) in &stencil.terms {
                let o = lattice.index(x + dx, y + dy, 0);
                out[o] += a[(0, 0)] * r + a[(0, 1)] * l;
                out[o + 1] += a[(1, 0)] * r + a[(1, 1)] * l;
            }
        }
    }
    Ok(extent)
}

/// Largest deviation between the `f = 0` member of `family`'s model, applied
/// through its stencil under `convention`, and the coherent step, over 50
/// seeded random states.
pub fn stencil_consistency(family: &KrausFamily, convention: SignConvention) -> Result<f64> {
    let coherent = build_family(family.model, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5354_454e);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut psi = PureLatticeState::from_fn(5, 4, |_, _, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })?;
        psi.normalize();
        let want = step_coherent(&psi)?;
        let mut got = vec![ZERO; psi.amps().len()];
        for op in coherent.active() {
            let mut part = vec![ZERO; psi.amps().len()];
            apply_stencil_into(&psi, &op.symbol.stencil(convention), &mut part)?;
            got.iter_mut().zip(&part).for_each(|(g, p)| *g += p);
        }
        let got = PureLatticeState::from_parts(psi.lattice(), got, 1, 5);
        worst = worst.max(got.max_abs_diff(&want));
    }
    Ok(worst)
}
