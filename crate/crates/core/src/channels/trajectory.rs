use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::{apply_stencil_into, family_stencils};
use super::family::build_family;
use super::symbol::Stencil;
use crate::density::{lattice_subsystems, DensityOperator, Label, Subsystem};
use crate::error::{Error, Result};
use crate::walk::{Lattice, MomentReport, PositionDistribution, PureLatticeState, WalkConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Trajectories per work unit. Chunks are summed in index order, so the
/// result does not depend on how many threads run them.
const CHUNK: usize = 32;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryOptions {
    /// Accumulate the ensemble density operator at `t_max`.
    pub collect_rho: bool,
    /// Times at which reduced operators are accumulated.
    pub reduced_at: Vec<usize>,
    /// Also accumulate the walker-walker operator at those times.
    pub reduced_xy: bool,
}

/// Ensemble-averaged reduced operators at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedOperators {
    pub t: usize,
    pub p: PositionDistribution,
    pub xy: Option<DensityOperator>,
    pub xc: DensityOperator,
    pub yc: DensityOperator,
}

/// Sample moments with standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub report: MomentReport,
    pub se_mean_x: f64,
    pub se_mean_y: f64,
    pub se_var_x: f64,
    pub se_var_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEnsembleResult {
    pub n_traj: usize,
    pub seed: u64,
    /// Ensemble position distribution at `t_max`.
    pub p_hat: PositionDistribution,
    pub rho_hat: Option<DensityOperator>,
    pub reduced: Vec<ReducedOperators>,
    /// Moments for `t = 0..=t_max`.
    pub series: Vec<MomentEstimate>,
}

/// Raw moments `[⟨x⟩, ⟨y⟩, ⟨x²⟩, ⟨y²⟩]` of one pure state.
fn raw_moments(state: &PureLatticeState) -> [f64; 4] {
    let lattice = state.lattice();
    let e = state.extent() as i64;
    let mut m = [0.0; 4];
    for x in -e..=e {
        for y in -e..=e {
            let i = lattice.index(x, y, 0);
            let p = state.amps()[i].norm_sqr() + state.amps()[i + 1].norm_sqr();
            let (xf, yf) = (x as f64, y as f64);
            m[0] += p * xf;
            m[1] += p * yf;
            m[2] += p * xf * xf;
            m[3] += p * yf * yf;
        }
    }
    m
}

struct ReducedSums {
    probs: Vec<f64>,
    xy: Option<Vec<Complex64>>,
    xc: Vec<Complex64>,
    yc: Vec<Complex64>,
}

struct Accumulator {
    probs: Vec<f64>,
    rho: Option<Vec<Complex64>>,
    reduced: Vec<ReducedSums>,
    moments: Vec<Vec<[f64; 4]>>,
}

fn add_into(a: &mut [Complex64], b: &[Complex64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

impl Accumulator {
    fn new(lattice: Lattice, opts: &TrajectoryOptions) -> Self {
        let n = lattice.side();
        let dim = lattice.dim();
        Self {
            probs: vec![0.0; lattice.sites()],
            rho: opts.collect_rho.then(|| vec![ZERO; dim * dim]),
            reduced: opts
                .reduced_at
                .iter()
                .map(|_| ReducedSums {
                    probs: vec![0.0; lattice.sites()],
                    xy: opts.reduced_xy.then(|| vec![ZERO; n.pow(4)]),
                    xc: vec![ZERO; 4 * n * n],
                    yc: vec![ZERO; 4 * n * n],
                })
                .collect(),
            moments: Vec::new(),
        }
    }

    fn merge(&mut self, other: Accumulator) {
        self.probs.iter_mut().zip(&other.probs).for_each(|(a, b)| *a += b);
        if let (Some(a), Some(b)) = (self.rho.as_mut(), other.rho.as_ref()) {
            add_into(a, b);
        }
        for (a, b) in self.reduced.iter_mut().zip(&other.reduced) {
            a.probs.iter_mut().zip(&b.probs).for_each(|(x, y)| *x += y);
            if let (Some(x), Some(y)) = (a.xy.as_mut(), b.xy.as_ref()) {
                add_into(x, y);
            }
            add_into(&mut a.xc, &b.xc);
            add_into(&mut a.yc, &b.yc);
        }
        self.moments.extend(other.moments);
    }
}

/// Adds the walker-coin and walker-walker reductions of `|ψ⟩⟨ψ|`.
fn add_reduced(sums: &mut ReducedSums, state: &PureLatticeState) {
    let lattice = state.lattice();
    let n = lattice.side();
    let w = lattice.window() as i64;
    let e = state.extent() as i64;
    let amp = |x: i64, y: i64, c: usize| state.amps()[lattice.index(x, y, c)];
    let d = 2 * n;
    let ix = |v: i64| (v + w) as usize;
    for x in -e..=e {
        for y in -e..=e {
            sums.probs[ix(x) * n + ix(y)] += amp(x, y, 0).norm_sqr() + amp(x, y, 1).norm_sqr();
        }
    }
    for y in -e..=e {
        for x in -e..=e {
            for c in 0..2 {
                let a = amp(x, y, c);
                if a == ZERO {
                    continue;
                }
                let row = (ix(x) * 2 + c) * d;
                for xp in -e..=e {
                    for cp in 0..2 {
                        sums.xc[row + ix(xp) * 2 + cp] += a * amp(xp, y, cp).conj();
                    }
                }
            }
        }
    }
    for x in -e..=e {
        for y in -e..=e {
            for c in 0..2 {
                let a = amp(x, y, c);
                if a == ZERO {
                    continue;
                }
                let row = (ix(y) * 2 + c) * d;
                for yp in -e..=e {
                    for cp in 0..2 {
                        sums.yc[row + ix(yp) * 2 + cp] += a * amp(x, yp, cp).conj();
                    }
                }
            }
        }
    }
    if let Some(xy) = sums.xy.as_mut() {
        let nn = n * n;
        for c in 0..2 {
            for x in -e..=e {
                for y in -e..=e {
                    let a = amp(x, y, c);
                    if a == ZERO {
                        continue;
                    }
                    let row = (ix(x) * n + ix(y)) * nn;
                    for xp in -e..=e {
                        for yp in -e..=e {
                            xy[row + ix(xp) * n + ix(yp)] += a * amp(xp, yp, c).conj();
                        }
                    }
                }
            }
        }
    }
}

struct Runner<'a> {
    config: &'a WalkConfig,
    stencils: Vec<Stencil>,
    lattice: Lattice,
    seed: u64,
    opts: &'a TrajectoryOptions,
}

impl Runner<'_> {
    fn run_one(&self, index: usize, acc: &mut Accumulator) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let window = self.lattice.window();
        let mut state = PureLatticeState::origin(window, self.config.initial_coin);
        let mut branches = vec![vec![ZERO; self.lattice.dim()]; self.stencils.len()];
        let mut probs = vec![0.0; self.stencils.len()];
        let mut series = Vec::with_capacity(self.config.t_max + 1);
        series.push(raw_moments(&state));
        self.snapshot(0, &state, acc);
        for t in 1..=self.config.t_max {
            let mut extent = 0;
            for ((st, buf), p) in self.stencils.iter().zip(&mut branches).zip(&mut probs) {
                extent = extent.max(apply_stencil_into(&state, st, buf)?);
                *p = buf.iter().map(|a| a.norm_sqr()).sum();
            }
            let total: f64 = probs.iter().sum();
            let u = rng.random::<f64>() * total;
            let mut pick = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
            let mut run = 0.0;
            for (n, &p) in probs.iter().enumerate() {
                run += p;
                if p > 0.0 && u < run {
                    pick = n;
                    break;
                }
            }
            let mut amps = std::mem::take(&mut branches[pick]);
            let inv = 1.0 / probs[pick].sqrt();
            amps.iter_mut().for_each(|a| *a *= inv);
            let next = PureLatticeState::from_parts(self.lattice, amps, t, extent);
            branches[pick] = std::mem::replace(&mut state, next).into_amps();
            series.push(raw_moments(&state));
            self.snapshot(t, &state, acc);
        }
        let lattice = self.lattice;
        for (s, p) in acc.probs.iter_mut().enumerate() {
            let i = 2 * s;
            *p += state.amps()[i].norm_sqr() + state.amps()[i + 1].norm_sqr();
        }
        debug_assert_eq!(acc.probs.len(), lattice.sites());
        if let Some(rho) = acc.rho.as_mut() {
            let dim = lattice.dim();
            for (i, &a) in state.amps().iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (r, &b) in rho[i * dim..(i + 1) * dim].iter_mut().zip(state.amps()) {
                    *r += a * b.conj();
                }
            }
        }
        acc.moments.push(series);
        Ok(())
    }

    fn snapshot(&self, t: usize, state: &PureLatticeState, acc: &mut Accumulator) {
        for (k, _) in self.opts.reduced_at.iter().enumerate().filter(|(_, &s)| s == t) {
            add_reduced(&mut acc.reduced[k], state);
        }
    }

    fn run_chunk(&self, chunk: usize, n_traj: usize) -> Result<Accumulator> {
        let mut acc = Accumulator::new(self.lattice, self.opts);
        for index in chunk * CHUNK..((chunk + 1) * CHUNK).min(n_traj) {
            self.run_one(index, &mut acc)?;
        }
        Ok(acc)
    }
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (nf - 1.0) / nf).sqrt())
}

fn estimate(t: usize, moments: &[Vec<[f64; 4]>]) -> MomentEstimate {
    let n = moments.len();
    let col = |j: usize| moments.iter().map(move |m| m[t][j]);
    let (mx, se_mx) = mean_and_se(col(0), n);
    let (my, se_my) = mean_and_se(col(1), n);
    let (mx2, _) = mean_and_se(col(2), n);
    let (my2, _) = mean_and_se(col(3), n);
    // Delta method: var = E[a] - E[b]², influence a - 2 E[b] b.
    let (_, se_vx) = mean_and_se(moments.iter().map(|m| m[t][2] - 2.0 * mx * m[t][0]), n);
    let (_, se_vy) = mean_and_se(moments.iter().map(|m| m[t][3] - 2.0 * my * m[t][1]), n);
    MomentEstimate {
        report: MomentReport::from_raw(t, mx, my, mx2, my2),
        se_mean_x: se_mx,
        se_mean_y: se_my,
        se_var_x: se_vx,
        se_var_y: se_vy,
    }
}

fn reduced_operator(subsystems: Vec<Subsystem>, mut data: Vec<Complex64>, inv_n: f64) -> DensityOperator {
    data.iter_mut().for_each(|v| *v *= inv_n);
    DensityOperator::new(subsystems, data).expect("reduced dimensions are consistent")
}

/// Monte Carlo unravelling of the channel into `n_traj` pure-state trajectories.
pub fn trajectory_run(
    config: &WalkConfig,
    n_traj: usize,
    seed: u64,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryEnsembleResult> {
    if n_traj == 0 {
        return Err(Error::InvalidTrajectoryCount(n_traj));
    }
    config.validate()?;
    if let Some(&t) = opts.reduced_at.iter().find(|&&t| t > config.t_max) {
        return Err(Error::InvalidParameter(format!("reduced_at time {t} exceeds t_max {}", config.t_max)));
    }
    let family = build_family(config.model, config.f)?;
    let lattice = Lattice::new(config.window());
    let runner = Runner { config, stencils: family_stencils(&family), lattice, seed, opts };

    let chunks = n_traj.div_ceil(CHUNK);
    let batch = rayon::current_num_threads().max(1);
    let mut total = Accumulator::new(lattice, opts);
    for start in (0..chunks).step_by(batch) {
        let parts: Vec<Result<Accumulator>> = (start..(start + batch).min(chunks))
            .into_par_iter()
            .map(|c| runner.run_chunk(c, n_traj))
            .collect();
        for part in parts {
            total.merge(part?);
        }
    }

    let inv_n = 1.0 / n_traj as f64;
    let probs = total.probs.iter().map(|p| p * inv_n).collect();
    let p_hat = PositionDistribution::from_probs(lattice.window(), probs)?;
    let rho_hat = total
        .rho
        .map(|data| reduced_operator(lattice_subsystems(lattice.window()), data, inv_n));
    let n = lattice.side();
    let reduced = opts
        .reduced_at
        .iter()
        .zip(total.reduced)
        .map(|(&t, s)| ReducedOperators {
            t,
            p: PositionDistribution::from_probs(lattice.window(), s.probs.iter().map(|p| p * inv_n).collect())
                .expect("snapshot matches the lattice"),
            xy: s.xy.map(|d| {
                reduced_operator(vec![Subsystem::new(Label::X, n), Subsystem::new(Label::Y, n)], d, inv_n)
            }),
            xc: reduced_operator(vec![Subsystem::new(Label::X, n), Subsystem::new(Label::Coin, 2)], s.xc, inv_n),
            yc: reduced_operator(vec![Subsystem::new(Label::Y, n), Subsystem::new(Label::Coin, 2)], s.yc, inv_n),
        })
        .collect();
    let series = (0..=config.t_max).map(|t| estimate(t, &total.moments)).collect();
    Ok(TrajectoryEnsembleResult { n_traj, seed, p_hat, rho_hat, reduced, series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::exact::ExactEvolution;
    use crate::model::Model;
    use crate::walk::{step_coherent, Coin};

    #[test]
    fn rejects_zero_trajectories() {
        let cfg = WalkConfig::new(Model::BrokenLine, 0.5, 3);
        assert_eq!(
            trajectory_run(&cfg, 0, 1, &TrajectoryOptions::default()).unwrap_err(),
            Error::InvalidTrajectoryCount(0)
        );
    }

    #[test]
    fn trapped_walker_never_moves_in_x() {
        let cfg = WalkConfig::new(Model::BrokenLine, 1.0, 8);
        let res = trajectory_run(&cfg, 40, 3, &TrajectoryOptions::default()).unwrap();
        for (x, _, p) in res.p_hat.iter() {
            if x != 0 {
                assert_eq!(p, 0.0);
            }
        }
        for est in &res.series {
            assert_eq!(est.report.var_x, 0.0);
            assert_eq!(est.se_var_x, 0.0);
        }
    }

    #[test]
    fn coherent_limit_is_deterministic() {
        let cfg = WalkConfig::new(Model::CoinMeasure, 0.0, 6);
        let opts = TrajectoryOptions { collect_rho: true, ..Default::default() };
        let res = trajectory_run(&cfg, 10, 11, &opts).unwrap();
        let mut psi = PureLatticeState::origin(6, Coin::symmetric());
        for _ in 0..6 {
            psi = step_coherent(&psi).unwrap();
        }
        let want = DensityOperator::from_lattice_state(&psi);
        assert!(res.rho_hat.unwrap().max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn ensemble_is_normalized_and_reproducible() {
        let cfg = WalkConfig::new(Model::BrokenLine, 0.5, 5);
        let opts = TrajectoryOptions { collect_rho: true, reduced_at: vec![2, 5], reduced_xy: true };
        let a = trajectory_run(&cfg, 70, 42, &opts).unwrap();
        let b = trajectory_run(&cfg, 70, 42, &opts).unwrap();
        assert_eq!(a, b);
        assert!((a.p_hat.total() - 1.0).abs() < 1e-10);
        let rho = a.rho_hat.as_ref().unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
        for r in &a.reduced {
            assert!((r.xc.trace().re - 1.0).abs() < 1e-10);
            assert!((r.yc.trace().re - 1.0).abs() < 1e-10);
            assert!((r.xy.as_ref().unwrap().trace().re - 1.0).abs() < 1e-10);
        }
        let c = trajectory_run(&cfg, 70, 43, &opts).unwrap();
        assert_ne!(a.p_hat, c.p_hat);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = WalkConfig::new(Model::CoinMeasure, 0.3, 6);
        let opts = TrajectoryOptions::default();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| trajectory_run(&cfg, 150, 7, &opts).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn ensemble_approaches_channel() {
        let cfg = WalkConfig::new(Model::BrokenLine, 0.5, 4);
        let fam = build_family(Model::BrokenLine, 0.5).unwrap();
        let mut ev = ExactEvolution::new(&fam, Coin::symmetric());
        for _ in 0..4 {
            ev.step().unwrap();
        }
        let exact = ev.into_rho();
        let opts = TrajectoryOptions { collect_rho: true, ..Default::default() };
        let dist = |n| {
            let r = trajectory_run(&cfg, n, 5, &opts).unwrap();
            r.rho_hat.unwrap().frobenius_distance(&exact).unwrap()
        };
        let (d1, d2) = (dist(200), dist(800));
        // Expected distance halves when n_traj grows fourfold.
        assert!(d2 < d1, "{d1} -> {d2}");
    }
}
