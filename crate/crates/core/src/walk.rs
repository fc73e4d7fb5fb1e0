//! Walker + coin states on a bounded square lattice and the coherent
//! alternative-walk step `U = S_y (I ⊗ H) S_x (I ⊗ H)`.
//!
//! Coin index 0 is `|R⟩`, index 1 is `|L⟩`. `R` moves toward the negative
//! coordinate on both shifts, `L` toward the positive one.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::density::{DensityOperator, Label};
use crate::error::{check_probability, Error, Result};
use crate::model::Model;

pub const R: usize = 0;
pub const L: usize = 1;

/// Amplitudes `(a_R, a_L)` of a single coin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coin {
    pub a_r: Complex64,
    pub a_l: Complex64,
}

impl Coin {
    pub fn new(a_r: Complex64, a_l: Complex64) -> Self {
        Self { a_r, a_l }
    }

    /// Rescales `(a_r, a_l)` to unit norm.
    pub fn normalized(a_r: Complex64, a_l: Complex64) -> Result<Self> {
        let n = (a_r.norm_sqr() + a_l.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter(
                "coin amplitudes must have non-zero finite norm".into(),
            ));
        }
        Ok(Self::new(a_r / n, a_l / n))
    }

    /// `(|R⟩ + i|L⟩)/√2`, the coin used throughout the figure reproductions.
    pub fn symmetric() -> Self {
        Self::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        )
    }

    pub fn up() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a_r.norm_sqr() + self.a_l.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-12
    }

    pub fn amplitude(&self, c: usize) -> Complex64 {
        if c == R {
            self.a_r
        } else {
            self.a_l
        }
    }
}

impl Default for Coin {
    fn default() -> Self {
        Self::symmetric()
    }
}

/// Square window `x, y ∈ [-W, W]`, row-major in `(x, y, c)` with the coin fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    window: usize,
}

impl Lattice {
    pub fn new(window: usize) -> Self {
        Self { window }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn side(&self) -> usize {
        2 * self.window + 1
    }

    pub fn sites(&self) -> usize {
        self.side() * self.side()
    }

    /// Hilbert-space dimension `2 (2W + 1)²`.
    pub fn dim(&self) -> usize {
        2 * self.sites()
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        let w = self.window as i64;
        x.abs() <= w && y.abs() <= w
    }

    #[inline]
    pub fn site(&self, x: i64, y: i64) -> usize {
        debug_assert!(self.contains(x, y), "({x}, {y}) outside window {}", self.window);
        let w = self.window as i64;
        ((x + w) as usize) * self.side() + (y + w) as usize
    }

    #[inline]
    pub fn index(&self, x: i64, y: i64, c: usize) -> usize {
        2 * self.site(x, y) + c
    }

    pub fn coords(&self, site: usize) -> (i64, i64) {
        let w = self.window as i64;
        let side = self.side();
        ((site / side) as i64 - w, (site % side) as i64 - w)
    }

    pub fn coordinates(&self) -> impl Iterator<Item = i64> + Clone {
        let w = self.window as i64;
        -w..=w
    }
}

/// Pure state of walker and coin. `extent` bounds the support:
/// amplitudes vanish whenever `|x| > extent` or `|y| > extent`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureLatticeState {
    lattice: Lattice,
    amps: Vec<Complex64>,
    step_count: usize,
    extent: usize,
}

impl PureLatticeState {
    pub fn origin(window: usize, coin: Coin) -> Self {
        Self::localized(window, 0, 0, coin).expect("origin is inside every window")
    }

    pub fn localized(window: usize, x: i64, y: i64, coin: Coin) -> Result<Self> {
        let lattice = Lattice::new(window);
        if !lattice.contains(x, y) {
            return Err(Error::WindowOverflow {
                needed: x.unsigned_abs().max(y.unsigned_abs()) as usize,
                window,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); lattice.dim()];
        amps[lattice.index(x, y, R)] = coin.a_r;
        amps[lattice.index(x, y, L)] = coin.a_l;
        Ok(Self {
            lattice,
            amps,
            step_count: 0,
            extent: x.unsigned_abs().max(y.unsigned_abs()) as usize,
        })
    }

    /// Builds a state whose support is confined to `|x|, |y| ≤ extent`.
    /// The amplitudes are taken as given (not normalized).
    pub fn from_fn(
        window: usize,
        extent: usize,
        mut amp: impl FnMut(i64, i64, usize) -> Complex64,
    ) -> Result<Self> {
        if extent > window {
            return Err(Error::WindowOverflow { needed: extent, window });
        }
        let lattice = Lattice::new(window);
        let mut amps = vec![Complex64::new(0.0, 0.0); lattice.dim()];
        let e = extent as i64;
        for x in -e..=e {
            for y in -e..=e {
                for c in [R, L] {
                    amps[lattice.index(x, y, c)] = amp(x, y, c);
                }
            }
        }
        Ok(Self { lattice, amps, step_count: 0, extent })
    }

    pub(crate) fn from_parts(
        lattice: Lattice,
        amps: Vec<Complex64>,
        step_count: usize,
        extent: usize,
    ) -> Self {
        debug_assert_eq!(amps.len(), lattice.dim());
        Self { lattice, amps, step_count, extent }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn window(&self) -> usize {
        self.lattice.window
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amp(&self, x: i64, y: i64, c: usize) -> Complex64 {
        if self.lattice.contains(x, y) {
            self.amps[self.lattice.index(x, y, c)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
    }

    /// Largest amplitude difference; windows may differ.
    pub fn max_abs_diff(&self, other: &PureLatticeState) -> f64 {
        let w = self.window().max(other.window()) as i64;
        let mut worst = 0.0f64;
        for x in -w..=w {
            for y in -w..=w {
                for c in [R, L] {
                    worst = worst.max((self.amp(x, y, c) - other.amp(x, y, c)).norm());
                }
            }
        }
        worst
    }

    pub(crate) fn check_room(&self) -> Result<()> {
        if self.extent + 1 > self.window() {
            Err(Error::WindowOverflow { needed: self.extent + 1, window: self.window() })
        } else {
            Ok(())
        }
    }
}

fn hadamard_in_place(amps: &mut [Complex64]) {
    for pair in amps.chunks_exact_mut(2) {
        let (r, l) = (pair[R], pair[L]);
        pair[R] = (r + l) * FRAC_1_SQRT_2;
        pair[L] = (r - l) * FRAC_1_SQRT_2;
    }
}

/// Applies `I ⊗ H` at every site.
pub fn coin_apply(state: &PureLatticeState) -> PureLatticeState {
    let mut out = state.clone();
    hadamard_in_place(&mut out.amps);
    out
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// Conditional shift over the box `|x| ≤ ex, |y| ≤ ey`.
fn shift(lattice: Lattice, amps: &[Complex64], ex: i64, ey: i64, axis: Axis) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for x in -ex..=ex {
        for y in -ey..=ey {
            let (r, l) = (amps[lattice.index(x, y, R)], amps[lattice.index(x, y, L)]);
            match axis {
                Axis::X => {
                    out[lattice.index(x - 1, y, R)] = r;
                    out[lattice.index(x + 1, y, L)] = l;
                }
                Axis::Y => {
                    out[lattice.index(x, y - 1, R)] = r;
                    out[lattice.index(x, y + 1, L)] = l;
                }
            }
        }
    }
    out
}

/// One coherent step: coin, x-shift, coin, y-shift.
pub fn step_coherent(state: &PureLatticeState) -> Result<PureLatticeState> {
    state.check_room()?;
    let lattice = state.lattice;
    let e = state.extent as i64;
    let mut amps = state.amps.clone();
    hadamard_in_place(&mut amps);
    let mut amps = shift(lattice, &amps, e, e, Axis::X);
    hadamard_in_place(&mut amps);
    let amps = shift(lattice, &amps, e + 1, e, Axis::Y);
    Ok(PureLatticeState {
        lattice,
        amps,
        step_count: state.step_count + 1,
        extent: state.extent + 1,
    })
}

/// `P(x, y)` on a square window.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    lattice: Lattice,
    probs: Vec<f64>,
}

impl PositionDistribution {
    pub fn from_probs(window: usize, probs: Vec<f64>) -> Result<Self> {
        let lattice = Lattice::new(window);
        if probs.len() != lattice.sites() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for a window with {} sites",
                probs.len(),
                lattice.sites()
            )));
        }
        Ok(Self { lattice, probs })
    }

    pub fn window(&self) -> usize {
        self.lattice.window
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, x: i64, y: i64) -> f64 {
        if self.lattice.contains(x, y) {
            self.probs[self.lattice.site(x, y)]
        } else {
            0.0
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `P(x) = Σ_y P(x, y)` indexed by `x + W`.
    pub fn marginal_x(&self) -> Vec<f64> {
        let side = self.lattice.side();
        self.probs.chunks_exact(side).map(|row| row.iter().sum()).collect()
    }

    /// `P(y) = Σ_x P(x, y)` indexed by `y + W`.
    pub fn marginal_y(&self) -> Vec<f64> {
        let side = self.lattice.side();
        let mut out = vec![0.0; side];
        for row in self.probs.chunks_exact(side) {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }

    /// Rows `(x, y, P)` in lattice order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        self.probs.iter().enumerate().map(|(s, &p)| {
            let (x, y) = self.lattice.coords(s);
            (x, y, p)
        })
    }

    /// Total-variation distance `½ Σ |P - Q|`; windows may differ.
    pub fn total_variation(&self, other: &PositionDistribution) -> f64 {
        let w = self.window().max(other.window()) as i64;
        let mut acc = 0.0;
        for x in -w..=w {
            for y in -w..=w {
                acc += (self.get(x, y) - other.get(x, y)).abs();
            }
        }
        0.5 * acc
    }
}

/// What a position distribution can be read from.
#[derive(Clone, Copy, Debug)]
pub enum PositionSource<'a> {
    Pure(&'a PureLatticeState),
    Density(&'a DensityOperator),
}

impl<'a> From<&'a PureLatticeState> for PositionSource<'a> {
    fn from(s: &'a PureLatticeState) -> Self {
        PositionSource::Pure(s)
    }
}

impl<'a> From<&'a DensityOperator> for PositionSource<'a> {
    fn from(r: &'a DensityOperator) -> Self {
        PositionSource::Density(r)
    }
}

/// `P(x, y) = Σ_c ⟨x, y, c| ρ |x, y, c⟩`.
///
/// Density operators must be over `[x, y, c]` or `[x, y]` with equal odd
/// walker dimensions.
pub fn position_distribution<'a>(src: impl Into<PositionSource<'a>>) -> Result<PositionDistribution> {
    match src.into() {
        PositionSource::Pure(state) => {
            let probs = state
                .amps
                .chunks_exact(2)
                .map(|c| c[R].norm_sqr() + c[L].norm_sqr())
                .collect();
            PositionDistribution::from_probs(state.window(), probs)
        }
        PositionSource::Density(rho) => {
            let labels = rho.labels();
            let per_site = match labels.as_slice() {
                [Label::X, Label::Y, Label::Coin] => 2,
                [Label::X, Label::Y] => 1,
                _ => {
                    return Err(Error::LabelMismatch(format!(
                        "position distribution needs [x, y, c] or [x, y], got {labels:?}"
                    )))
                }
            };
            let window = rho.lattice_window().ok_or_else(|| {
                Error::DimensionMismatch("walker dimensions must be equal and odd".into())
            })?;
            let dim = rho.dim();
            let probs = (0..dim / per_site)
                .map(|s| (0..per_site).map(|c| rho.get(s * per_site + c, s * per_site + c).re).sum())
                .collect();
            PositionDistribution::from_probs(window, probs)
        }
    }
}

/// First and second moments of `P(x, y)` at step `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub t: usize,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_x2: f64,
    pub mean_y2: f64,
    pub var_x: f64,
    pub var_y: f64,
}

impl MomentReport {
    pub fn from_raw(t: usize, mean_x: f64, mean_y: f64, mean_x2: f64, mean_y2: f64) -> Self {
        Self {
            t,
            mean_x,
            mean_y,
            mean_x2,
            mean_y2,
            var_x: mean_x2 - mean_x * mean_x,
            var_y: mean_y2 - mean_y * mean_y,
        }
    }
}

pub fn moment_report(p: &PositionDistribution, t: usize) -> MomentReport {
    let (mut mx, mut my, mut mx2, mut my2) = (0.0, 0.0, 0.0, 0.0);
    for (x, y, prob) in p.iter() {
        let (xf, yf) = (x as f64, y as f64);
        mx += xf * prob;
        my += yf * prob;
        mx2 += xf * xf * prob;
        my2 += yf * yf * prob;
    }
    MomentReport::from_raw(t, mx, my, mx2, my2)
}

/// Parameters of one walk run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkConfig {
    pub t_max: usize,
    pub initial_coin: Coin,
    pub model: Model,
    pub f: f64,
}

impl WalkConfig {
    pub fn new(model: Model, f: f64, t_max: usize) -> Self {
        Self { t_max, initial_coin: Coin::symmetric(), model, f }
    }

    pub fn with_coin(mut self, coin: Coin) -> Self {
        self.initial_coin = coin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.f)?;
        if !self.initial_coin.is_normalized() {
            return Err(Error::InvalidParameter(format!(
                "initial coin has norm² {} (must be 1 within 1e-12)",
                self.initial_coin.norm_sqr()
            )));
        }
        Ok(())
    }

    /// Window half-width that contains the walk up to `t_max`.
    pub fn window(&self) -> usize {
        self.t_max
    }
}
