//! Reduced states, von Neumann entropy, classical mutual information of the
//! two walker coordinates, and measurement-induced disturbance (MID).
//!
//! MID is `I(ρ) - I(Πρ)` where `Π` dephases `ρ` in the joint eigenbasis of
//! its two marginals. Degenerate marginal eigenvalues (gap below 1e-10) are
//! merged into one eigenspace projector, so `Πρ` does not depend on the
//! arbitrary basis an eigensolver picks inside a degenerate subspace.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::{DensityOperator, Label, Subsystem};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::walk::{position_distribution, PositionDistribution};

type C = Complex64;

/// Eigenvalues closer than this are treated as one eigenspace.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Most negative eigenvalue accepted as numerical noise.
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Largest walker window for which walker-walker MID is computed.
pub const MAX_XY_WINDOW: usize = 20;

const ALL_LABELS: [Label; 3] = [Label::X, Label::Y, Label::Coin];

/// Two disjoint groups of subsystems; anything else is traced out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    pub part1: Vec<Label>,
    pub part2: Vec<Label>,
    pub traced_out: Vec<Label>,
}

impl Bipartition {
    pub fn new(part1: &[Label], part2: &[Label]) -> Result<Self> {
        if part1.is_empty() || part2.is_empty() {
            return Err(Error::LabelMismatch("both parts need at least one subsystem".into()));
        }
        if part1.iter().any(|l| part2.contains(l)) {
            return Err(Error::LabelMismatch(format!("parts overlap: {part1:?} and {part2:?}")));
        }
        let mut seen = Vec::new();
        for l in part1.iter().chain(part2) {
            if seen.contains(l) {
                return Err(Error::LabelMismatch(format!("label {} repeated", l.as_str())));
            }
            seen.push(*l);
        }
        let traced_out = ALL_LABELS.iter().copied().filter(|l| !seen.contains(l)).collect();
        Ok(Self { part1: part1.to_vec(), part2: part2.to_vec(), traced_out })
    }

    pub fn walker_walker() -> Self {
        Self::new(&[Label::X], &[Label::Y]).expect("disjoint")
    }

    pub fn walker_coin(walker: Label) -> Result<Self> {
        Self::new(&[walker], &[Label::Coin])
    }
}

/// Index offsets of each basis state of the chosen subsystems inside the
/// full row-major index.
fn offsets(subsystems: &[Subsystem], pick: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut strides = vec![1; subsystems.len()];
    for i in (0..subsystems.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * subsystems[i + 1].dim;
    }
    let mut out = vec![0usize];
    for (i, s) in subsystems.iter().enumerate() {
        if !pick(i) {
            continue;
        }
        let stride = strides[i];
        out = out
            .iter()
            .flat_map(|&base| (0..s.dim).map(move |v| base + v * stride))
            .collect();
    }
    out
}

/// Reduced operator on `keep`, in the order those labels appear in `rho`.
pub fn partial_trace(rho: &DensityOperator, keep: &[Label]) -> Result<DensityOperator> {
    let subs = rho.subsystems();
    for l in keep {
        if !subs.iter().any(|s| s.label == *l) {
            return Err(Error::LabelMismatch(format!("label {} not present in {:?}", l.as_str(), rho.labels())));
        }
    }
    let kept = |i: usize| keep.contains(&subs[i].label);
    let a = offsets(subs, kept);
    let c = offsets(subs, |i| !kept(i));
    let dim = rho.dim();
    let data = rho.data();
    let n = a.len();
    let mut out = vec![C::new(0.0, 0.0); n * n];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in a.iter().enumerate() {
            out[i * n + j] = c.iter().map(|&ck| data[(ai + ck) * dim + bj + ck]).sum();
        }
    }
    let kept_subs = subs.iter().copied().filter(|s| keep.contains(&s.label)).collect();
    DensityOperator::new(kept_subs, out)
}

fn entropy_of(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -PSD_TOLERANCE {
            return Err(Error::NotPositive(l));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s)
}

/// `S(ρ) = -Tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    entropy_of(&rho.eigenvalues())
}

/// `I_c = Σ P(x, y) log₂ [P(x, y) / (P(x) P(y))]` in bits.
pub fn classical_mutual_information(p: &PositionDistribution) -> f64 {
    let (px, py) = (p.marginal_x(), p.marginal_y());
    let side = px.len();
    let mut total = 0.0;
    for (s, &pxy) in p.probs().iter().enumerate() {
        if pxy > 0.0 {
            total += pxy * (pxy / (px[s / side] * py[s % side])).log2();
        }
    }
    total
}

/// Spectral decomposition `ρ = Σ p_j Π_j` with degenerate eigenvalues merged.
#[derive(Clone, Debug)]
pub struct SpectralProjectorSet {
    /// One value per cluster, descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns spanning each cluster's eigenspace.
    pub bases: Vec<DMatrix<C>>,
}

impl SpectralProjectorSet {
    pub fn new(m: &DMatrix<C>) -> Self {
        let (values, vectors) = hermitian_eigen(m);
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            match groups.last_mut() {
                Some(g) if values[*g.last().unwrap()] - values[i] < DEGENERACY_GAP => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        let eigenvalues = groups
            .iter()
            .map(|g| g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64)
            .collect();
        let bases = groups
            .iter()
            .map(|g| DMatrix::from_fn(m.nrows(), g.len(), |r, c| vectors[(r, g[c])]))
            .collect();
        Self { eigenvalues, bases }
    }

    pub fn projectors(&self) -> Vec<DMatrix<C>> {
        self.bases.iter().map(|b| b * b.adjoint()).collect()
    }

    /// Unitary whose columns are the eigenvectors, cluster by cluster, and
    /// the cluster index of each column.
    fn unitary(&self) -> (DMatrix<C>, Vec<usize>) {
        let n = self.bases[0].nrows();
        let mut u = DMatrix::zeros(n, n);
        let mut cluster = Vec::with_capacity(n);
        let mut col = 0;
        for (g, b) in self.bases.iter().enumerate() {
            for j in 0..b.ncols() {
                u.set_column(col, &b.column(j));
                cluster.push(g);
                col += 1;
            }
        }
        (u, cluster)
    }
}

/// `m (U1 ⊗ U2)`, applying one factor at a time with column updates.
fn right_mul_kron(m: &DMatrix<C>, u1: &DMatrix<C>, u2: &DMatrix<C>) -> DMatrix<C> {
    let (d1, d2) = (u1.nrows(), u2.nrows());
    let one = C::new(1.0, 0.0);
    let mut b = DMatrix::<C>::zeros(m.nrows(), m.ncols());
    for i1 in 0..d1 {
        for j2 in 0..d2 {
            let mut col = b.column_mut(i1 * d2 + j2);
            for k2 in 0..d2 {
                col.axpy(u2[(k2, j2)], &m.column(i1 * d2 + k2), one);
            }
        }
    }
    let mut c = DMatrix::<C>::zeros(m.nrows(), m.ncols());
    for j1 in 0..d1 {
        for i2 in 0..d2 {
            let mut col = c.column_mut(j1 * d2 + i2);
            for k1 in 0..d1 {
                col.axpy(u1[(k1, j1)], &b.column(k1 * d2 + i2), one);
            }
        }
    }
    c
}

/// `(U1 ⊗ U2)† ρ (U1 ⊗ U2)`.
fn to_product_basis(rho: &DMatrix<C>, u1: &DMatrix<C>, u2: &DMatrix<C>) -> DMatrix<C> {
    let a = right_mul_kron(rho, u1, u2);
    right_mul_kron(&a.adjoint(), u1, u2).adjoint()
}

/// `MID = I(ρ) - I(Πρ)` in bits for `rho` over exactly `part1 ∪ part2`.
pub fn mid(rho: &DensityOperator, bipartition: &Bipartition) -> Result<f64> {
    let labels = rho.labels();
    let wanted: Vec<Label> = bipartition.part1.iter().chain(&bipartition.part2).copied().collect();
    if labels.len() != wanted.len() || !wanted.iter().all(|l| labels.contains(l)) {
        return Err(Error::LabelMismatch(format!(
            "operator over {labels:?} does not match the bipartition {:?} | {:?}; trace out the rest first",
            bipartition.part1, bipartition.part2
        )));
    }
    let first_in_part1 = bipartition.part1.contains(&labels[0]);
    let split = labels.iter().position(|l| bipartition.part1.contains(l) != first_in_part1);
    let split = split.ok_or_else(|| Error::DimensionMismatch("empty part".into()))?;
    if labels[split..].iter().any(|l| bipartition.part1.contains(l) == first_in_part1) {
        return Err(Error::LabelMismatch("each part must be contiguous in the operator's ordering".into()));
    }
    let (a, b): (Vec<Label>, Vec<Label>) = (labels[..split].to_vec(), labels[split..].to_vec());
    let rho1 = partial_trace(rho, &a)?;
    let rho2 = partial_trace(rho, &b)?;
    let m = rho.to_nalgebra();
    let s = entropy_of(&hermitian_eigenvalues(&m))?;

    let sp1 = SpectralProjectorSet::new(&rho1.to_nalgebra());
    let sp2 = SpectralProjectorSet::new(&rho2.to_nalgebra());
    let (u1, c1) = sp1.unitary();
    let (u2, c2) = sp2.unitary();
    let t = to_product_basis(&m, &u1, &u2);
    let d2 = u2.nrows();

    // Πρ is block diagonal over cluster pairs.
    let mut blocks: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
    for i in 0..t.nrows() {
        blocks.entry((c1[i / d2], c2[i % d2])).or_default().push(i);
    }
    let mut ev = Vec::with_capacity(t.nrows());
    for idx in blocks.values() {
        if idx.len() == 1 {
            ev.push(t[(idx[0], idx[0])].re);
        } else {
            let blk = DMatrix::from_fn(idx.len(), idx.len(), |r, c| t[(idx[r], idx[c])]);
            ev.extend(hermitian_eigenvalues(&blk));
        }
    }
    // I(ρ) - I(Πρ) = S(Πρ) - S(ρ): dephasing leaves both marginals unchanged.
    Ok(entropy_of(&ev)? - s)
}

/// Mutual information `S(ρ1) + S(ρ2) - S(ρ)` for an operator over exactly two parts.
pub fn quantum_mutual_information(rho: &DensityOperator, bipartition: &Bipartition) -> Result<f64> {
    let s1 = von_neumann_entropy(&partial_trace(rho, &bipartition.part1)?)?;
    let s2 = von_neumann_entropy(&partial_trace(rho, &bipartition.part2)?)?;
    Ok(s1 + s2 - von_neumann_entropy(rho)?)
}

/// Correlation measures at one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationReport {
    pub t: usize,
    pub model: Model,
    pub f: f64,
    pub i_c: f64,
    /// `NaN` when not computed (window above the walker-walker cap).
    pub mid_xy: f64,
    pub mid_xc: f64,
    pub mid_yc: f64,
}

/// Reduced operators needed for a report.
pub struct ReducedParts<'a> {
    pub p: &'a PositionDistribution,
    pub xy: Option<&'a DensityOperator>,
    pub xc: &'a DensityOperator,
    pub yc: &'a DensityOperator,
}

pub fn correlation_report_from_parts(t: usize, model: Model, f: f64, parts: &ReducedParts<'_>) -> Result<CorrelationReport> {
    let mid_xy = match parts.xy {
        Some(xy) => mid(xy, &Bipartition::walker_walker())?,
        None => f64::NAN,
    };
    Ok(CorrelationReport {
        t,
        model,
        f,
        i_c: classical_mutual_information(parts.p),
        mid_xy,
        mid_xc: mid(parts.xc, &Bipartition::walker_coin(Label::X)?)?,
        mid_yc: mid(parts.yc, &Bipartition::walker_coin(Label::Y)?)?,
    })
}

/// Report from a full `[x, y, c]` operator. The unused walker is traced out
/// before each walker-coin MID. Walker-walker MID is skipped above
/// [`MAX_XY_WINDOW`] or when `with_xy` is false.
pub fn correlation_report(rho: &DensityOperator, t: usize, model: Model, f: f64, with_xy: bool) -> Result<CorrelationReport> {
    let p = position_distribution(rho)?;
    let window = rho.lattice_window().unwrap_or(usize::MAX);
    let xy = if with_xy && window <= MAX_XY_WINDOW {
        Some(partial_trace(rho, &[Label::X, Label::Y])?)
    } else {
        None
    };
    let xc = partial_trace(rho, &[Label::X, Label::Coin])?;
    let yc = partial_trace(rho, &[Label::Y, Label::Coin])?;
    correlation_report_from_parts(t, model, f, &ReducedParts { p: &p, xy: xy.as_ref(), xc: &xc, yc: &yc })
}
