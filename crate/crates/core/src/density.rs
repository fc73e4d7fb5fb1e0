//! Dense density operators over ordered tensor products of walker and coin
//! subsystems.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::walk::{Lattice, PureLatticeState};
use crate::linalg::hermitian_eigenvalues;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    X,
    Y,
    Coin,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::X => "x",
            Label::Y => "y",
            Label::Coin => "c",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Subsystem {
    pub label: Label,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: Label, dim: usize) -> Self {
        Self { label, dim }
    }
}

/// `[x, y, c]` for a window of half-width `window`.
pub fn lattice_subsystems(window: usize) -> Vec<Subsystem> {
    let side = 2 * window + 1;
    vec![
        Subsystem::new(Label::X, side),
        Subsystem::new(Label::Y, side),
        Subsystem::new(Label::Coin, 2),
    ]
}

/// Square complex matrix, row major, with the first subsystem slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    subsystems: Vec<Subsystem>,
    dim: usize,
    data: Vec<Complex64>,
}

fn check_subsystems(subsystems: &[Subsystem]) -> Result<usize> {
    let mut seen = Vec::new();
    for s in subsystems {
        if seen.contains(&s.label) {
            return Err(Error::LabelMismatch(format!("label {} appears twice", s.label.as_str())));
        }
        if s.dim == 0 {
            return Err(Error::DimensionMismatch(format!("subsystem {} has dimension 0", s.label.as_str())));
        }
        seen.push(s.label);
    }
    Ok(subsystems.iter().map(|s| s.dim).product())
}

impl DensityOperator {
    pub fn new(subsystems: Vec<Subsystem>, data: Vec<Complex64>) -> Result<Self> {
        let dim = check_subsystems(&subsystems)?;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} operator",
                data.len()
            )));
        }
        Ok(Self { subsystems, dim, data })
    }

    pub fn zeros(subsystems: Vec<Subsystem>) -> Result<Self> {
        let dim = check_subsystems(&subsystems)?;
        Ok(Self { subsystems, dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure_vector(subsystems: Vec<Subsystem>, psi: &[Complex64]) -> Result<Self> {
        let mut rho = Self::zeros(subsystems)?;
        if psi.len() != rho.dim {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} for dimension {}",
                psi.len(),
                rho.dim
            )));
        }
        rho.add_projector(psi, 1.0);
        Ok(rho)
    }

    pub fn from_lattice_state(state: &PureLatticeState) -> Self {
        Self::from_pure_vector(lattice_subsystems(state.window()), state.amps())
            .expect("lattice state dimensions are consistent")
    }

    pub fn from_nalgebra(subsystems: Vec<Subsystem>, m: &DMatrix<Complex64>) -> Result<Self> {
        let dim = check_subsystems(&subsystems)?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dimension {dim}",
                m.nrows(),
                m.ncols()
            )));
        }
        let data = (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect();
        Ok(Self { subsystems, dim, data })
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> Vec<Label> {
        self.subsystems.iter().map(|s| s.label).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Window half-width when the leading subsystems are `x, y` of equal odd size.
    pub fn lattice_window(&self) -> Option<usize> {
        match self.subsystems.as_slice() {
            [a, b, ..] if a.label == Label::X && b.label == Label::Y && a.dim == b.dim && a.dim % 2 == 1 => {
                Some((a.dim - 1) / 2)
            }
            _ => None,
        }
    }

    pub(crate) fn lattice(&self) -> Result<Lattice> {
        match (self.lattice_window(), self.labels().as_slice()) {
            (Some(w), [Label::X, Label::Y, Label::Coin]) => Ok(Lattice::new(w)),
            _ => Err(Error::LabelMismatch(format!(
                "expected a full [x, y, c] lattice operator, got {:?}",
                self.labels()
            ))),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `max |ρ_ij - conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.to_nalgebra())
    }

    /// Checks Hermiticity and unit trace (1e-10) and `λ_min ≥ -1e-8`.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > 1e-10 {
            return Err(Error::InvalidParameter(format!("operator is not Hermitian (error {h:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidParameter(format!("trace is {tr}, expected 1")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -1e-8 {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend_from_slice(&other.subsystems);
        let mut out = DensityOperator::zeros(subsystems)?;
        let (da, db) = (self.dim, other.dim);
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out.data[(i * db + k) * out.dim + (j * db + l)] = a * other.get(k, l);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Adds `weight |ψ⟩⟨ψ|` in place.
    pub fn add_projector(&mut self, psi: &[Complex64], weight: f64) {
        debug_assert_eq!(psi.len(), self.dim);
        let dim = self.dim;
        for (i, &a) in psi.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let a = a * weight;
            let row = &mut self.data[i * dim..(i + 1) * dim];
            for (r, &b) in row.iter_mut().zip(psi) {
                *r += a * b.conj();
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn add_assign(&mut self, other: &DensityOperator) -> Result<()> {
        if self.subsystems != other.subsystems {
            return Err(Error::LabelMismatch("operators act on different spaces".into()));
        }
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// Places a full lattice operator into a larger window.
    pub fn embed(&self, window: usize) -> Result<DensityOperator> {
        let from = self.lattice()?;
        if window < from.window() {
            return Err(Error::WindowOverflow { needed: from.window(), window });
        }
        let to = Lattice::new(window);
        let map: Vec<usize> = (0..self.dim)
            .map(|i| {
                let (x, y) = from.coords(i / 2);
                to.index(x, y, i % 2)
            })
            .collect();
        let mut out = DensityOperator::zeros(crate::density::lattice_subsystems(window))?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.data[map[i] * out.dim + map[j]] = self.get(i, j);
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> Result<f64> {
        if self.subsystems != other.subsystems {
            return Err(Error::LabelMismatch("operators act on different spaces".into()));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn frobenius_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.subsystems != other.subsystems {
            return Err(Error::LabelMismatch("operators act on different spaces".into()));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::Coin;

    #[test]
    fn pure_lattice_state_is_valid() {
        let s = PureLatticeState::origin(1, Coin::symmetric());
        let rho = DensityOperator::from_lattice_state(&s);
        assert_eq!(rho.dim(), 18);
        assert_eq!(rho.lattice_window(), Some(1));
        rho.validate().unwrap();
        let ev = rho.eigenvalues();
        assert!((ev[17] - 1.0).abs() < 1e-12 && ev[0].abs() < 1e-12);
    }

    #[test]
    fn rejects_duplicate_labels_and_bad_sizes() {
        let s = vec![Subsystem::new(Label::X, 2), Subsystem::new(Label::X, 2)];
        assert!(matches!(DensityOperator::zeros(s), Err(Error::LabelMismatch(_))));
        let s = vec![Subsystem::new(Label::Coin, 2)];
        assert!(matches!(
            DensityOperator::new(s, vec![Complex64::new(1.0, 0.0); 3]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let s = vec![Subsystem::new(Label::Coin, 2)];
        let d = vec![
            Complex64::new(1.1, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-0.1, 0.0),
        ];
        let rho = DensityOperator::new(s, d).unwrap();
        assert!(matches!(rho.validate(), Err(Error::NotPositive(_))));
    }

    #[test]
    fn embed_keeps_entries() {
        let s = PureLatticeState::localized(1, 1, -1, Coin::up()).unwrap();
        let rho = DensityOperator::from_lattice_state(&s);
        let big = rho.embed(3).unwrap();
        let l = Lattice::new(3);
        let i = l.index(1, -1, 0);
        assert_eq!(big.get(i, i), Complex64::new(1.0, 0.0));
        assert!((big.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
