use std::collections::BTreeMap;

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;

/// How a momentum phase is read as a lattice displacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignConvention {
    /// `e^{+i(l1 k + l2 p)}` moves the walker by `(+l1, +l2)`; this is the
    /// reading under which the symbols reproduce the coin-conditioned shifts
    /// of the walk (R toward negative coordinates).
    Forward,
    /// The opposite reading, `(-l1, -l2)`. Kept as a negative control.
    Reversed,
}

/// Translation-invariant coin operator `F(k, p) = Σ_l A_l e^{i(l1 k + l2 p)}`,
/// stored by lattice displacement `l = (l1, l2)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MomentumSymbol {
    terms: BTreeMap<(i32, i32), Mat2>,
}

fn phase(l: (i32, i32), k: f64, p: f64) -> Complex64 {
    Complex64::from_polar(1.0, l.0 as f64 * k + l.1 as f64 * p)
}

impl MomentumSymbol {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((i32, i32), Mat2)>) -> Self {
        let mut s = Self::new();
        for (l, m) in terms {
            s.add_term(l, m);
        }
        s
    }

    pub fn add_term(&mut self, offset: (i32, i32), m: Mat2) {
        *self.terms.entry(offset).or_insert_with(Mat2::zeros) += m;
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&l, m)| (l, m * Complex64::new(s, 0.0)))
                .collect(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i32, i32), &Mat2)> {
        self.terms.iter().map(|(&l, m)| (l, m))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|m| m.iter().all(|z| z.norm() == 0.0))
    }

    /// Largest `max(|l1|, |l2|)` among the terms.
    pub fn reach(&self) -> usize {
        self.terms
            .keys()
            .map(|&(a, b)| a.unsigned_abs().max(b.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, k: f64, p: f64) -> Mat2 {
        self.terms
            .iter()
            .fold(Mat2::zeros(), |acc, (&l, m)| acc + m * phase(l, k, p))
    }

    /// `∂F/∂k`.
    pub fn d_dk(&self, k: f64, p: f64) -> Mat2 {
        self.terms.iter().fold(Mat2::zeros(), |acc, (&l, m)| {
            acc + m * (phase(l, k, p) * Complex64::new(0.0, l.0 as f64))
        })
    }

    /// `∂F/∂p`.
    pub fn d_dp(&self, k: f64, p: f64) -> Mat2 {
        self.terms.iter().fold(Mat2::zeros(), |acc, (&l, m)| {
            acc + m * (phase(l, k, p) * Complex64::new(0.0, l.1 as f64))
        })
    }

    /// Position-space form: a list of `(displacement, coin matrix)`.
    pub fn stencil(&self, convention: SignConvention) -> Stencil {
        let sign = match convention {
            SignConvention::Forward => 1,
            SignConvention::Reversed => -1,
        };
        Stencil {
            terms: self
                .terms
                .iter()
                .filter(|(_, m)| m.iter().any(|z| z.norm() > 0.0))
                .map(|(&(a, b), m)| (((sign * a) as i64, (sign * b) as i64), *m))
                .collect(),
        }
    }
}

/// `E = Σ_l S_l ⊗ A_l` with `S_l` the lattice shift by `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub terms: Vec<((i64, i64), Mat2)>,
}

impl Stencil {
    pub fn reach(&self) -> usize {
        self.terms
            .iter()
            .map(|&((a, b), _)| a.unsigned_abs().max(b.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }
}

/// Real 2x2 helper, row major.
pub(crate) fn mat(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
    Mat2::new(
        Complex64::new(a, 0.0),
        Complex64::new(b, 0.0),
        Complex64::new(c, 0.0),
        Complex64::new(d, 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_matches_finite_difference() {
        let s = MomentumSymbol::from_terms([((1, -1), mat(0.5, 0.1, 0.0, 0.2)), ((0, 1), mat(0.0, 1.0, -1.0, 0.3))]);
        let (k, p, h) = (0.3, -1.1, 1e-6);
        let fd_k = (s.eval(k + h, p) - s.eval(k - h, p)) / Complex64::new(2.0 * h, 0.0);
        let fd_p = (s.eval(k, p + h) - s.eval(k, p - h)) / Complex64::new(2.0 * h, 0.0);
        assert!((fd_k - s.d_dk(k, p)).norm() < 1e-8);
        assert!((fd_p - s.d_dp(k, p)).norm() < 1e-8);
    }

    #[test]
    fn stencil_conventions_are_mirrors() {
        let s = MomentumSymbol::from_terms([((1, -1), mat(1.0, 0.0, 0.0, 0.0))]);
        assert_eq!(s.stencil(SignConvention::Forward).terms[0].0, (1, -1));
        assert_eq!(s.stencil(SignConvention::Reversed).terms[0].0, (-1, 1));
        assert_eq!(s.reach(), 1);
    }
}
