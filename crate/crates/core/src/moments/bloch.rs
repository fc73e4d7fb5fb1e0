use nalgebra::{Matrix2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::walk::Coin;

type C = Complex64;

/// Pauli basis `(I, σx, σy, σz)`.
pub fn pauli() -> [Matrix2<C>; 4] {
    let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
    [
        Matrix2::new(o, z, z, o),
        Matrix2::new(z, o, o, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(o, z, z, -o),
    ]
}

/// Coin operator `r0 I + r1 σx + r2 σy + r3 σz` as its coefficient vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector(pub Vector4<C>);

impl BlochVector {
    pub fn from_matrix(m: &Matrix2<C>) -> Self {
        let s = pauli();
        Self(Vector4::from_fn(|i, _| (s[i] * m).trace() * 0.5))
    }

    pub fn to_matrix(&self) -> Matrix2<C> {
        pauli().iter().zip(self.0.iter()).fold(Matrix2::zeros(), |acc, (s, r)| acc + s * *r)
    }

    /// `|c⟩⟨c|` for a normalized coin; `r0 = 1/2`.
    pub fn from_coin(coin: Coin) -> Result<Self> {
        if !coin.is_normalized() {
            return Err(Error::InvalidParameter(format!("coin is not normalized (norm² = {})", coin.norm_sqr())));
        }
        let v = nalgebra::Vector2::new(coin.a_r, coin.a_l);
        Ok(Self::from_matrix(&(v * v.adjoint())))
    }

    /// `Tr Õ = 2 r0`.
    pub fn trace(&self) -> C {
        self.0[0] * 2.0
    }

    /// True for a density matrix: `r0 = 1/2`, real `r1..r3` with `|r| ≤ 1/2`.
    pub fn is_state(&self, tol: f64) -> bool {
        let r = &self.0;
        (r[0] - C::new(0.5, 0.0)).norm() <= tol
            && r.iter().all(|z| z.im.abs() <= tol)
            && (r[1].re.powi(2) + r[2].re.powi(2) + r[3].re.powi(2)) <= 0.25 + tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_coin_points_along_y() {
        let b = BlochVector::from_coin(Coin::symmetric()).unwrap();
        let want = [0.5, 0.0, 0.5, 0.0];
        for (z, w) in b.0.iter().zip(want) {
            assert!((z - C::new(w, 0.0)).norm() < 1e-15);
        }
        assert!(b.is_state(1e-12));
    }

    #[test]
    fn round_trip() {
        let m = Matrix2::new(C::new(0.3, 0.0), C::new(0.1, -0.2), C::new(0.1, 0.2), C::new(0.7, 0.0));
        let back = BlochVector::from_matrix(&m).to_matrix();
        assert!((back - m).norm() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_coin() {
        assert!(BlochVector::from_coin(Coin::new(C::new(1.0, 0.0), C::new(1.0, 0.0))).is_err());
    }
}
