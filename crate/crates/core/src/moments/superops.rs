use nalgebra::{Matrix2, Matrix3, Matrix4};
use num_complex::Complex64;

use super::bloch::pauli;
use crate::channels::{build_family, KrausFamily};
use crate::error::{check_probability, Result};
use crate::model::Model;

type C = Complex64;
pub type Mat4 = Matrix4<C>;

/// The seven superoperators at one `(k, p)`, in the Pauli basis, acting on
/// coefficient vectors `(r0, r1, r2, r3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperopValues {
    /// `Õ ↦ Σ F Õ F†`
    pub l: Mat4,
    /// `Õ ↦ Σ ∂kF Õ F†`
    pub k: Mat4,
    /// `Õ ↦ Σ F Õ ∂kF†`
    pub k_dag: Mat4,
    /// `Õ ↦ Σ ∂kF Õ ∂kF†`
    pub t_k: Mat4,
    pub p: Mat4,
    pub p_dag: Mat4,
    pub t_p: Mat4,
}

impl SuperopValues {
    /// Lower-right 3x3 block of `L`, the dynamics of `(r1, r2, r3)`.
    pub fn m(&self) -> Matrix3<C> {
        self.l.fixed_view::<3, 3>(1, 1).into_owned()
    }

    /// Largest entry difference over all seven matrices.
    pub fn max_abs_diff(&self, other: &SuperopValues) -> f64 {
        let pairs = [
            (&self.l, &other.l),
            (&self.k, &other.k),
            (&self.k_dag, &other.k_dag),
            (&self.t_k, &other.t_k),
            (&self.p, &other.p),
            (&self.p_dag, &other.p_dag),
            (&self.t_p, &other.t_p),
        ];
        pairs
            .iter()
            .map(|(a, b)| (*a - *b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

/// Closed-form superoperators of one model at strength `f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochSuperoperatorSet {
    pub model: Model,
    pub f: f64,
}

pub fn build_superops(model: Model, f: f64) -> Result<BlochSuperoperatorSet> {
    check_probability(f)?;
    Ok(BlochSuperoperatorSet { model, f })
}

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

fn im(x: f64) -> C {
    C::new(0.0, x)
}

fn real4(rows: [[f64; 4]; 4]) -> Mat4 {
    Mat4::from_fn(|i, j| re(rows[i][j]))
}

fn broken_line(k: f64, p: f64, f: f64) -> SuperopValues {
    let g = 1.0 - f;
    let (sk, ck) = k.sin_cos();
    let (s2k, c2k) = (2.0 * k).sin_cos();
    let (s2p, c2p) = (2.0 * p).sin_cos();
    let (fg, g2, f2) = (f * g, g * g, f * f);
    let l = real4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, (1.0 - 2.0 * f) * c2p, 2.0 * fg * sk * c2p - g2 * c2k * s2p + f2 * s2p, g2 * s2k * s2p + 2.0 * fg * ck * c2p],
        [0.0, (1.0 - 2.0 * f) * s2p, g2 * c2k * c2p + 2.0 * fg * sk * s2p - f2 * c2p, 2.0 * fg * ck * s2p - g2 * c2p * s2k],
        [0.0, 0.0, g2 * s2k, g2 * c2k + f2],
    ]);
    let mut kk = real4([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, fg * ck * c2p + g2 * s2k * s2p, g2 * c2k * s2p - fg * sk * c2p],
        [0.0, 0.0, fg * ck * s2p - g2 * s2k * c2p, -fg * sk * s2p - g2 * c2p * c2k],
        [0.0, 0.0, g2 * c2k, -g2 * s2k],
    ]);
    kk[(0, 1)] = im(-g);
    kk[(0, 2)] = im(-fg * sk);
    kk[(0, 3)] = im(-fg * ck);
    kk[(1, 0)] = im(-g * c2p);
    kk[(2, 0)] = im(-g * s2p);
    let t_k = real4([
        [g, 0.0, 0.0, 0.0],
        [0.0, c2p * g, g2 * c2k * s2p, -g2 * s2k * s2p],
        [0.0, s2p * g, -g2 * c2k * c2p, g2 * c2p * s2k],
        [0.0, 0.0, -g2 * s2k, -g2 * c2k],
    ]);
    let mut pp = real4([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, (2.0 * f - 1.0) * s2p, -g2 * c2k * c2p - 2.0 * fg * sk * s2p + f2 * c2p, g2 * s2k * c2p - 2.0 * fg * ck * s2p],
        [0.0, (1.0 - 2.0 * f) * c2p, -g2 * c2k * s2p + 2.0 * fg * sk * c2p + f2 * s2p, g2 * s2k * s2p + 2.0 * fg * ck * c2p],
        [0.0, 0.0, 0.0, 0.0],
    ]);
    pp[(0, 2)] = im(-g2 * s2k);
    pp[(0, 3)] = im(-g2 * c2k - f2);
    pp[(3, 0)] = im(-1.0);
    let t_p = real4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c2p * (2.0 * f - 1.0), g2 * c2k * s2p - 2.0 * fg * sk * c2p - f2 * s2p, -g2 * s2k * s2p - 2.0 * fg * ck * c2p],
        [0.0, s2p * (2.0 * f - 1.0), -g2 * c2k * c2p - 2.0 * fg * sk * s2p + f2 * c2p, g2 * c2p * s2k - 2.0 * fg * ck * s2p],
        [0.0, 0.0, g2 * s2k, f2 + g2 * c2k],
    ]);
    SuperopValues { l, k: kk, k_dag: kk.map(|z| z.conj()), t_k, p: pp, p_dag: pp.map(|z| z.conj()), t_p }
}

fn coin_measure(k: f64, p: f64, f: f64) -> SuperopValues {
    let g = 1.0 - f;
    let (s2k, c2k) = (2.0 * k).sin_cos();
    let (s2p, c2p) = (2.0 * p).sin_cos();
    let l = real4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, g * c2p, -g * c2k * s2p, s2k * s2p],
        [0.0, g * s2p, g * c2k * c2p, -s2k * c2p],
        [0.0, 0.0, g * s2k, c2k],
    ]);
    let mut kk = real4([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, g * s2k * s2p, c2k * s2p],
        [0.0, 0.0, -g * s2k * c2p, -c2k * c2p],
        [0.0, 0.0, g * c2k, -s2k],
    ]);
    kk[(0, 1)] = im(f - 1.0);
    kk[(1, 0)] = im(-c2p);
    kk[(2, 0)] = im(-s2p);
    let mut pp = real4([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, -g * s2p, -g * c2k * c2p, s2k * c2p],
        [0.0, g * c2p, -g * c2k * s2p, s2k * s2p],
        [0.0, 0.0, 0.0, 0.0],
    ]);
    pp[(0, 2)] = im((f - 1.0) * s2k);
    pp[(0, 3)] = im(-c2k);
    pp[(3, 0)] = im(-1.0);
    let t_k = real4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, g * c2p, g * c2k * s2p, -s2k * s2p],
        [0.0, g * s2p, -g * c2k * c2p, s2k * c2p],
        [0.0, 0.0, -g * s2k, -c2k],
    ]);
    let t_p = real4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -g * c2p, g * c2k * s2p, -s2k * s2p],
        [0.0, -g * s2p, -g * c2k * c2p, s2k * c2p],
        [0.0, 0.0, g * s2k, c2k],
    ]);
    SuperopValues { l, k: kk, k_dag: kk.map(|z| z.conj()), t_k, p: pp, p_dag: pp.map(|z| z.conj()), t_p }
}

impl BlochSuperoperatorSet {
    pub fn eval(&self, k: f64, p: f64) -> SuperopValues {
        match self.model {
            Model::None => broken_line(k, p, 0.0),
            Model::BrokenLine => broken_line(k, p, self.f),
            Model::CoinMeasure => coin_measure(k, p, self.f),
        }
    }
}

/// Matrix of `Õ ↦ Σ_n A_n Õ B_n†` in the Pauli basis.
fn pauli_matrix(a: &[Matrix2<C>], b: &[Matrix2<C>]) -> Mat4 {
    let s = pauli();
    Mat4::from_fn(|i, j| {
        let image = a.iter().zip(b).fold(Matrix2::zeros(), |acc, (x, y)| acc + x * s[j] * y.adjoint());
        (s[i] * image).trace() * 0.5
    })
}

fn assemble(f: &[Matrix2<C>], dk: &[Matrix2<C>], dp: &[Matrix2<C>]) -> SuperopValues {
    SuperopValues {
        l: pauli_matrix(f, f),
        k: pauli_matrix(dk, f),
        k_dag: pauli_matrix(f, dk),
        t_k: pauli_matrix(dk, dk),
        p: pauli_matrix(dp, f),
        p_dag: pauli_matrix(f, dp),
        t_p: pauli_matrix(dp, dp),
    }
}

/// Superoperators assembled from the Kraus symbols and their exact derivatives.
pub fn superops_from_kraus(family: &KrausFamily, k: f64, p: f64) -> SuperopValues {
    let f: Vec<_> = family.operators.iter().map(|o| o.symbol.eval(k, p)).collect();
    let dk: Vec<_> = family.operators.iter().map(|o| o.symbol.d_dk(k, p)).collect();
    let dp: Vec<_> = family.operators.iter().map(|o| o.symbol.d_dp(k, p)).collect();
    assemble(&f, &dk, &dp)
}

/// As [`superops_from_kraus`] with central-difference derivatives of step `h`.
pub fn superops_finite_difference(family: &KrausFamily, k: f64, p: f64, h: f64) -> SuperopValues {
    let inv = re(0.5 / h);
    let f: Vec<_> = family.operators.iter().map(|o| o.symbol.eval(k, p)).collect();
    let dk: Vec<_> = family
        .operators
        .iter()
        .map(|o| (o.symbol.eval(k + h, p) - o.symbol.eval(k - h, p)) * inv)
        .collect();
    let dp: Vec<_> = family
        .operators
        .iter()
        .map(|o| (o.symbol.eval(k, p + h) - o.symbol.eval(k, p - h)) * inv)
        .collect();
    assemble(&f, &dk, &dp)
}

/// Largest deviation between the closed forms and the Kraus assembly over
/// `samples` seeded random points.
pub fn superops_consistency(model: Model, f: f64, samples: usize) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    let set = build_superops(model, f)?;
    let family = build_family(model, f)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x424c_4f43);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (k, p) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        worst = worst.max(set.eval(k, p).max_abs_diff(&superops_from_kraus(&family, k, p)));
    }
    Ok(worst)
}

/// As [`superops_consistency`] against central differences of step `h`.
pub fn superops_fd_consistency(model: Model, f: f64, samples: usize, h: f64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    let set = build_superops(model, f)?;
    let family = build_family(model, f)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x4644_4946);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (k, p) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        worst = worst.max(set.eval(k, p).max_abs_diff(&superops_finite_difference(&family, k, p, h)));
    }
    Ok(worst)
}

/// Largest deviation of the broken-line partial sums
/// `Σ_{m ≤ t} Tr T_k L^{m-1} ρ0 = 2 (1 - f) t r0` and `Σ_{m ≤ t} Tr T_p L^{m-1} ρ0 = 2 t r0`
/// for `t ≤ t_max`, over seeded random nodes and coin operators.
pub fn trace_identity_deviation(f: f64, samples: usize, t_max: usize) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    let set = build_superops(Model::BrokenLine, f)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5452_4143);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (k, p) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let s = set.eval(k, p);
        let r0 = 0.5;
        let mut v = nalgebra::Vector4::new(re(r0), re(rng.random_range(-0.3..0.3)), re(rng.random_range(-0.3..0.3)), re(rng.random_range(-0.3..0.3)));
        let (mut sk, mut sp) = (re(0.0), re(0.0));
        for t in 1..=t_max {
            sk += (s.t_k * v)[0] * 2.0;
            sp += (s.t_p * v)[0] * 2.0;
            v = s.l * v;
            let t = t as f64;
            worst = worst.max((sk - re(2.0 * (1.0 - f) * t * r0)).norm()).max((sp - re(2.0 * r0 * t)).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const FS: [f64; 6] = [0.0, 0.1, 0.3, 0.5, 0.9, 1.0];

    #[test]
    fn closed_forms_match_kraus_assembly() {
        for model in Model::ALL {
            for f in FS {
                let dev = superops_consistency(model, f, 50).unwrap();
                assert!(dev < 1e-12, "{model} f={f}: {dev:e}");
            }
        }
    }

    #[test]
    fn finite_difference_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for model in [Model::BrokenLine, Model::CoinMeasure] {
            let set = build_superops(model, 0.37).unwrap();
            let fam = build_family(model, 0.37).unwrap();
            for _ in 0..20 {
                let (k, p) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
                let fd = superops_finite_difference(&fam, k, p, 1e-6);
                assert!(set.eval(k, p).max_abs_diff(&fd) < 1e-5);
            }
        }
    }

    #[test]
    fn adjoints_are_conjugates_and_r0_is_kept() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for model in Model::ALL {
            for f in FS {
                let fam = build_family(model, f).unwrap();
                for _ in 0..100 {
                    let (k, p) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
                    let s = superops_from_kraus(&fam, k, p);
                    assert!((s.k_dag - s.k.map(|z| z.conj())).norm() < 1e-12);
                    assert!((s.p_dag - s.p.map(|z| z.conj())).norm() < 1e-12);
                    let top = s.l.row(0);
                    assert!((top[0] - re(1.0)).norm() < 1e-12);
                    assert!(top.iter().skip(1).all(|z| z.norm() < 1e-12));
                }
            }
        }
    }

    #[test]
    fn coherent_m_block() {
        let (k, p) = (0.7, -0.4);
        let m = build_superops(Model::BrokenLine, 0.0).unwrap().eval(k, p).m();
        let (s2k, c2k) = (2.0 * k).sin_cos();
        let (s2p, c2p) = (2.0 * p).sin_cos();
        let want = Matrix3::new(c2p, -c2k * s2p, s2k * s2p, s2p, c2k * c2p, -c2p * s2k, 0.0, s2k, c2k);
        assert!((m - want.map(re)).norm() < 1e-15);
    }

    #[test]
    fn measured_coin_loses_coherence() {
        let s = build_superops(Model::CoinMeasure, 1.0).unwrap().eval(0.3, 1.2);
        assert_eq!(s.l[(1, 1)], re(0.0));
    }

    #[test]
    fn trace_sums_of_second_derivative_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for f in [0.0, 0.2, 0.6, 1.0] {
            let set = build_superops(Model::BrokenLine, f).unwrap();
            for _ in 0..5 {
                let (k, p) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
                let s = set.eval(k, p);
                let mut v = nalgebra::Vector4::new(re(0.5), re(0.1), re(-0.3), re(0.2));
                let (mut sk, mut sp) = (re(0.0), re(0.0));
                for t in 1..=50 {
                    sk += (s.t_k * v)[0] * 2.0;
                    sp += (s.t_p * v)[0] * 2.0;
                    v = s.l * v;
                    let r0 = 0.5;
                    assert!((sk - re(2.0 * (1.0 - f) * t as f64 * r0)).norm() < 1e-9);
                    assert!((sp - re(2.0 * r0 * t as f64)).norm() < 1e-9);
                }
            }
        }
    }
}
