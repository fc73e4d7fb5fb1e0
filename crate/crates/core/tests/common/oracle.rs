//! Small-instance oracle: walk on a periodic torus built from the momentum
//! matrices by discrete Fourier transform, channel output by enumerating every
//! Kraus branch, correlations from direct entropy formulas. Shared by several
//! test targets, each of which uses a subset.

#![allow(dead_code)]

use std::f64::consts::PI;

use aqw_core::{Coin, Model};
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

pub type C = Complex64;

/// Torus side; large enough that nothing wraps for t ≤ 3.
const N: usize = 9;
const DIM: usize = 2 * N * N;

fn e(x: f64) -> C {
    C::from_polar(1.0, x)
}

fn h(z: C) -> C {
    z * 0.5
}

fn re(v: f64) -> C {
    C::new(v, 0.0)
}

fn momentum_ops(model: Model, f: f64, k: f64, p: f64) -> Vec<Matrix2<C>> {
    let a = h(e(-(k + p))) + h(e(k - p));
    let b = h(e(-(k + p))) - h(e(k - p));
    let c = h(e(-(k - p))) - h(e(k + p));
    let d = h(e(-(k - p))) + h(e(k + p));
    let z = re(0.0);
    match model {
        Model::None => vec![Matrix2::new(a, b, c, d)],
        Model::BrokenLine => {
            let g = 1.0 - f;
            let s = re((f * g).sqrt());
            vec![
                Matrix2::new(a, b, c, d) * re(g),
                Matrix2::new(
                    h(e(-(k + p))) + h(e(-p)),
                    h(e(-(k + p))) - h(e(-p)),
                    h(e(-(k - p))) + h(e(p)),
                    h(e(-(k - p))) - h(e(p)),
                ) * s,
                Matrix2::new(
                    h(e(-p)) - h(e(k - p)),
                    h(e(-p)) + h(e(k - p)),
                    -h(e(p)) + h(e(k + p)),
                    -h(e(p)) - h(e(k + p)),
                ) * s,
                Matrix2::new(e(-p), z, z, -e(p)) * re(f),
            ]
        }
        Model::CoinMeasure => vec![
            Matrix2::new(a, z, c, z) * re(f.sqrt()),
            Matrix2::new(z, b, z, d) * re(f.sqrt()),
            Matrix2::new(a, b, c, d) * re((1.0 - f).sqrt()),
        ],
    }
}

fn wrap(x: i64) -> usize {
    x.rem_euclid(N as i64) as usize
}

fn idx(x: i64, y: i64, c: usize) -> usize {
    2 * (wrap(x) * N + wrap(y)) + c
}

/// Position-space operators: `E(r, r') = N⁻² Σ_{k,p} e^{-i(k·(x-x') + p·(y-y'))} F(k, p)`.
pub fn position_ops(model: Model, f: f64) -> Vec<DMatrix<C>> {
    let ks: Vec<f64> = (0..N).map(|j| 2.0 * PI * j as f64 / N as f64).collect();
    let count = momentum_ops(model, f, 0.0, 0.0).len();
    let mut kernels = vec![vec![Matrix2::<C>::zeros(); N * N]; count];
    for (dx, dy) in (0..N).flat_map(|dx| (0..N).map(move |dy| (dx, dy))) {
        for &k in &ks {
            for &p in &ks {
                let phase = e(-(k * dx as f64 + p * dy as f64)) / (N * N) as f64;
                for (n, m) in momentum_ops(model, f, k, p).into_iter().enumerate() {
                    kernels[n][dx * N + dy] += m * phase;
                }
            }
        }
    }
    kernels
        .iter()
        .map(|kern| {
            let mut m = DMatrix::zeros(DIM, DIM);
            for x in 0..N as i64 {
                for y in 0..N as i64 {
                    for xp in 0..N as i64 {
                        for yp in 0..N as i64 {
                            let blk = kern[wrap(x - xp) * N + wrap(y - yp)];
                            for c in 0..2 {
                                for cp in 0..2 {
                                    m[(idx(x, y, c), idx(xp, yp, cp))] = blk[(c, cp)];
                                }
                            }
                        }
                    }
                }
            }
            m
        })
        .collect()
}

/// `Σ_branches |ψ_b⟩⟨ψ_b|` over every length-`t` sequence of operators.
pub fn enumerate_branches(ops: &[DMatrix<C>], coin: Coin, t: usize) -> DMatrix<C> {
    let mut psi0 = DVector::zeros(DIM);
    psi0[idx(0, 0, 0)] = coin.a_r;
    psi0[idx(0, 0, 1)] = coin.a_l;
    let mut branches = vec![psi0];
    for _ in 0..t {
        branches = branches.iter().flat_map(|psi| ops.iter().map(move |e| e * psi)).collect();
    }
    let mut rho = DMatrix::zeros(DIM, DIM);
    for psi in &branches {
        rho += psi * psi.adjoint();
    }
    rho
}

fn entropy(m: &DMatrix<C>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-15)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Reduced operator on two of the three factors `(x, y, c)` with sizes `(N, N, 2)`.
fn reduce(rho: &DMatrix<C>, keep: [usize; 2]) -> DMatrix<C> {
    let sizes = [N, N, 2];
    let traced = 3 - keep[0] - keep[1];
    let (na, nb) = (sizes[keep[0]], sizes[keep[1]]);
    let full = |a: usize, b: usize, t: usize| {
        let mut v = [0; 3];
        v[keep[0]] = a;
        v[keep[1]] = b;
        v[traced] = t;
        (v[0] * N + v[1]) * 2 + v[2]
    };
    let mut out = DMatrix::zeros(na * nb, na * nb);
    for a in 0..na {
        for b in 0..nb {
            for ap in 0..na {
                for bp in 0..nb {
                    out[(a * nb + b, ap * nb + bp)] =
                        (0..sizes[traced]).map(|t| rho[(full(a, b, t), full(ap, bp, t))]).sum();
                }
            }
        }
    }
    out
}

fn marginals(rho: &DMatrix<C>, na: usize, nb: usize) -> (DMatrix<C>, DMatrix<C>) {
    let mut ra = DMatrix::zeros(na, na);
    let mut rb = DMatrix::zeros(nb, nb);
    for a in 0..na {
        for ap in 0..na {
            ra[(a, ap)] = (0..nb).map(|b| rho[(a * nb + b, ap * nb + b)]).sum();
        }
    }
    for b in 0..nb {
        for bp in 0..nb {
            rb[(b, bp)] = (0..na).map(|a| rho[(a * nb + b, a * nb + bp)]).sum();
        }
    }
    (ra, rb)
}

/// Eigenspace projectors, eigenvalues closer than `1e-9` merged.
fn eigenprojectors(m: &DMatrix<C>) -> Vec<DMatrix<C>> {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut out: Vec<DMatrix<C>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for i in order {
        let v = eig.eigenvectors.column(i);
        let proj = &v * v.adjoint();
        if eig.eigenvalues[i] - last > 1e-9 || out.is_empty() {
            out.push(proj);
        } else {
            *out.last_mut().unwrap() += proj;
        }
        last = eig.eigenvalues[i];
    }
    out
}

fn kron(a: &DMatrix<C>, b: &DMatrix<C>) -> DMatrix<C> {
    a.kronecker(b)
}

/// `I(ρ) - I(Πρ)` with `Π` the product of local spectral measurements.
fn mid_direct(rho: &DMatrix<C>, na: usize, nb: usize) -> f64 {
    let (ra, rb) = marginals(rho, na, nb);
    let info = |m: &DMatrix<C>| {
        let (a, b) = marginals(m, na, nb);
        entropy(&a) + entropy(&b) - entropy(m)
    };
    let mut measured = DMatrix::zeros(na * nb, na * nb);
    for pa in eigenprojectors(&ra) {
        for pb in eigenprojectors(&rb) {
            let q = kron(&pa, &pb);
            measured += &q * rho * &q;
        }
    }
    info(rho) - info(&measured)
}

fn classical_direct(rho: &DMatrix<C>) -> f64 {
    let mut p = vec![vec![0.0; N]; N];
    for x in 0..N {
        for y in 0..N {
            p[x][y] = (0..2).map(|c| rho[(2 * (x * N + y) + c, 2 * (x * N + y) + c)].re).sum();
        }
    }
    let px: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..N).map(|y| p.iter().map(|r| r[y]).sum()).collect();
    let mut total = 0.0;
    for x in 0..N {
        for y in 0..N {
            if p[x][y] > 1e-300 {
                total += p[x][y] * (p[x][y] / (px[x] * py[y])).log2();
            }
        }
    }
    total
}

/// `[I_c, MID(x-y), MID(x-c), MID(y-c)]` for `t = 1..=t_max`.
pub fn brute_force_series(model: Model, f: f64, coin: Coin, t_max: usize) -> Vec<[f64; 4]> {
    let ops = position_ops(model, f);
    (1..=t_max)
        .map(|t| {
            let rho = enumerate_branches(&ops, coin, t);
            [
                classical_direct(&rho),
                mid_direct(&reduce(&rho, [0, 1]), N, N),
                mid_direct(&reduce(&rho, [0, 2]), N, 2),
                mid_direct(&reduce(&rho, [1, 2]), N, 2),
            ]
        })
        .collect()
}
