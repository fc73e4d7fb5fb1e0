#[path = "common/oracle.rs"]
mod oracle;

use aqw_core::channels::{build_family, ExactEvolution};
use aqw_core::correlations::correlation_report;
use aqw_core::{Coin, Model};
use num_complex::Complex64;
use oracle::{brute_force_series, enumerate_branches, position_ops};

fn check(model: Model, f: f64, coin: Coin) {
    let family = build_family(model, f).unwrap();
    let mut evo = ExactEvolution::new(&family, coin);
    for (t, want) in (1..=3).zip(brute_force_series(model, f, coin, 3)) {
        evo.step().unwrap();
        let r = correlation_report(evo.rho(), t, model, f, true).unwrap();
        let got = [r.i_c, r.mid_xy, r.mid_xc, r.mid_yc];
        for (name, (g, w)) in ["I_c", "MID(x-y)", "MID(x-c)", "MID(y-c)"].iter().zip(got.iter().zip(want)) {
            assert!((g - w).abs() < 1e-10, "{model:?} f={f} t={t} {name}: {g} vs {w}");
        }
    }
}

fn tilted() -> Coin {
    Coin::normalized(Complex64::new(0.8, 0.0), Complex64::new(0.36, 0.48)).unwrap()
}

#[test]
fn coherent_walk_matches_enumeration() {
    check(Model::None, 0.0, Coin::symmetric());
    check(Model::None, 0.0, tilted());
}

#[test]
fn broken_line_matches_enumeration() {
    for f in [0.3, 1.0] {
        check(Model::BrokenLine, f, Coin::symmetric());
    }
    check(Model::BrokenLine, 0.6, tilted());
}

#[test]
fn coin_measurement_matches_enumeration() {
    for f in [0.3, 1.0] {
        check(Model::CoinMeasure, f, Coin::symmetric());
    }
    check(Model::CoinMeasure, 0.6, tilted());
}

#[test]
fn enumeration_preserves_trace() {
    let ops = position_ops(Model::BrokenLine, 0.4);
    let rho = enumerate_branches(&ops, Coin::symmetric(), 2);
    assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
}
