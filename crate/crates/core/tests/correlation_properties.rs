use aqw_core::channels::{build_family, ExactEvolution};
use aqw_core::correlations::{correlation_report, CorrelationReport};
use aqw_core::{Coin, Model};

fn reports(model: Model, f: f64, t_max: usize) -> Vec<CorrelationReport> {
    let family = build_family(model, f).unwrap();
    let mut evo = ExactEvolution::new(&family, Coin::symmetric());
    (1..=t_max)
        .map(|t| {
            evo.step().unwrap();
            correlation_report(evo.rho(), t, model, f, true).unwrap()
        })
        .collect()
}

fn values(r: &CorrelationReport) -> [f64; 4] {
    [r.i_c, r.mid_xy, r.mid_xc, r.mid_yc]
}

#[test]
fn all_measures_are_finite_and_non_negative() {
    for (model, f) in [(Model::BrokenLine, 0.1), (Model::BrokenLine, 1.0), (Model::CoinMeasure, 0.5), (Model::CoinMeasure, 1.0)] {
        for r in reports(model, f, 12) {
            for v in values(&r) {
                assert!(v.is_finite() && v > -1e-9, "{model:?} f={f} t={}: {v}", r.t);
            }
        }
    }
}

#[test]
fn symmetric_coin_couples_both_walkers_equally() {
    for r in reports(Model::None, 0.0, 10) {
        let scale = r.mid_xc.max(r.mid_yc);
        assert!((r.mid_xc - r.mid_yc).abs() <= 0.05 * scale + 1e-12, "t={}: {} vs {}", r.t, r.mid_xc, r.mid_yc);
    }
}

#[test]
fn noise_suppresses_walker_correlations() {
    let clean = *reports(Model::BrokenLine, 0.0, 10).last().unwrap();
    for model in [Model::BrokenLine, Model::CoinMeasure] {
        let noisy = *reports(model, 0.5, 10).last().unwrap();
        assert!(noisy.i_c < clean.i_c && noisy.mid_xy < clean.mid_xy, "{model:?}");
        assert!(noisy.mid_xc < noisy.mid_yc, "{model:?}: noise on x hits MID(x-c) harder");
    }
}

#[test]
fn trapped_walker_shares_nothing() {
    for r in reports(Model::BrokenLine, 1.0, 10) {
        assert!(r.i_c.abs() < 1e-9 && r.mid_xy.abs() < 1e-9 && r.mid_xc.abs() < 1e-9);
    }
}

#[test]
fn measured_coin_keeps_walker_correlations() {
    let r = *reports(Model::CoinMeasure, 1.0, 10).last().unwrap();
    assert!(r.i_c > 1e-3 && r.mid_xy > 1e-3);
    assert!(r.mid_xc.abs() < 1e-9 && r.mid_yc.abs() < 1e-9);
}
