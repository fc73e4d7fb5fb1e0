use aqw_core::channels::{build_family, ExactEvolution};
use aqw_core::moments::{long_time_diffusion, moment_series, recommended_grid, BlochVector};
use aqw_core::walk::moment_report;
use aqw_core::{Coin, Model};

fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(t, v)| (t.ln(), v.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[test]
fn coherent_spread_is_ballistic() {
    let sym = BlochVector::from_coin(Coin::symmetric()).unwrap();
    let s = moment_series(Model::None, 0.0, &sym, 50, recommended_grid(50)).unwrap();
    let pts: Vec<(f64, f64)> = s[10..=50].iter().map(|r| (r.t as f64, r.var_x)).collect();
    assert!((log_slope(&pts) - 2.0).abs() < 0.05);
    let pts: Vec<(f64, f64)> = s[10..=50].iter().map(|r| (r.t as f64, r.var_y)).collect();
    assert!((log_slope(&pts) - 2.0).abs() < 0.05);
}

#[test]
fn symmetric_coin_has_no_drift() {
    for (model, f) in [(Model::None, 0.0), (Model::BrokenLine, 0.4), (Model::CoinMeasure, 0.4)] {
        let family = build_family(model, f).unwrap();
        let mut evo = ExactEvolution::new(&family, Coin::symmetric());
        for t in 1..=12 {
            evo.step().unwrap();
            let m = moment_report(&evo.position_distribution(), t);
            assert!(m.mean_x.abs() < 1e-10 && m.mean_y.abs() < 1e-10, "{model:?} t={t}");
        }
    }
}

#[test]
fn broken_line_dx_falls_with_f() {
    let d: Vec<f64> = (1..=19).map(|i| long_time_diffusion(Model::BrokenLine, i as f64 / 20.0, 64).unwrap().d_x).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(d[18] < 0.03);
}

#[test]
fn broken_line_dy_grows_near_full_breakage() {
    let d = |f: f64| long_time_diffusion(Model::BrokenLine, f, 64).unwrap().d_y;
    assert!(d(0.99) > d(0.95) && d(0.95) > d(0.9) && d(0.9) > d(0.5));
}

#[test]
fn coin_measurement_closed_form() {
    for f in [0.1, 0.3, 0.6, 0.9] {
        let r = long_time_diffusion(Model::CoinMeasure, f, 64).unwrap();
        let want = (1.0 - f) * (1.0 - f) / (f * (2.0 - f)) + 0.5;
        assert!((r.d_x - want).abs() < 1e-9, "f={f}: {} vs {want}", r.d_x);
        assert!(r.divergent_y);
    }
}

#[test]
fn diffusive_variance_approaches_twice_d() {
    // The growth rate of σ² closes in on 2 D slowly; check that the gap narrows.
    let sym = BlochVector::from_coin(Coin::symmetric()).unwrap();
    for model in [Model::BrokenLine, Model::CoinMeasure] {
        let s = moment_series(model, 0.5, &sym, 120, recommended_grid(120)).unwrap();
        let target = 2.0 * long_time_diffusion(model, 0.5, 64).unwrap().d_x;
        let gap = |a: usize, b: usize| ((s[b].var_x - s[a].var_x) / (b - a) as f64 - target).abs() / target;
        let (early, late) = (gap(40, 60), gap(100, 120));
        assert!(late < early && late < 0.03, "{model:?}: gaps {early} then {late}");
    }
}
