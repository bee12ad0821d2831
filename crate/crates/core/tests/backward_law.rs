mod common;

use common::{ks_distance, BackwardOracle};
use proptest::prelude::*;
use tailchain_core::backward::BackwardIncrementLaw;
use tailchain_core::streams::stream;
use tailchain_core::tail_index::{solve_tail_index, GarchParams};
use tailchain_core::Error;

const MODELS: [(f64, f64); 3] = [(0.99, 0.0), (0.15, 0.84), (0.04, 0.95)];

fn law(a1: f64, b1: f64) -> BackwardIncrementLaw {
    let p = GarchParams::tail(a1, b1).unwrap();
    let t = solve_tail_index(&p).unwrap();
    BackwardIncrementLaw::new(p, t.alpha).unwrap()
}

#[test]
fn oracle_mass_is_one_at_the_root() {
    for (a1, b1) in MODELS {
        let l = law(a1, b1);
        let o = BackwardOracle::new(a1, b1, l.alpha());
        assert!((o.total_mass() - 1.0).abs() < 1e-8, "{}", o.total_mass());
    }
}

#[test]
fn cdf_matches_oracle() {
    for (a1, b1) in MODELS {
        let l = law(a1, b1);
        let o = BackwardOracle::new(a1, b1, l.alpha());
        let end = l.support_end().min(20.0);
        for k in 1..60 {
            let x = end * k as f64 / 60.0;
            let lib = l.cdf(x).unwrap();
            assert!(!lib.clamped);
            assert!((lib.value - o.cdf(x)).abs() < 1e-7, "({a1},{b1}) x={x}: {} vs {}", lib.value, o.cdf(x));
        }
        assert_eq!(l.cdf(-1.0).unwrap().value, 0.0);
        assert!(l.cdf(0.0).unwrap().clamped);
        if b1 > 0.0 {
            let top = l.cdf(l.support_end()).unwrap();
            assert_eq!(top.value, 1.0);
            assert!(top.clamped);
        }
    }
}

#[test]
fn table_samples_pass_kolmogorov() {
    for (a1, b1) in MODELS {
        let l = law(a1, b1);
        let o = BackwardOracle::new(a1, b1, l.alpha());
        let table = l.build_table().unwrap();
        let mut rng = stream(11, 3);
        let mut xs: Vec<f64> = (0..200_000).map(|_| table.sample(&mut rng)).collect();
        assert!(xs.iter().all(|&x| x > 0.0 && x < l.support_end()));
        let d = ks_distance(&mut xs, |x| o.cdf(x));
        assert!(d < 0.005, "({a1},{b1}): D = {d}");
    }
}

#[test]
fn table_inverse_roundtrip() {
    let l = law(0.15, 0.84);
    let t = l.build_table().unwrap();
    for k in 1..100 {
        let u = k as f64 / 100.0;
        let x = t.inverse(u);
        assert!((t.cdf(x) - u).abs() < 1e-9);
    }
}

#[test]
fn density_integrates_to_cdf_increment() {
    let l = law(0.15, 0.84);
    let (a, b) = (0.9, 1.05);
    let mass = common::simpson(|x| l.density(x), a, b, 2000);
    let diff = l.cdf(b).unwrap().value - l.cdf(a).unwrap().value;
    assert!((mass - diff).abs() < 1e-8, "{mass} vs {diff}");
}

#[test]
fn wrong_index_is_a_consistency_error() {
    let p = GarchParams::tail(0.15, 0.84).unwrap();
    match BackwardIncrementLaw::new(p, 1.3) {
        Err(Error::Consistency { normalization }) => assert!((normalization - 1.0).abs() > 1e-3),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn table_is_monotone_and_in_support(a1 in 0.05f64..0.3, frac in 0.5f64..0.95) {
        let b1 = frac * (1.0 - a1);
        let l = law(a1, b1);
        let t = l.build_table().unwrap();
        let g = t.grid();
        let c = t.cdf_values();
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(g[0] > 0.0 && *g.last().unwrap() <= l.support_end());
        let o = BackwardOracle::new(a1, b1, l.alpha());
        for &u in &[0.1, 0.5, 0.9] {
            let x = t.inverse(u);
            prop_assert!((o.cdf(x) - u).abs() < 1e-6);
        }
    }
}
