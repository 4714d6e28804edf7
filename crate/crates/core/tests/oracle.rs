//! Library results against independent oracles and frozen reference values.

mod common;

use common::{augmented_output_cm, random_params, random_stable, rng, routh_hurwitz_stable};
use optomech_cv::dynamics::lyapunov_cm;
use optomech_cv::spectral::{output_cm, reduce_two_mode, unfiltered_cm, OutputFilters};
use optomech_cv::{build, derive, log_negativity, stability, PhysicalParams};

fn max_rel_diff(a: &nalgebra::Matrix6<f64>, b: &nalgebra::Matrix6<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

// (Q, τ, Ω_l/Ω_m, [L, R, c, c′], E_N of the block) from an independent
// dense Lyapunov solution of the filter-augmented system.
const FROZEN: [(f64, f64, f64, [f64; 4], f64); 4] = [
    (
        1.5e5,
        1e-6,
        1.0,
        [
            2.069604378551943,
            2.0002239757630376,
            1.8262917053875083,
            0.02542395770712482,
        ],
        0.8765119568590146,
    ),
    (
        1e4,
        1e-6,
        1.0,
        [
            3.594661539003751,
            2.5439573946252847,
            2.601174951727612,
            0.08476408070010702,
        ],
        0.18811576045988132,
    ),
    (
        1.5e5,
        5e-6,
        1.0,
        [
            1.7455924463771426,
            1.676135872301864,
            1.591094015134331,
            -0.010096810916397855,
        ],
        1.432471003696681,
    ),
    (
        1.5e5,
        1e-6,
        0.8,
        [
            21.81321373720551,
            2.0002239757630234,
            1.2175181847846714,
            -1.1518710045584015,
        ],
        0.0,
    ),
];

#[test]
fn frozen_reference_blocks() {
    for (q, tau, ratio, [l, r, c, cp], en) in FROZEN {
        let base = PhysicalParams::reference();
        let p = PhysicalParams {
            quality: q,
            filter_tau_l: tau,
            filter_tau_r: tau,
            filter_omega_l: ratio * base.omega_m,
            ..base
        };
        let model = build(&derive(&p).unwrap());
        let cm = output_cm(&model, &OutputFilters::from_params(&p).unwrap()).unwrap();
        let b = reduce_two_mode(&cm);
        for (got, want) in [(b.big_l, l), (b.big_r, r), (b.c, c), (b.c_prime, cp)] {
            assert!(
                (got - want).abs() < 1e-8,
                "Q={q} τ={tau} ratio={ratio}: {got} vs {want}"
            );
        }
        assert!((log_negativity(&b).unwrap() - en).abs() < 1e-8);
    }
}

#[test]
fn filtered_output_matches_augmented_lyapunov() {
    let mut cases = vec![PhysicalParams::reference()];
    let mut g = rng(7);
    cases.extend((0..12).map(|_| random_stable(&mut g).0));
    for p in cases {
        let model = build(&derive(&p).unwrap());
        let filters = OutputFilters::from_params(&p).unwrap();
        let cm = output_cm(&model, &filters).unwrap();
        let oracle = augmented_output_cm(&model, &filters);
        let d = max_rel_diff(&oracle, &cm.matrix);
        assert!(d < 1e-7, "relative deviation {d:e} for {p:?}");
    }
}

#[test]
fn unfiltered_integral_matches_lyapunov() {
    let mut g = rng(11);
    for _ in 0..8 {
        let (_, model) = random_stable(&mut g);
        let v = lyapunov_cm(&model).unwrap();
        let cm = unfiltered_cm(&model).unwrap();
        assert!(max_rel_diff(&v, &cm.matrix) < 1e-8);
    }
}

#[test]
fn eigenvalue_stability_agrees_with_routh_hurwitz() {
    let mut g = rng(3);
    let mut seen = [0usize; 2];
    for i in 0..400 {
        let mut p = random_params(&mut g);
        // push a share of the draws into the unstable region
        if i % 2 == 0 {
            p.power_l *= 40.0;
            p.power_r *= 40.0;
        }
        let model = build(&derive(&p).unwrap());
        let report = stability(&model).unwrap();
        let scale = model.drift.amax();
        if report.margin.abs() < 1e-7 * scale {
            continue;
        }
        assert_eq!(report.stable, routh_hurwitz_stable(&model.drift), "{p:?}");
        seen[report.stable as usize] += 1;
    }
    assert!(seen[0] > 20 && seen[1] > 20, "{seen:?}");
}
