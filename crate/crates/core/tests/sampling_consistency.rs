use husimi_core::distribution::vacuum_reference;
use husimi_core::frame::{Branch, NonLocalFrame};
use husimi_core::quadrature::Quadrature;
use husimi_core::sampling::{bootstrap_confidence, sample_heterodyne, witness_from_samples, GmmConfig};
use husimi_core::states::{tmsv_mixture_q, TmsvMixtureParams};
use proptest::prelude::*;

fn unit() -> NonLocalFrame<f64> {
    NonLocalFrame::unit(Branch::Plus)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn single_gaussian_estimate_converges(seed in any::<u64>()) {
        let frame = unit();
        let quad = Quadrature::default();
        let q = tmsv_mixture_q(&TmsvMixtureParams::tmsv(0.8), &frame).unwrap();
        let exact = -(1.8f64.ln());
        let gmm = GmmConfig { seed, ..GmmConfig::default() };
        let small = witness_from_samples(&sample_heterodyne(&q, 1_000, seed).unwrap(), 1.0, &frame, 1, &gmm, &quad).unwrap();
        let large = witness_from_samples(&sample_heterodyne(&q, 30_000, seed).unwrap(), 1.0, &frame, 1, &gmm, &quad).unwrap();
        prop_assert!((small.value - exact).abs() < 0.2, "n=1e3: {}", small.value);
        prop_assert!((large.value - exact).abs() < 0.05, "n=3e4: {}", large.value);
    }
}

#[test]
fn estimator_error_shrinks_with_sample_size() {
    let frame = unit();
    let quad = Quadrature::default();
    let q = tmsv_mixture_q(&TmsvMixtureParams::tmsv(0.8), &frame).unwrap();
    let exact = -(1.8f64.ln());
    let mut prev = f64::INFINITY;
    for n in [1_000, 10_000, 100_000] {
        // root-mean-square error over a handful of seeds
        let rms = ((0..8u64)
            .map(|seed| {
                let s = sample_heterodyne(&q, n, seed).unwrap();
                let w = witness_from_samples(&s, 1.0, &frame, 1, &GmmConfig::default(), &quad).unwrap();
                (w.value - exact).powi(2)
            })
            .sum::<f64>()
            / 8.0)
            .sqrt();
        assert!(rms < prev, "n={n}: rms {rms} did not shrink from {prev}");
        prev = rms;
    }
    assert!(prev < 0.01, "{prev}");
}

#[test]
fn mixture_is_certified_at_large_beta_in_most_seeds() {
    let frame = unit();
    let quad = Quadrature::default();
    let params = TmsvMixtureParams {
        lambda: 0.8,
        displacement_r: 2.0,
        weight_p: 0.3,
    };
    let q = tmsv_mixture_q(&params, &frame).unwrap();
    let negative = (0..10u64)
        .filter(|&seed| {
            let s = sample_heterodyne(&q, 1_000, seed).unwrap();
            let gmm = GmmConfig {
                seed,
                ..GmmConfig::default()
            };
            witness_from_samples(&s, 10.0, &frame, 2, &gmm, &quad).unwrap().value < 0.0
        })
        .count();
    assert!(negative > 5, "{negative} of 10");
}

#[test]
fn vacuum_is_not_certified_at_ninety_five_percent() {
    let frame = unit();
    let quad = Quadrature::default();
    let vac = vacuum_reference(&frame);
    let table = bootstrap_confidence(
        &vac,
        1_000,
        100,
        &[0.5, 1.0, 10.0],
        2,
        &frame,
        17,
        &GmmConfig::default(),
        &quad,
    )
    .unwrap();
    for row in &table.rows {
        assert!(row.q95 >= 0.0, "beta={}: q95={}", row.beta, row.q95);
    }
}
