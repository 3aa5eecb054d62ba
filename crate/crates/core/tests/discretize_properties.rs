use husimi_core::criteria::{renyi_wehrl_witness, second_moment_witness, witness_general, ConcaveFunction};
use husimi_core::discretize::{
    discrete_renyi_wehrl_witness, discrete_second_moment_witness, discretized_density, discretized_witness,
    tile_probabilities, Extent,
};
use husimi_core::distribution::{vacuum_reference, CovarianceSummary, QDistribution};
use husimi_core::frame::{Branch, NonLocalFrame};
use husimi_core::gaussian::Cov2;
use husimi_core::quadrature::Quadrature;
use husimi_core::states::{reference_states, tmsv_mixture_q, TmsvMixtureParams};
use proptest::prelude::*;

const DELTAS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

fn unit() -> NonLocalFrame<f64> {
    NonLocalFrame::unit(Branch::Plus)
}

#[test]
fn coarse_graining_never_lowers_a_witness() {
    let frame = unit();
    let quad = Quadrature::default();
    for (name, q) in reference_states::<f64>() {
        for f in ConcaveFunction::<f64>::registry() {
            let w = witness_general(&q, &f, &frame, &quad).unwrap().value;
            for delta in DELTAS {
                let grid = tile_probabilities(&q, delta, delta, Extent::Auto { power: f.tail_power() }, &quad).unwrap();
                let wd = discretized_witness(&grid, &f, &frame, &quad).unwrap().value;
                assert!(wd >= w - 1e-9, "{name} {} delta={delta}: {wd} < {w}", f.label());
            }
        }
    }
}

#[test]
fn discrete_witness_agrees_with_piecewise_constant_density() {
    let frame = unit();
    let quad = Quadrature::default();
    let q = tmsv_mixture_q(&TmsvMixtureParams::tmsv(0.6), &frame).unwrap();
    let grid = tile_probabilities(&q, 0.5, 0.5, Extent::Auto { power: 0.5 }, &quad).unwrap();
    let dens = discretized_density(&grid);
    for beta in [0.5, 1.0, 4.0] {
        let a = discrete_renyi_wehrl_witness(&grid, beta, &frame).unwrap().value;
        let b = renyi_wehrl_witness(&dens, beta, &frame, &quad).unwrap().value;
        assert!((a - b).abs() < 1e-9, "beta={beta}: {a} vs {b}");
    }
}

#[test]
fn separable_states_are_never_flagged() {
    let frame = unit();
    let quad = Quadrature::default();
    let states = [
        vacuum_reference(&frame),
        QDistribution::gaussian([0.0, 0.0], Cov2::new(2.5, 0.3, 2.2)).unwrap(),
    ];
    for q in &states {
        for delta in [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let grid = tile_probabilities(q, delta, delta, Extent::Auto { power: 0.05 }, &quad).unwrap();
            assert!(!discrete_second_moment_witness(&grid, &frame).unwrap().is_witnessed());
            for beta in [0.05, 0.3, 1.0, 2.0, 10.0, 20.0] {
                let w = discrete_renyi_wehrl_witness(&grid, beta, &frame).unwrap();
                assert!(w.value >= -1e-10, "delta={delta} beta={beta}: {}", w.value);
            }
            for f in ConcaveFunction::<f64>::registry() {
                let w = discretized_witness(&grid, &f, &frame, &quad).unwrap();
                assert!(w.value >= -1e-9, "delta={delta} {}: {}", f.label(), w.value);
            }
        }
    }
}

#[test]
fn vacuum_witnesses_vanish_as_tiles_shrink() {
    let frame = unit();
    let quad = Quadrature::default();
    let vac = vacuum_reference(&frame);
    let mut prev = f64::INFINITY;
    for delta in [0.4, 0.2, 0.1, 0.05] {
        let grid = tile_probabilities(&vac, delta, delta, Extent::Auto { power: 1.0 }, &quad).unwrap();
        let w = discrete_renyi_wehrl_witness(&grid, 1.0, &frame).unwrap().value;
        assert!(w >= 0.0 && w < prev);
        prev = w;
    }
    assert!(prev < 1e-3, "{prev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fine_tiles_keep_gaussian_equivalence(
        vr in 0.6f64..4.0,
        vs in 0.6f64..4.0,
        rho in -0.6f64..0.6,
    ) {
        let frame = unit();
        let quad = Quadrature::default();
        let c = rho * (vr * vs).sqrt();
        let cov = Cov2::new(vr, c, vs);
        let q = QDistribution::gaussian([0.0, 0.0], cov).unwrap();
        let grid = tile_probabilities(&q, 0.1, 0.1, Extent::Auto { power: 1.0 }, &quad).unwrap();
        let expect = 0.5 * (cov.det() / 4.0).ln();
        let w = discrete_renyi_wehrl_witness(&grid, 1.0, &frame).unwrap().value;
        prop_assert!((w - expect).abs() < 2e-3, "{} vs {}", w, expect);
        let m = discrete_second_moment_witness(&grid, &frame).unwrap().value;
        let mc = second_moment_witness(&CovarianceSummary::husimi([0.0, 0.0], cov), &frame).unwrap().value;
        prop_assert!((m - mc).abs() < 2e-3 * (1.0 + vr + vs), "{} vs {}", m, mc);
    }
}
