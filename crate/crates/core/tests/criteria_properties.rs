use husimi_core::criteria::{
    renyi_wehrl_entropy, renyi_wehrl_witness, second_moment_witness, witness_general, ConcaveFunction,
};
use husimi_core::distribution::{covariance_of, CovarianceSummary, QDistribution};
use husimi_core::frame::{Branch, NonLocalFrame};
use husimi_core::gaussian::Cov2;
use husimi_core::phase_space::{apply_local_rotation, marginalize_mixed, Gaussian4, GlobalQ, MarginalGrid};
use husimi_core::quadrature::Quadrature;
use husimi_core::states::{example_state_q, reference_states, ExampleStateParams};
use proptest::prelude::*;

fn unit() -> NonLocalFrame<f64> {
    NonLocalFrame::unit(Branch::Plus)
}

fn gaussian(vr: f64, vs: f64, rho: f64) -> QDistribution<f64> {
    let c = rho * (vr * vs).sqrt();
    QDistribution::gaussian([0.0, 0.0], Cov2::new(vr, c, vs)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gaussian_witness_equals_half_log_det_ratio(
        vr in 0.3f64..6.0,
        vs in 0.3f64..6.0,
        rho in -0.9f64..0.9,
    ) {
        let q = gaussian(vr, vs, rho);
        let frame = unit();
        let quad = Quadrature::default();
        let det = vr * vs * (1.0 - rho * rho);
        let expect = 0.5 * (det / 4.0).ln();
        let moments = second_moment_witness(&CovarianceSummary::husimi([0.0, 0.0], q.analytic_moments().unwrap().1), &frame).unwrap();
        for beta in [0.3, 0.7, 1.0, 2.0, 5.0, 10.0] {
            let w = renyi_wehrl_witness(&q, beta, &frame, &quad).unwrap();
            prop_assert!((w.value - expect).abs() < 1e-6, "beta={} value={} expect={}", beta, w.value, expect);
            if (det - 4.0).abs() > 1e-6 {
                prop_assert_eq!(w.verdict, moments.verdict);
            }
        }
    }

    #[test]
    fn quadrature_moments_match_analytic(
        vr in 0.3f64..6.0,
        vs in 0.3f64..6.0,
        rho in -0.9f64..0.9,
        mr in -2.0f64..2.0,
        ms in -2.0f64..2.0,
    ) {
        let c = rho * (vr * vs).sqrt();
        let q = QDistribution::gaussian([mr, ms], Cov2::new(vr, c, vs)).unwrap();
        let m = covariance_of(&q, &Quadrature::default()).unwrap();
        prop_assert!((m.mean_r - mr).abs() < 1e-8 && (m.mean_s - ms).abs() < 1e-8);
        prop_assert!((m.var_r - vr).abs() < 1e-8 && (m.var_s - vs).abs() < 1e-8 && (m.cov_rs - c).abs() < 1e-8);
    }
}

#[test]
fn vacuum_is_zero_for_every_registered_function() {
    let frame = unit();
    let vac = husimi_core::distribution::vacuum_reference(&frame);
    let quad = Quadrature::default();
    for f in ConcaveFunction::<f64>::registry() {
        let w = witness_general(&vac, &f, &frame, &quad).unwrap();
        assert!(w.value.abs() < 1e-8, "{}: {}", f.label(), w.value);
        assert!(!w.is_witnessed());
    }
}

#[test]
fn wehrl_entropy_respects_max_entropy_bound() {
    let quad = Quadrature::default();
    for (name, q) in reference_states::<f64>() {
        let s1 = renyi_wehrl_entropy(&q, 1.0, &quad).unwrap().value;
        let det = covariance_of(&q, &quad).unwrap().det();
        assert!(
            s1 <= 1.0 + 0.5 * det.ln() + 1e-8,
            "{name}: S1={s1} bound={}",
            1.0 + 0.5 * det.ln()
        );
    }
}

#[test]
fn power_witness_verdict_matches_renyi_wehrl() {
    let frame = unit();
    let quad = Quadrature::default();
    for (name, q) in reference_states::<f64>() {
        for beta in [0.3, 0.7, 2.0, 5.0] {
            let f = if beta < 1.0 {
                ConcaveFunction::power(beta).unwrap()
            } else {
                ConcaveFunction::neg_power(beta).unwrap()
            };
            let general = witness_general(&q, &f, &frame, &quad).unwrap();
            let renyi = renyi_wehrl_witness(&q, beta, &frame, &quad).unwrap();
            if renyi.value.abs() > 1e-6 {
                assert_eq!(general.verdict, renyi.verdict, "{name} beta={beta}");
                assert_eq!(general.value < 0.0, renyi.value < 0.0, "{name} beta={beta}");
            }
        }
    }
}

fn squeezed_global() -> GlobalQ<f64> {
    // arbitrary positive-definite covariance without rotational symmetry
    let b = [
        [1.1, 0.3, -0.2, 0.4],
        [0.0, 0.7, 0.5, -0.1],
        [0.2, 0.0, 1.3, 0.3],
        [-0.3, 0.2, 0.0, 0.9],
    ];
    let mut cov = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            cov[i][j] = (0..4).map(|k| b[i][k] * b[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
        }
    }
    GlobalQ::Gaussian(Gaussian4::new(cov).unwrap())
}

#[test]
fn opposite_local_rotations_rotate_the_marginal_rigidly() {
    let quad = Quadrature::default();
    let global = squeezed_global();
    let grid = MarginalGrid::default();
    for branch in Branch::BOTH {
        let base = NonLocalFrame::<f64>::unit(branch);
        let q0 = marginalize_mixed(&apply_local_rotation(&global, &base).unwrap(), branch, &grid, &quad).unwrap();
        for theta in [0.4, -1.1, 2.5] {
            let frame = NonLocalFrame::new(theta, -theta, 1.0, 1.0, 1.0, 1.0, branch).unwrap();
            let q = marginalize_mixed(&apply_local_rotation(&global, &frame).unwrap(), branch, &grid, &quad).unwrap();
            let (sn, cs) = (-theta).sin_cos();
            for (r, s) in [(0.3, -0.8), (1.7, 0.2), (-2.1, -1.4)] {
                let (rr, ss) = (cs * r - sn * s, sn * r + cs * s);
                assert!(
                    (q.density(rr, ss) - q0.density(r, s)).abs() < 1e-8,
                    "{branch:?} theta={theta}"
                );
            }
            for beta in [0.5, 1.0, 3.0] {
                let a = renyi_wehrl_witness(&q, beta, &frame, &quad).unwrap().value;
                let b = renyi_wehrl_witness(&q0, beta, &base, &quad).unwrap().value;
                assert!((a - b).abs() < 1e-6, "{branch:?} theta={theta} beta={beta}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn example_state_phase_is_a_plane_rotation() {
    let quad = Quadrature::default();
    let p = ExampleStateParams::new(1.7, 0.9);
    let q0 = example_state_q(&p).unwrap();
    let phi: f64 = 0.6;
    let q = example_state_q(&p.with_phi(phi)).unwrap();
    let (sn, cs) = phi.sin_cos();
    for (r, s) in [(0.3, -0.8), (1.7, 0.2), (-2.1, -1.4)] {
        let (rr, ss) = (cs * r - sn * s, sn * r + cs * s);
        assert!((q.density(rr, ss) - q0.density(r, s)).abs() < 1e-12);
    }
    for beta in [0.5, 1.0, 3.0] {
        let a = renyi_wehrl_witness(&q, beta, &unit(), &quad).unwrap().value;
        let b = renyi_wehrl_witness(&q0, beta, &unit(), &quad).unwrap().value;
        assert!((a - b).abs() < 1e-6, "beta={beta}: {a} vs {b}");
    }
}

#[test]
fn concavity_validator() {
    assert!(ConcaveFunction::<f64>::custom("square", 1.0, |t: f64| t * t).is_err());
    for beta in [0.1, 0.5, 0.9] {
        assert!(ConcaveFunction::<f64>::power(beta).is_ok());
    }
    assert!(ConcaveFunction::<f64>::custom("entropy", 10.0, |t: f64| if t > 0.0 { -t * t.ln() } else { 0.0 }).is_ok());
    assert!(ConcaveFunction::<f64>::custom("min", 10.0, |t: f64| t.min(0.3)).is_ok());
}
