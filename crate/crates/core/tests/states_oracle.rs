use husimi_core::distribution::{total_mass, vacuum_reference};
use husimi_core::frame::{Branch, NonLocalFrame};
use husimi_core::phase_space::ExampleGlobal;
use husimi_core::quadrature::Quadrature;
use husimi_core::states::{example_state_q, reference_states, tmsv_mixture_q, ExampleStateParams, TmsvMixtureParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `|⟨α₁ α₂|ψ⟩|²` by a dense position-space sum, with
/// `⟨x|α⟩ = π^{−1/4} exp(−(x−r)²/2 + i s x − i r s/2)`.
fn brute_force_q(sp: f64, sm: f64, z: [f64; 4]) -> f64 {
    let [r1, s1, r2, s2] = z;
    let norm = 1.0 / (std::f64::consts::PI * sp.powi(3) * sm).sqrt();
    let psi = |x1: f64, x2: f64| {
        let (xp, xm) = (x1 + x2, x1 - x2);
        norm * xp * (-xp * xp / (4.0 * sp * sp) - xm * xm / (4.0 * sm * sm)).exp()
    };
    let (h, n) = (0.04, 300i32);
    let kernel_pref = std::f64::consts::PI.powf(-0.5);
    let (mut re, mut im) = (0.0, 0.0);
    let mut mass = 0.0;
    for i in -n..=n {
        let x1 = i as f64 * h;
        for j in -n..=n {
            let x2 = j as f64 * h;
            let p = psi(x1, x2);
            mass += p * p;
            let mag = kernel_pref * (-(x1 - r1).powi(2) / 2.0 - (x2 - r2).powi(2) / 2.0).exp() * p;
            // conjugated kernel carries exp(−i (s₁x₁ + s₂x₂))
            let phase = -(s1 * x1 + s2 * x2);
            re += mag * phase.cos();
            im += mag * phase.sin();
        }
    }
    assert!((mass * h * h - 1.0).abs() < 1e-8, "wave function norm {}", mass * h * h);
    (re * re + im * im) * h.powi(4)
}

#[test]
fn example_global_matches_coherent_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10 {
        let sp = rng.random_range(0.6..2.0);
        let sm = rng.random_range(0.6..2.0);
        let z: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.5..2.5));
        let closed = ExampleGlobal::new(sp, sm).unwrap().density(z);
        let brute = brute_force_q(sp, sm, z);
        assert!(
            (closed - brute).abs() < 1e-6,
            "sp={sp} sm={sm} z={z:?}: {closed} vs {brute}"
        );
    }
}

#[test]
fn catalogue_marginals_are_normalized() {
    let quad = Quadrature::default();
    let frame = NonLocalFrame::<f64>::unit(Branch::Plus);
    for (name, q) in reference_states::<f64>() {
        let m = total_mass(&q, &quad).unwrap();
        assert!((m - 1.0).abs() < 1e-8, "{name}: mass {m}");
        // the 1/(a₁b₁ + a₂b₂) bound only holds for separable inputs
        if name.starts_with("vacuum") || name.starts_with("thermal") {
            assert!(
                q.peak() <= 1.0 / frame.normalization() + 1e-12,
                "{name}: peak {}",
                q.peak()
            );
        }
    }
}

#[test]
fn weak_squeezing_degenerates_to_vacuum() {
    let frame = NonLocalFrame::<f64>::unit(Branch::Plus);
    let q = tmsv_mixture_q(&TmsvMixtureParams::tmsv(1e-12), &frame).unwrap();
    let vac = vacuum_reference(&frame);
    for (r, s) in [(0.0, 0.0), (1.3, -0.4), (-2.0, 3.1)] {
        assert!((q.density(r, s) - vac.density(r, s)).abs() < 1e-10);
    }
}

#[test]
fn example_state_vanishes_at_origin_only_globally() {
    let g = ExampleGlobal::<f64>::new(1.4, 0.8).unwrap();
    assert!(g.density([0.0; 4]).abs() < 1e-15);
    assert!(brute_force_q(1.4, 0.8, [0.0; 4]).abs() < 1e-10);
    // the marginal integrates over the non-kept pair, which does not vanish
    let q = example_state_q(&ExampleStateParams::new(1.4, 0.8)).unwrap();
    assert!(q.density(0.0, 0.0) > 1e-3, "{}", q.density(0.0, 0.0));
}
