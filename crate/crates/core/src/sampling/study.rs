use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{renyi_wehrl_witness, WitnessReport};
use crate::distribution::QDistribution;
use crate::error::{Error, Result};
use crate::frame::NonLocalFrame;
use crate::quadrature::Quadrature;
use crate::scalar::Real;

use super::{fit_gmm, sample_with, seeded_rng, GmmConfig, GmmFit, SampleSet};

fn fit_diagnostics<T: Real>(fit: &GmmFit<T>, n: usize) -> serde_json::Value {
    serde_json::json!({
        "samples": n,
        "fit": fit,
    })
}

fn witnesses_for_fit<T: Real>(
    fit: &GmmFit<T>,
    betas: &[T],
    frame: &NonLocalFrame<T>,
    quad: &Quadrature,
) -> Result<Vec<WitnessReport<T>>> {
    let q = fit.to_q()?;
    betas.iter().map(|&b| renyi_wehrl_witness(&q, b, frame, quad)).collect()
}

/// Fits a `k`-component mixture to the samples and evaluates the Rényi–Wehrl
/// witness of the fitted density; the report carries the fit.
pub fn witness_from_samples<T: Real>(
    samples: &SampleSet<T>,
    beta: T,
    frame: &NonLocalFrame<T>,
    k: usize,
    gmm: &GmmConfig,
    quad: &Quadrature,
) -> Result<WitnessReport<T>> {
    let fit = fit_gmm(samples, k, gmm)?;
    let q = fit.to_q()?;
    Ok(renyi_wehrl_witness(&q, beta, frame, quad)?
        .with_param("k", k)
        .with_diagnostics(fit_diagnostics(&fit, samples.len())))
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile<T: Real>(sorted: &[T], p: f64) -> T {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (i, frac) = (h.floor() as usize, h - h.floor());
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + T::lit(frac) * (sorted[i + 1] - sorted[i])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BootstrapRow<T: Real> {
    pub beta: T,
    pub mean: T,
    pub q05: T,
    pub q95: T,
    /// Fraction of successful repetitions whose verdict is `Witnessed`.
    pub frac_witnessed: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BootstrapTable<T: Real> {
    pub rows: Vec<BootstrapRow<T>>,
    pub reps: usize,
    /// Repetitions whose fit or evaluation failed; they are excluded from
    /// the statistics.
    pub failures: usize,
}

/// Repeats sample → fit → evaluate `reps` times. Repetition `i` draws from
/// stream `i` of `seed` and fits with restarts seeded by `seed + i`, so the
/// table does not depend on thread scheduling.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_confidence<T: Real>(
    q: &QDistribution<T>,
    n: usize,
    reps: usize,
    betas: &[T],
    k: usize,
    frame: &NonLocalFrame<T>,
    seed: u64,
    gmm: &GmmConfig,
    quad: &Quadrature,
) -> Result<BootstrapTable<T>> {
    if reps < 2 {
        return Err(Error::param("reps", "must be at least 2"));
    }
    if betas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    // surface sampler errors before spawning repetitions
    sample_with(q, 1, &mut seeded_rng(seed, 0), seed)?;
    let outcomes: Vec<Option<Vec<WitnessReport<T>>>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let samples = sample_with(q, n, &mut seeded_rng(seed, i as u64), seed).ok()?;
            let cfg = GmmConfig {
                seed: seed.wrapping_add(i as u64),
                ..*gmm
            };
            let fit = fit_gmm(&samples, k, &cfg).ok()?;
            witnesses_for_fit(&fit, betas, frame, quad).ok()
        })
        .collect();
    let ok: Vec<&Vec<WitnessReport<T>>> = outcomes.iter().flatten().collect();
    let failures = reps - ok.len();
    if ok.len() < 2 {
        return Err(Error::Fit(format!("{failures} of {reps} repetitions failed")));
    }
    let m = T::lit(ok.len() as f64);
    let rows = betas
        .iter()
        .enumerate()
        .map(|(b, &beta)| {
            let mut values: Vec<T> = ok.iter().map(|r| r[b].value).collect();
            let witnessed = ok.iter().filter(|r| r[b].is_witnessed()).count();
            let mean = values.iter().copied().sum::<T>() / m;
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite witness values"));
            BootstrapRow {
                beta,
                mean,
                q05: quantile(&values, 0.05),
                q95: quantile(&values, 0.95),
                frac_witnessed: T::lit(witnessed as f64) / m,
            }
        })
        .collect();
    Ok(BootstrapTable { rows, reps, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Branch;
    use crate::sampling::sample_heterodyne;
    use crate::states::{tmsv_mixture_q, TmsvMixtureParams};

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert!((quantile(&v, 0.05) - 1.2).abs() < 1e-12);
        assert_eq!(quantile(&v, 1.0), 5.0);
    }

    #[test]
    fn single_component_fit_is_gaussian_equivalent() {
        let frame = NonLocalFrame::<f64>::unit(Branch::Plus);
        let q = tmsv_mixture_q(&TmsvMixtureParams::tmsv(0.8), &frame).unwrap();
        let s = sample_heterodyne(&q, 2000, 3).unwrap();
        let quad = Quadrature::default();
        let r = witness_from_samples(&s, 1.0, &frame, 1, &GmmConfig::default(), &quad).unwrap();
        let fit = fit_gmm(&s, 1, &GmmConfig::default()).unwrap();
        let expect = 0.5 * (fit.covariances[0].det() / 4.0).ln();
        assert!((r.value - expect).abs() < 1e-9);
        assert!(r.diagnostics.is_some());
    }

    #[test]
    fn table_is_reproducible() {
        let frame = NonLocalFrame::<f64>::unit(Branch::Plus);
        let q = tmsv_mixture_q(&TmsvMixtureParams::tmsv(0.5), &frame).unwrap();
        let quad = Quadrature::default();
        let run =
            || bootstrap_confidence(&q, 200, 2, &[1.0, 2.0], 1, &frame, 42, &GmmConfig::default(), &quad).unwrap();
        assert_eq!(run(), run());
    }
}
