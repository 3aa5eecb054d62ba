//! Finite-statistics pipeline: heterodyne samples of a marginal Husimi
//! distribution, a Gaussian mixture fit, and repetition-based confidence
//! intervals for the Rényi–Wehrl witnesses.

mod gmm;
mod study;

use std::io::{Read, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distribution::QDistribution;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use gmm::{fit_gmm, GmmConfig, GmmFit};
pub use study::{bootstrap_confidence, quantile, witness_from_samples, BootstrapRow, BootstrapTable};

/// Sampled `(r, s)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SampleSet<T: Real> {
    pub points: Vec<[T; 2]>,
    pub seed: u64,
    /// Where the points came from, e.g. `heterodyne:gaussian-mixture`.
    pub source: String,
}

impl<T: Real> SampleSet<T> {
    pub fn new(points: Vec<[T; 2]>, seed: u64, source: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Input("no samples".into()));
        }
        if let Some(i) = points.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Input(format!("sample {i} is not finite")));
        }
        Ok(Self {
            points,
            seed,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sample mean and (biased) sample covariance.
    pub fn moments(&self) -> ([T; 2], crate::gaussian::Cov2<T>) {
        let n = T::lit(self.len() as f64);
        let (mut mr, mut ms) = (T::zero(), T::zero());
        for p in &self.points {
            mr = mr + p[0];
            ms = ms + p[1];
        }
        let (mr, ms) = (mr / n, ms / n);
        let (mut xx, mut xy, mut yy) = (T::zero(), T::zero(), T::zero());
        for p in &self.points {
            let (a, b) = (p[0] - mr, p[1] - ms);
            xx = xx + a * a;
            xy = xy + a * b;
            yy = yy + b * b;
        }
        ([mr, ms], crate::gaussian::Cov2::new(xx / n, xy / n, yy / n))
    }

    /// Reads a CSV with header `r,s`. Lines starting with `#` are skipped.
    pub fn from_csv(reader: impl Read, source: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "s" {
            return Err(Error::Input(format!(
                "expected header `r,s`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Input(format!("line {}: {e}", i + 2)))?;
            let parse = |k: usize| -> Result<T> {
                rec[k]
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Input(format!("line {}, column {}: {e}", i + 2, &headers[k])))
            };
            points.push([parse(0)?, parse(1)?]);
        }
        Self::new(points, 0, source)
    }

    /// Writes the points as CSV with header `r,s`.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Input(e.to_string());
        w.write_record(["r", "s"]).map_err(io)?;
        for p in &self.points {
            w.write_record([format!("{}", p[0]), format!("{}", p[1])]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Input(e.to_string()))
    }
}

/// Deterministic generator for stream `stream` of `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exact i.i.d. draws from a Gaussian or Gaussian-mixture Q-distribution:
/// a component by weight, then a bivariate normal.
pub fn sample_heterodyne<T: Real>(q: &QDistribution<T>, n: usize, seed: u64) -> Result<SampleSet<T>> {
    sample_with(q, n, &mut seeded_rng(seed, 0), seed)
}

pub(crate) fn sample_with<T: Real>(
    q: &QDistribution<T>,
    n: usize,
    rng: &mut ChaCha8Rng,
    seed: u64,
) -> Result<SampleSet<T>> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let (weights, comps) = match q {
        QDistribution::Gaussian(g) => (vec![T::one()], vec![*g]),
        QDistribution::GaussianMixture(m) => (m.weights.clone(), m.components.clone()),
        other => {
            return Err(Error::UnsupportedSampler(format!(
                "exact sampling needs a Gaussian or Gaussian mixture, got {}",
                other.kind().label()
            )))
        }
    };
    let factors = comps.iter().map(|g| g.cov.cholesky()).collect::<Result<Vec<_>>>()?;
    let cumulative: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w.as_f64();
            Some(*acc)
        })
        .collect();
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
        let c = cumulative.iter().position(|&c| u < c).unwrap_or(comps.len() - 1);
        let (l11, l21, l22) = factors[c];
        let z1 = T::lit(rng.sample::<f64, _>(StandardNormal));
        let z2 = T::lit(rng.sample::<f64, _>(StandardNormal));
        let m = comps[c].mean;
        points.push([m[0] + l11 * z1, m[1] + l21 * z1 + l22 * z2]);
    }
    SampleSet::new(points, seed, format!("heterodyne:{}", q.kind().label()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Branch, NonLocalFrame};
    use crate::states::{tmsv_mixture_q, TmsvMixtureParams};

    fn mixture(p: f64, r: f64) -> QDistribution<f64> {
        let params = TmsvMixtureParams {
            lambda: 0.8,
            displacement_r: r,
            weight_p: p,
        };
        tmsv_mixture_q(&params, &NonLocalFrame::unit(Branch::Plus)).unwrap()
    }

    #[test]
    fn sample_variance_matches_tmsv() {
        let s = sample_heterodyne(&mixture(0.0, 0.0), 100_000, 7).unwrap();
        let (_, c) = s.moments();
        assert!((c.xx - 2.0 / 1.8).abs() < 0.02);
        assert!((c.yy - 2.0 / 1.8).abs() < 0.02);
    }

    #[test]
    fn same_seed_same_samples() {
        let q = mixture(0.3, 2.0);
        assert_eq!(
            sample_heterodyne(&q, 50, 3).unwrap(),
            sample_heterodyne(&q, 50, 3).unwrap()
        );
        assert_ne!(
            sample_heterodyne(&q, 50, 3).unwrap(),
            sample_heterodyne(&q, 50, 4).unwrap()
        );
    }

    #[test]
    fn component_means() {
        let (m1, _) = sample_heterodyne(&mixture(1.0, 2.0), 20_000, 1).unwrap().moments();
        let (m0, _) = sample_heterodyne(&mixture(0.0, 2.0), 20_000, 1).unwrap().moments();
        assert!((m1[0] + 2.0).abs() < 0.05, "{m1:?}");
        assert!((m0[0] - 2.0).abs() < 0.05, "{m0:?}");
    }

    #[test]
    fn csv_round_trip() {
        let s = sample_heterodyne(&mixture(0.3, 2.0), 20, 9).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = SampleSet::<f64>::from_csv(buf.as_slice(), "file").unwrap();
        assert_eq!(back.points, s.points);
    }

    #[test]
    fn csv_rejects_bad_header_and_values() {
        assert!(SampleSet::<f64>::from_csv("x,y\n1,2\n".as_bytes(), "t").is_err());
        let err = SampleSet::<f64>::from_csv("r,s\n1,abc\n".as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(SampleSet::<f64>::from_csv("# schema=1\nr,s\n1,2\n".as_bytes(), "t").is_ok());
    }

    #[test]
    fn non_mixture_is_unsupported() {
        let q = crate::states::example_state_q(&crate::states::ExampleStateParams::new(2.0, 1.0)).unwrap();
        assert!(matches!(
            sample_heterodyne(&q, 10, 0),
            Err(Error::UnsupportedSampler(_))
        ));
    }
}
