use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::QDistribution;
use crate::error::{Error, Result};
use crate::gaussian::{Cov2, Gaussian2, GaussianMixture};
use crate::scalar::Real;

use super::{seeded_rng, SampleSet};

/// Expectation-maximization settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmConfig {
    pub restarts: usize,
    /// Stop when the mean log-likelihood per sample gains less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Floor on covariance eigenvalues.
    pub eigenvalue_floor: f64,
    pub seed: u64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            tolerance: 1e-8,
            max_iterations: 2000,
            eigenvalue_floor: 1e-6,
            seed: 0,
        }
    }
}

/// Fitted Gaussian mixture, in the probability measure `dr ds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GmmFit<T: Real> {
    pub weights: Vec<T>,
    pub means: Vec<[T; 2]>,
    pub covariances: Vec<Cov2<T>>,
    /// Total log-likelihood of the sample.
    pub log_likelihood: T,
    pub iterations: usize,
    pub converged: bool,
    /// Components removed after their weight collapsed.
    pub pruned: usize,
    /// Index of the restart that produced this fit.
    pub restart: usize,
}

impl<T: Real> GmmFit<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The fitted density as a Q-distribution (a plain Gaussian when one
    /// component remains).
    pub fn to_q(&self) -> Result<QDistribution<T>> {
        let comps = self
            .means
            .iter()
            .zip(&self.covariances)
            .map(|(m, c)| Gaussian2::new(*m, *c))
            .collect::<Result<Vec<_>>>()?;
        if comps.len() == 1 {
            return Ok(QDistribution::Gaussian(comps[0]));
        }
        Ok(QDistribution::GaussianMixture(GaussianMixture::new(
            self.weights.clone(),
            comps,
        )?))
    }
}

struct Component<T: Real> {
    weight: T,
    mean: [T; 2],
    cov: Cov2<T>,
}

impl<T: Real> Component<T> {
    fn log_density(&self, p: [T; 2]) -> T {
        let inv = self.cov.inverse().expect("floored covariance");
        let (dx, dy) = (p[0] - self.mean[0], p[1] - self.mean[1]);
        -T::TAU().ln() - T::half() * self.cov.det().ln() - T::half() * inv.quad_form(dx, dy)
    }
}

fn log_sum_exp<T: Real>(v: &[T]) -> T {
    let m = v.iter().copied().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}

/// k-means++ seeding followed by one hard assignment.
fn seed_components<T: Real>(pts: &[[T; 2]], k: usize, floor: T, rng: &mut impl Rng) -> Vec<Component<T>> {
    let n = pts.len();
    let dist2 = |a: [T; 2], b: [T; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let mut centres = vec![pts[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = pts.iter().map(|&p| dist2(p, centres[0]).as_f64()).collect();
    while centres.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if u < d {
                    idx = i;
                    break;
                }
                u -= d;
            }
            pts[idx]
        } else {
            pts[rng.random_range(0..n)]
        };
        centres.push(next);
        for (d, &p) in d2.iter_mut().zip(pts) {
            *d = d.min(dist2(p, next).as_f64());
        }
    }
    let global = sample_cov(pts, &vec![T::one(); n], floor);
    let assignment: Vec<usize> = pts
        .iter()
        .map(|&p| {
            (0..k)
                .min_by(|&a, &b| dist2(p, centres[a]).partial_cmp(&dist2(p, centres[b])).unwrap())
                .unwrap()
        })
        .collect();
    (0..k)
        .map(|c| {
            let w: Vec<T> = assignment
                .iter()
                .map(|&a| if a == c { T::one() } else { T::zero() })
                .collect();
            let count: T = w.iter().copied().sum();
            if count < T::two() {
                return Component {
                    weight: T::one() / T::lit(k as f64),
                    mean: centres[c],
                    cov: global.1,
                };
            }
            let (mean, cov) = sample_cov(pts, &w, floor);
            Component {
                weight: count / T::lit(n as f64),
                mean,
                cov,
            }
        })
        .collect()
}

/// Weighted mean and covariance with the eigenvalue floor applied.
fn sample_cov<T: Real>(pts: &[[T; 2]], w: &[T], floor: T) -> ([T; 2], Cov2<T>) {
    let total: T = w.iter().copied().sum();
    let (mut mr, mut ms) = (T::zero(), T::zero());
    for (p, &wi) in pts.iter().zip(w) {
        mr = mr + wi * p[0];
        ms = ms + wi * p[1];
    }
    let (mr, ms) = (mr / total, ms / total);
    let (mut xx, mut xy, mut yy) = (T::zero(), T::zero(), T::zero());
    for (p, &wi) in pts.iter().zip(w) {
        let (a, b) = (p[0] - mr, p[1] - ms);
        xx = xx + wi * a * a;
        xy = xy + wi * a * b;
        yy = yy + wi * b * b;
    }
    (
        [mr, ms],
        Cov2::new(xx / total, xy / total, yy / total).with_eigenvalue_floor(floor),
    )
}

fn run_em<T: Real>(
    pts: &[[T; 2]],
    mut comps: Vec<Component<T>>,
    cfg: &GmmConfig,
) -> (Vec<Component<T>>, T, usize, bool, usize) {
    let n = pts.len();
    let nf = T::lit(n as f64);
    let floor = T::lit(cfg.eigenvalue_floor);
    let tol = T::lit(cfg.tolerance);
    let mut prev = T::neg_infinity();
    let mut pruned = 0;
    let mut resp = vec![T::zero(); n * comps.len()];
    let mut ll = T::neg_infinity();
    for it in 1..=cfg.max_iterations {
        let k = comps.len();
        resp.resize(n * k, T::zero());
        // E step
        ll = T::zero();
        let mut row = vec![T::zero(); k];
        for (i, &p) in pts.iter().enumerate() {
            for (c, comp) in comps.iter().enumerate() {
                row[c] = comp.weight.ln() + comp.log_density(p);
            }
            let lse = log_sum_exp(&row);
            ll = ll + lse;
            for c in 0..k {
                resp[i * k + c] = (row[c] - lse).exp();
            }
        }
        if (ll - prev) / nf < tol && it > 1 {
            return (comps, ll, it, true, pruned);
        }
        prev = ll;
        // M step
        let mut next = Vec::with_capacity(k);
        for c in 0..k {
            let w: Vec<T> = (0..n).map(|i| resp[i * k + c]).collect();
            let count: T = w.iter().copied().sum();
            if count < T::two() {
                pruned += 1;
                continue;
            }
            let (mean, cov) = sample_cov(pts, &w, floor);
            next.push(Component {
                weight: count / nf,
                mean,
                cov,
            });
        }
        let total: T = next.iter().map(|c| c.weight).sum();
        for c in &mut next {
            c.weight = c.weight / total;
        }
        if next.len() != k {
            prev = T::neg_infinity();
        }
        comps = next;
    }
    (comps, ll, cfg.max_iterations, false, pruned)
}

/// Fits a `k`-component bivariate Gaussian mixture by expectation
/// maximization, keeping the best log-likelihood over the restarts.
pub fn fit_gmm<T: Real>(samples: &SampleSet<T>, k: usize, config: &GmmConfig) -> Result<GmmFit<T>> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if samples.len() <= 10 * k {
        return Err(Error::param(
            "samples",
            format!(
                "{} samples are too few for {k} components (need more than {})",
                samples.len(),
                10 * k
            ),
        ));
    }
    if config.restarts == 0 {
        return Err(Error::param("restarts", "must be at least 1"));
    }
    let floor = T::lit(config.eigenvalue_floor);
    let mut best: Option<GmmFit<T>> = None;
    for restart in 0..config.restarts {
        let mut rng = seeded_rng(config.seed, restart as u64);
        let init = seed_components(&samples.points, k, floor, &mut rng);
        let (comps, ll, iterations, converged, pruned) = run_em(&samples.points, init, config);
        if comps.is_empty() || !ll.is_finite() {
            continue;
        }
        let fit = GmmFit {
            weights: comps.iter().map(|c| c.weight).collect(),
            means: comps.iter().map(|c| c.mean).collect(),
            covariances: comps.iter().map(|c| c.cov).collect(),
            log_likelihood: ll,
            iterations,
            converged,
            pruned,
            restart,
        };
        if best.as_ref().is_none_or(|b| fit.log_likelihood > b.log_likelihood) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| Error::Fit("every restart degenerated".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{total_mass, vacuum_reference};
    use crate::frame::{Branch, NonLocalFrame};
    use crate::quadrature::Quadrature;
    use crate::sampling::sample_heterodyne;
    use crate::states::{tmsv_mixture_q, TmsvMixtureParams};

    #[test]
    fn single_component_recovers_vacuum() {
        let vac = vacuum_reference(&NonLocalFrame::<f64>::unit(Branch::Plus));
        let s = sample_heterodyne(&vac, 10_000, 11).unwrap();
        let fit = fit_gmm(&s, 1, &GmmConfig::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.means[0][0].abs() < 0.05 && fit.means[0][1].abs() < 0.05);
        let c = fit.covariances[0];
        assert!((c.xx / 2.0 - 1.0).abs() < 0.05 && (c.yy / 2.0 - 1.0).abs() < 0.05 && c.xy.abs() < 0.1);
    }

    #[test]
    fn two_components_recover_weights() {
        let params = TmsvMixtureParams {
            lambda: 0.8,
            displacement_r: 2.0,
            weight_p: 0.3,
        };
        let q = tmsv_mixture_q(&params, &NonLocalFrame::unit(Branch::Plus)).unwrap();
        let s = sample_heterodyne(&q, 10_000, 5).unwrap();
        let fit = fit_gmm(&s, 2, &GmmConfig::default()).unwrap();
        let mut w: Vec<f64> = fit.weights.clone();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((w[0] - 0.3).abs() < 0.05 && (w[1] - 0.7).abs() < 0.05, "{w:?}");
        assert!((fit.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mass = total_mass(&fit.to_q().unwrap(), &Quadrature::default()).unwrap();
        assert!((mass - 1.0).abs() < 1e-10, "{mass}");
    }

    #[test]
    fn too_few_samples() {
        let vac = vacuum_reference(&NonLocalFrame::<f64>::unit(Branch::Plus));
        let s = sample_heterodyne(&vac, 20, 0).unwrap();
        assert!(fit_gmm(&s, 2, &GmmConfig::default()).is_err());
    }
}
