//! Bivariate Gaussians in Husimi normalization and their mixtures.
//!
//! A Gaussian Q-distribution with covariance `V` is
//! `exp(-½ (z-μ)ᵀ V⁻¹ (z-μ)) / √det V`, which integrates to one against
//! `dr ds / (2π)`. As a probability density in `dr ds` it is `N(μ, V)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Cov2<T: Real> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> Cov2<T> {
    pub fn new(xx: T, xy: T, yy: T) -> Self {
        Self { xx, xy, yy }
    }

    pub fn diag(xx: T, yy: T) -> Self {
        Self::new(xx, T::zero(), yy)
    }

    pub fn isotropic(v: T) -> Self {
        Self::diag(v, v)
    }

    pub fn det(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > T::zero() && self.yy > T::zero() && self.det() > T::zero()
    }

    /// Inverse, or an error when `det ≤ 0`.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if !(self.is_positive_definite()) {
            return Err(Error::NotPositiveDefinite { det: d.as_f64() });
        }
        Ok(Self::new(self.yy / d, -self.xy / d, self.xx / d))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (T, T) {
        let m = self.trace() * T::half();
        let d = ((self.xx - self.yy) * T::half()).hypot(self.xy);
        (m - d, m + d)
    }

    /// Raises both eigenvalues to at least `floor`, keeping eigenvectors.
    pub fn with_eigenvalue_floor(&self, floor: T) -> Self {
        let (l1, l2) = self.eigenvalues();
        if l1 >= floor {
            return *self;
        }
        // Eigenvector of the larger eigenvalue.
        let (vx, vy) = if self.xy.abs() > T::epsilon() * (l2.abs() + T::one()) {
            (self.xy, l2 - self.xx)
        } else if self.xx >= self.yy {
            (T::one(), T::zero())
        } else {
            (T::zero(), T::one())
        };
        let n = vx.hypot(vy);
        let (ux, uy) = (vx / n, vy / n);
        let l1 = l1.max(floor);
        let l2 = l2.max(floor);
        // V = l2 u uᵀ + l1 w wᵀ with w ⟂ u.
        Self::new(
            l2 * ux * ux + l1 * uy * uy,
            (l2 - l1) * ux * uy,
            l2 * uy * uy + l1 * ux * ux,
        )
    }

    /// `R V Rᵀ` for the rotation by `angle`.
    pub fn rotated(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let xx = c * c * self.xx - T::two() * c * s * self.xy + s * s * self.yy;
        let yy = s * s * self.xx + T::two() * c * s * self.xy + c * c * self.yy;
        let xy = c * s * (self.xx - self.yy) + (c * c - s * s) * self.xy;
        Self::new(xx, xy, yy)
    }

    /// Quadratic form `zᵀ M z`.
    pub fn quad_form(&self, x: T, y: T) -> T {
        self.xx * x * x + T::two() * self.xy * x * y + self.yy * y * y
    }

    /// Lower Cholesky factor `(l11, l21, l22)`.
    pub fn cholesky(&self) -> Result<(T, T, T)> {
        if !self.is_positive_definite() {
            return Err(Error::NotPositiveDefinite {
                det: self.det().as_f64(),
            });
        }
        let l11 = self.xx.sqrt();
        let l21 = self.xy / l11;
        let l22 = (self.yy - l21 * l21).sqrt();
        Ok((l11, l21, l22))
    }
}

/// Single Gaussian Q-distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", try_from = "GaussianParams<T>", into = "GaussianParams<T>")]
pub struct Gaussian2<T: Real> {
    pub mean: [T; 2],
    pub cov: Cov2<T>,
    precision: Cov2<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct GaussianParams<T: Real> {
    mean: [T; 2],
    cov: Cov2<T>,
}

impl<T: Real> TryFrom<GaussianParams<T>> for Gaussian2<T> {
    type Error = Error;
    fn try_from(p: GaussianParams<T>) -> Result<Self> {
        Gaussian2::new(p.mean, p.cov)
    }
}

impl<T: Real> From<Gaussian2<T>> for GaussianParams<T> {
    fn from(g: Gaussian2<T>) -> Self {
        Self {
            mean: g.mean,
            cov: g.cov,
        }
    }
}

impl<T: Real> Gaussian2<T> {
    pub fn new(mean: [T; 2], cov: Cov2<T>) -> Result<Self> {
        let precision = cov.inverse()?;
        Ok(Self { mean, cov, precision })
    }

    pub fn centered(cov: Cov2<T>) -> Result<Self> {
        Self::new([T::zero(), T::zero()], cov)
    }

    /// Density against `dr ds / (2π)`.
    pub fn density(&self, r: T, s: T) -> T {
        let p = self.precision;
        let (dx, dy) = (r - self.mean[0], s - self.mean[1]);
        (-T::half() * p.quad_form(dx, dy)).exp() / self.cov.det().sqrt()
    }

    pub fn peak(&self) -> T {
        T::one() / self.cov.det().sqrt()
    }

    /// Largest covariance eigenvalue.
    pub fn max_variance(&self) -> T {
        self.cov.eigenvalues().1
    }
}

/// Weighted sum of Gaussian Q-distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GaussianMixture<T: Real> {
    pub weights: Vec<T>,
    pub components: Vec<Gaussian2<T>>,
}

impl<T: Real> GaussianMixture<T> {
    /// Weights must be non-negative and sum to one within 1e-12.
    pub fn new(weights: Vec<T>, components: Vec<Gaussian2<T>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::param("weights", "must match the number of components"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::param("weights", "must be finite and non-negative"));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs().as_f64() > 1e-12 {
            return Err(Error::param("weights", format!("sum to {total}, not 1")));
        }
        Ok(Self { weights, components })
    }

    pub fn density(&self, r: T, s: T) -> T {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, g)| *w * g.density(r, s))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mean and covariance of the mixture (law of total covariance).
    pub fn moments(&self) -> ([T; 2], Cov2<T>) {
        let mut mean = [T::zero(); 2];
        for (w, g) in self.weights.iter().zip(&self.components) {
            mean[0] = mean[0] + *w * g.mean[0];
            mean[1] = mean[1] + *w * g.mean[1];
        }
        let (mut xx, mut xy, mut yy) = (T::zero(), T::zero(), T::zero());
        for (w, g) in self.weights.iter().zip(&self.components) {
            let (dx, dy) = (g.mean[0] - mean[0], g.mean[1] - mean[1]);
            xx = xx + *w * (g.cov.xx + dx * dx);
            xy = xy + *w * (g.cov.xy + dx * dy);
            yy = yy + *w * (g.cov.yy + dy * dy);
        }
        (mean, Cov2::new(xx, xy, yy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_floor_preserves_large_direction() {
        let c = Cov2::<f64>::new(1.0, 0.999_999, 1.0);
        let f = c.with_eigenvalue_floor(1e-3);
        let (l1, l2) = f.eigenvalues();
        assert!((l1 - 1e-3).abs() < 1e-12);
        assert!((l2 - 1.999_999).abs() < 1e-12);
        // the leading eigenvector stays along (1, 1)
        assert!((f.xx - f.yy).abs() < 1e-12);
    }

    #[test]
    fn rotation_preserves_invariants() {
        let c = Cov2::<f64>::new(3.0, 0.4, 1.2);
        let r = c.rotated(0.77);
        assert!((r.det() - c.det()).abs() < 1e-12);
        assert!((r.trace() - c.trace()).abs() < 1e-12);
        let back = r.rotated(-0.77);
        assert!((back.xy - c.xy).abs() < 1e-12);
    }

    #[test]
    fn mixture_moments_total_covariance() {
        let v = 2.0 / 1.8;
        let a = Gaussian2::<f64>::new([2.0, 0.0], Cov2::<f64>::isotropic(v)).unwrap();
        let b = Gaussian2::<f64>::new([-2.0, 0.0], Cov2::<f64>::isotropic(v)).unwrap();
        let m = GaussianMixture::<f64>::new(vec![0.7, 0.3], vec![a, b]).unwrap();
        let (mean, cov) = m.moments();
        assert!((mean[0] - 0.8).abs() < 1e-14);
        // v + r² − ((1−2p) r)² = v + 4 − 0.64
        assert!((cov.xx - (v + 3.36)).abs() < 1e-12);
        assert!((cov.yy - v).abs() < 1e-14);
    }

    #[test]
    fn rejects_unnormalized_weights() {
        let g = Gaussian2::<f64>::centered(Cov2::<f64>::isotropic(2.0)).unwrap();
        assert!(GaussianMixture::<f64>::new(vec![0.5, 0.4], vec![g, g]).is_err());
    }

    #[test]
    fn cholesky_reconstructs() {
        let c = Cov2::<f64>::new(2.0, 0.3, 0.7);
        let (a, b, d) = c.cholesky().unwrap();
        assert!((a * a - 2.0).abs() < 1e-14);
        assert!((a * b - 0.3).abs() < 1e-14);
        assert!((b * b + d * d - 0.7).abs() < 1e-14);
    }
}
