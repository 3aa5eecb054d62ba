//! One-dimensional densities that appear as factors of separable
//! distributions: centred normals and `x²`-weighted normals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{normal_interval_mass, normal_interval_second_moment, Real};

/// Probability density on the real line (against `dx`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", tag = "form", rename_all = "kebab-case")]
pub enum Profile1D<T: Real> {
    /// `N(0, var)`.
    Normal { var: T },
    /// `(x² + offset) N(x; 0, var) / (var + offset)`.
    QuadraticNormal { var: T, offset: T },
}

impl<T: Real> Profile1D<T> {
    pub fn normal(var: T) -> Result<Self> {
        if !(var > T::zero()) || !var.is_finite() {
            return Err(Error::param("var", format!("must be positive, got {var}")));
        }
        Ok(Profile1D::Normal { var })
    }

    pub fn quadratic_normal(var: T, offset: T) -> Result<Self> {
        if !(var > T::zero()) || !var.is_finite() {
            return Err(Error::param("var", format!("must be positive, got {var}")));
        }
        if offset < T::zero() || !offset.is_finite() {
            return Err(Error::param("offset", format!("must be non-negative, got {offset}")));
        }
        Ok(Profile1D::QuadraticNormal { var, offset })
    }

    pub fn var_parameter(&self) -> T {
        match *self {
            Profile1D::Normal { var } | Profile1D::QuadraticNormal { var, .. } => var,
        }
    }

    pub fn density(&self, x: T) -> T {
        let gauss = |v: T| (-(x * x) / (T::two() * v)).exp() / (T::TAU() * v).sqrt();
        match *self {
            Profile1D::Normal { var } => gauss(var),
            Profile1D::QuadraticNormal { var, offset } => (x * x + offset) * gauss(var) / (var + offset),
        }
    }

    /// Location of the maximum (non-negative representative).
    pub fn mode(&self) -> T {
        match *self {
            Profile1D::Normal { .. } => T::zero(),
            Profile1D::QuadraticNormal { var, offset } => {
                let m2 = T::two() * var - offset;
                if m2 > T::zero() {
                    m2.sqrt()
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn peak(&self) -> T {
        self.density(self.mode())
    }

    /// Second moment `∫ x² p(x) dx` (the mean is zero).
    pub fn variance(&self) -> T {
        match *self {
            Profile1D::Normal { var } => var,
            // E[x⁴] = 3v², E[x²] = v under N(0, v)
            Profile1D::QuadraticNormal { var, offset } => (T::lit(3.0) * var * var + offset * var) / (var + offset),
        }
    }

    /// Mass on `[lo, hi]`, with full relative precision in the tails.
    pub fn interval_mass(&self, lo: T, hi: T) -> T {
        match *self {
            Profile1D::Normal { var } => normal_interval_mass(lo, hi, var),
            Profile1D::QuadraticNormal { var, offset } => {
                (normal_interval_second_moment(lo, hi, var) + offset * normal_interval_mass(lo, hi, var))
                    / (var + offset)
            }
        }
    }

    /// `∫_{lo}^{hi} x² p(x) dx`.
    pub fn interval_second_moment(&self, lo: T, hi: T) -> T {
        match *self {
            Profile1D::Normal { var } => normal_interval_second_moment(lo, hi, var),
            Profile1D::QuadraticNormal { var, offset } => {
                // ∫ x⁴ φ = 3v ∫ x² φ − v [x³ φ]
                let phi = |x: T| {
                    if x.is_infinite() {
                        T::zero()
                    } else {
                        x * x * x * (-(x * x) / (T::two() * var)).exp() / (T::TAU() * var).sqrt()
                    }
                };
                let m2 = normal_interval_second_moment(lo, hi, var);
                let m4 = T::lit(3.0) * var * m2 - var * (phi(hi) - phi(lo));
                (m4 + offset * m2) / (var + offset)
            }
        }
    }

    /// Density of `X + Z` with `Z ~ N(0, t)` independent of `X`.
    pub fn convolve_normal(&self, t: T) -> Self {
        match *self {
            Profile1D::Normal { var } => Profile1D::Normal { var: var + t },
            Profile1D::QuadraticNormal { var, offset } => {
                let v = var + t;
                let offset = (var * t / v + offset) * v * v / (var * var);
                Profile1D::QuadraticNormal { var: v, offset }
            }
        }
    }

    /// Density of `k X`.
    pub fn scaled(&self, k: T) -> Self {
        let k2 = k * k;
        match *self {
            Profile1D::Normal { var } => Profile1D::Normal { var: var * k2 },
            Profile1D::QuadraticNormal { var, offset } => Profile1D::QuadraticNormal {
                var: var * k2,
                offset: offset * k2,
            },
        }
    }

    /// Radius beyond which `(p(x)/peak)^power < eps`.
    pub fn tail_radius(&self, power: T, eps: f64) -> T {
        let target = T::lit(eps).ln() / power;
        let peak_ln = self.peak().ln();
        let var = self.var_parameter();
        // Gaussian part alone gives a lower bound; step outwards from there.
        let mut r = (T::two() * var * (-target)).sqrt().max(self.mode());
        for _ in 0..200 {
            if self.density(r).ln() - peak_ln < target {
                return r;
            }
            r = r * T::lit(1.05) + T::lit(1e-3);
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Quadrature;

    fn integrate(p: &Profile1D<f64>, f: impl Fn(f64) -> f64) -> f64 {
        let r = p.tail_radius(1.0, 1e-20);
        Quadrature::default()
            .integrate1d(|x| f(x) * p.density(x), -r, r, 8)
            .unwrap()
            .value
    }

    #[test]
    fn normalized_with_matching_variance() {
        for p in [
            Profile1D::<f64>::normal(1.3).unwrap(),
            Profile1D::<f64>::quadratic_normal(2.0, 0.0).unwrap(),
            Profile1D::<f64>::quadratic_normal(0.7, 1.9).unwrap(),
        ] {
            assert!((integrate(&p, |_| 1.0) - 1.0).abs() < 1e-12);
            assert!((integrate(&p, |x| x * x) - p.variance()).abs() < 1e-11);
        }
    }

    #[test]
    fn convolution_matches_numeric_oracle() {
        let p = Profile1D::<f64>::quadratic_normal(1.5, 0.2).unwrap();
        let t = 1.0;
        let conv = p.convolve_normal(t);
        let kernel = Profile1D::<f64>::normal(t).unwrap();
        for y in [-3.1, -0.4, 0.0, 0.9, 2.5] {
            let oracle = Quadrature::default()
                .integrate1d(|x| p.density(x) * kernel.density(y - x), -25.0, 25.0, 8)
                .unwrap()
                .value;
            assert!((conv.density(y) - oracle).abs() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn interval_masses_sum_to_one() {
        let p = Profile1D::<f64>::quadratic_normal(1.1, 0.0).unwrap();
        let delta = 0.37;
        let total: f64 = (-60..=60)
            .map(|j| p.interval_mass((j as f64 - 0.5) * delta, (j as f64 + 0.5) * delta))
            .sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn interval_second_moment_agrees_with_variance() {
        let p = Profile1D::<f64>::quadratic_normal(0.8, 0.3).unwrap();
        let m = p.interval_second_moment(f64::NEG_INFINITY, f64::INFINITY);
        assert!((m - p.variance()).abs() < 1e-12);
    }

    #[test]
    fn mode_of_quadratic_normal() {
        let p = Profile1D::<f64>::quadratic_normal(2.0, 0.0).unwrap();
        assert!((p.mode() - 2.0).abs() < 1e-15);
        let eps = 1e-5;
        assert!(p.density(2.0) > p.density(2.0 + eps));
        assert!(p.density(2.0) > p.density(2.0 - eps));
    }
}
