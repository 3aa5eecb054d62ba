//! Four-variable Husimi distributions, the change to non-local coordinates
//! and marginalization over the mixed pair.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::distribution::{GridDensity, Interpolation, ProductQ, QDistribution};
use crate::error::{Error, Result};
use crate::frame::{Branch, NonLocalFrame};
use crate::gaussian::{Cov2, Gaussian2};
use crate::profile::Profile1D;
use crate::quadrature::{Quadrature, Square};
use crate::scalar::Real;

pub type Mat4<T> = [[T; 4]; 4];

/// Centred four-variable Gaussian Husimi distribution in `(r₁, s₁, r₂, s₂)`
/// (or any other ordered quadruple), `exp(−½ zᵀV⁻¹z)/√det V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian4<T: Real> {
    cov: Mat4<T>,
    precision: Mat4<T>,
    sqrt_det: T,
}

impl<T: Real> Gaussian4<T> {
    pub fn new(cov: Mat4<T>) -> Result<Self> {
        for i in 0..4 {
            for j in 0..i {
                let tol = T::lit(1e-12) * (cov[i][j].abs() + T::one());
                if (cov[i][j] - cov[j][i]).abs() > tol {
                    return Err(Error::param("cov", "must be symmetric"));
                }
            }
        }
        let (precision, det) = invert4(&cov)?;
        if !(det > T::zero()) {
            return Err(Error::NotPositiveDefinite { det: det.as_f64() });
        }
        Ok(Self {
            cov,
            precision,
            sqrt_det: det.sqrt(),
        })
    }

    /// Product of two local vacua.
    pub fn vacuum() -> Self {
        let mut cov = [[T::zero(); 4]; 4];
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] = T::one();
        }
        Self::new(cov).expect("identity is positive definite")
    }

    /// Two-mode squeezed vacuum `√(1−λ²) Σ (−λ)ⁿ |n, n⟩`.
    pub fn tmsv(lambda: T) -> Result<Self> {
        if !(lambda.abs() < T::one()) {
            return Err(Error::param("lambda", format!("must lie in (-1, 1), got {lambda}")));
        }
        let d = T::one() / (T::one() - lambda * lambda);
        let (o, z) = (d, T::zero());
        let l = lambda * d;
        Self::new([[o, z, -l, z], [z, o, z, l], [-l, z, o, z], [z, l, z, o]])
    }

    pub fn cov(&self) -> &Mat4<T> {
        &self.cov
    }

    pub fn density(&self, z: [T; 4]) -> T {
        let mut q = T::zero();
        for i in 0..4 {
            let mut row = T::zero();
            for j in 0..4 {
                row = row + self.precision[i][j] * z[j];
            }
            q = q + z[i] * row;
        }
        (-T::half() * q).exp() / self.sqrt_det
    }

    /// Distribution of `A z`.
    pub fn transformed(&self, a: &Mat4<T>) -> Result<Self> {
        let mut av = [[T::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                av[i][j] = (0..4).map(|k| a[i][k] * self.cov[k][j]).sum();
            }
        }
        let mut out = [[T::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| av[i][k] * a[j][k]).sum();
            }
        }
        for i in 0..4 {
            for j in 0..i {
                let m = (out[i][j] + out[j][i]) * T::half();
                out[i][j] = m;
                out[j][i] = m;
            }
        }
        Self::new(out)
    }

    /// Marginal over all but the coordinates `(i, j)`.
    pub fn marginal(&self, i: usize, j: usize) -> Result<Gaussian2<T>> {
        Gaussian2::centered(Cov2::new(self.cov[i][i], self.cov[i][j], self.cov[j][j]))
    }
}

/// Inverse and determinant by Gauss–Jordan elimination with partial pivoting.
fn invert4<T: Real>(m: &Mat4<T>) -> Result<(Mat4<T>, T)> {
    let mut a = *m;
    let mut inv = [[T::zero(); 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let mut det = T::one();
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col] == T::zero() || !a[pivot][col].is_finite() {
            return Err(Error::NotPositiveDefinite { det: 0.0 });
        }
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det = det * p;
        for k in 0..4 {
            a[col][k] = a[col][k] / p;
            inv[col][k] = inv[col][k] / p;
        }
        for row in 0..4 {
            if row != col {
                let f = a[row][col];
                for k in 0..4 {
                    a[row][k] = a[row][k] - f * a[col][k];
                    inv[row][k] = inv[row][k] - f * inv[col][k];
                }
            }
        }
    }
    Ok((inv, det))
}

/// Global Husimi distribution of the pure state
/// `ψ(x₁, x₂) ∝ x₊ exp(−x₊²/(4σ₊²) − x₋²/(4σ₋²))` with `x± = x₁ ± x₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleGlobal<T: Real> {
    pub sigma_plus: T,
    pub sigma_minus: T,
}

impl<T: Real> ExampleGlobal<T> {
    pub fn new(sigma_plus: T, sigma_minus: T) -> Result<Self> {
        for (name, v) in [("sigma_plus", sigma_plus), ("sigma_minus", sigma_minus)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self {
            sigma_plus,
            sigma_minus,
        })
    }

    pub fn density(&self, z: [T; 4]) -> T {
        let [r1, s1, r2, s2] = z;
        let (rp, rm, sp, sm) = (r1 + r2, r1 - r2, s1 + s2, s1 - s2);
        let (p2, m2) = (self.sigma_plus * self.sigma_plus, self.sigma_minus * self.sigma_minus);
        let (ap, am) = (p2 + T::one(), m2 + T::one());
        let pre = T::lit(4.0) * p2 * self.sigma_plus * self.sigma_minus / (ap * ap * ap * am);
        let h = T::half();
        pre * (rp * rp + sp * sp) * (-h * (rp * rp / ap + sp * sp * p2 / ap + rm * rm / am + sm * sm * m2 / am)).exp()
    }

    /// Husimi marginal of the kept pair as a separable product, for unit
    /// scalings and no local rotation.
    pub fn unit_marginal(&self, branch: Branch) -> ProductQ<T> {
        let (p2, m2) = (self.sigma_plus * self.sigma_plus, self.sigma_minus * self.sigma_minus);
        let w = example_wigner_marginals(p2, m2, branch);
        ProductQ::new(w.0.convolve_normal(T::one()), w.1.convolve_normal(T::one()), T::zero())
    }
}

/// Position- and momentum-type Wigner marginals of the example state at
/// `σ₊² = p2`, `σ₋² = m2` for the kept pair of `branch`.
pub(crate) fn example_wigner_marginals<T: Real>(p2: T, m2: T, branch: Branch) -> (Profile1D<T>, Profile1D<T>) {
    match branch {
        Branch::Plus => (
            Profile1D::QuadraticNormal {
                var: p2,
                offset: T::zero(),
            },
            Profile1D::Normal { var: T::one() / m2 },
        ),
        Branch::Minus => (
            Profile1D::Normal { var: m2 },
            Profile1D::QuadraticNormal {
                var: T::one() / p2,
                offset: T::zero(),
            },
        ),
    }
}

/// User supplied four-variable density with the half-width of a box
/// containing its support.
#[derive(Clone)]
pub struct CustomQ<T: Real> {
    pub density: Arc<dyn Fn([T; 4]) -> T + Send + Sync>,
    pub half_width: T,
}

impl<T: Real> fmt::Debug for CustomQ<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomQ")
            .field("half_width", &self.half_width)
            .finish_non_exhaustive()
    }
}

/// Husimi distribution over `(r₁, s₁, r₂, s₂)` normalized against
/// `dr₁ ds₁ dr₂ ds₂ / (2π)²`.
#[derive(Debug, Clone)]
pub enum GlobalQ<T: Real> {
    Gaussian(Gaussian4<T>),
    Example(ExampleGlobal<T>),
    Custom(CustomQ<T>),
}

impl<T: Real> GlobalQ<T> {
    pub fn custom(half_width: T, density: impl Fn([T; 4]) -> T + Send + Sync + 'static) -> Self {
        GlobalQ::Custom(CustomQ {
            density: Arc::new(density),
            half_width,
        })
    }

    pub fn density(&self, z: [T; 4]) -> T {
        match self {
            GlobalQ::Gaussian(g) => g.density(z),
            GlobalQ::Example(e) => e.density(z),
            GlobalQ::Custom(c) => (c.density)(z),
        }
    }
}

/// The global distribution expressed in `(r₊, s₊, r₋, s₋)`.
#[derive(Debug, Clone)]
pub struct NonLocalQ<T: Real> {
    global: GlobalQ<T>,
    frame: NonLocalFrame<T>,
    /// Closed form in non-local coordinates when `global` is Gaussian.
    gaussian: Option<Gaussian4<T>>,
}

/// `(r₁, s₁, r₂, s₂) ↦ (r₊, s₊, r₋, s₋)` including the local rotations.
pub fn nonlocal_map<T: Real>(frame: &NonLocalFrame<T>) -> Mat4<T> {
    let (s1, c1) = frame.theta1().sin_cos();
    let (s2, c2) = frame.theta2().sin_cos();
    let (a1, a2, b1, b2) = (frame.a1(), frame.a2(), frame.b1(), frame.b2());
    // R_j = cos ϑ X_j + sin ϑ P_j,  S_j = −sin ϑ X_j + cos ϑ P_j
    let r1 = [c1, s1, T::zero(), T::zero()];
    let q1 = [-s1, c1, T::zero(), T::zero()];
    let r2 = [T::zero(), T::zero(), c2, s2];
    let q2 = [T::zero(), T::zero(), -s2, c2];
    let comb = |u: T, x: [T; 4], v: T, y: [T; 4]| -> [T; 4] {
        [
            u * x[0] + v * y[0],
            u * x[1] + v * y[1],
            u * x[2] + v * y[2],
            u * x[3] + v * y[3],
        ]
    };
    [
        comb(a1, r1, a2, r2),
        comb(b1, q1, b2, q2),
        comb(a1, r1, -a2, r2),
        comb(b1, q1, -b2, q2),
    ]
}

/// Re-expresses `q_global` in the non-local coordinates of `frame`. Local
/// rotations act on each mode's arguments first; the Jacobian prefactor is
/// `1/(4 a₁a₂b₁b₂)`.
pub fn apply_local_rotation<T: Real>(q_global: &GlobalQ<T>, frame: &NonLocalFrame<T>) -> Result<NonLocalQ<T>> {
    let frame = NonLocalFrame::new(
        frame.theta1(),
        frame.theta2(),
        frame.a1(),
        frame.a2(),
        frame.b1(),
        frame.b2(),
        frame.branch(),
    )?;
    let gaussian = match q_global {
        GlobalQ::Gaussian(g) => Some(g.transformed(&nonlocal_map(&frame))?),
        _ => None,
    };
    Ok(NonLocalQ {
        global: q_global.clone(),
        frame,
        gaussian,
    })
}

impl<T: Real> NonLocalQ<T> {
    pub fn frame(&self) -> &NonLocalFrame<T> {
        &self.frame
    }

    pub fn global(&self) -> &GlobalQ<T> {
        &self.global
    }

    /// Gaussian closed form in `(r₊, s₊, r₋, s₋)` when available.
    pub fn as_gaussian(&self) -> Option<&Gaussian4<T>> {
        self.gaussian.as_ref()
    }

    /// Density at `(r₊, s₊, r₋, s₋)` against `d⁴y/(2π)²`.
    pub fn density(&self, y: [T; 4]) -> T {
        let f = &self.frame;
        let [rp, sp, rm, sm] = y;
        let h = T::half();
        // rotated local coordinates
        let r1 = (rp + rm) * h / f.a1();
        let s1 = (sp + sm) * h / f.b1();
        let r2 = (rp - rm) * h / f.a2();
        let s2 = (sp - sm) * h / f.b2();
        let (sn1, cs1) = f.theta1().sin_cos();
        let (sn2, cs2) = f.theta2().sin_cos();
        let x = [
            cs1 * r1 - sn1 * s1,
            sn1 * r1 + cs1 * s1,
            cs2 * r2 - sn2 * s2,
            sn2 * r2 + cs2 * s2,
        ];
        let jac = T::lit(4.0) * f.a1() * f.a2() * f.b1() * f.b2();
        self.global.density(x) / jac
    }

    fn support_half_width(&self) -> T {
        let f = &self.frame;
        let scale = f.a1().max(f.a2()).max(f.b1()).max(f.b2()) * T::two();
        let local = match &self.global {
            GlobalQ::Gaussian(g) => {
                let v = (0..4).map(|i| g.cov()[i][i]).fold(T::zero(), T::max);
                (T::lit(70.0) * v).sqrt()
            }
            GlobalQ::Example(e) => {
                let v = (e.sigma_plus * e.sigma_plus + T::one())
                    .max(e.sigma_minus * e.sigma_minus + T::one())
                    .max(T::one() + T::one() / (e.sigma_plus * e.sigma_plus))
                    .max(T::one() + T::one() / (e.sigma_minus * e.sigma_minus));
                (T::lit(80.0) * v).sqrt()
            }
            GlobalQ::Custom(c) => c.half_width,
        };
        local * scale
    }
}

/// Lattice on which a numerically marginalized distribution is tabulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalGrid<T> {
    /// Outer nodes span `[-half_width, half_width]` on both axes.
    pub half_width: T,
    pub nodes: usize,
    /// Half-width of the inner square over the integrated pair; `None`
    /// derives it from the distribution.
    pub inner_half_width: Option<T>,
}

impl<T: Real> Default for MarginalGrid<T> {
    fn default() -> Self {
        Self {
            half_width: T::lit(9.0),
            nodes: 61,
            inner_half_width: None,
        }
    }
}

/// Integrates out the mixed pair complementary to `branch`: `(r₋, s₊)` for
/// [`Branch::Plus`], `(r₊, s₋)` for [`Branch::Minus`]. The result's
/// coordinates are `(r₊, s₋)` or `(r₋, s₊)` respectively.
///
/// Gaussian inputs marginalize in closed form, as does the example state
/// for unit scalings with `ϑ₂ = −ϑ₁`. Everything else is tabulated on
/// `grid` with bicubic interpolation.
pub fn marginalize_mixed<T: Real>(
    q4: &NonLocalQ<T>,
    branch: Branch,
    grid: &MarginalGrid<T>,
    quad: &Quadrature,
) -> Result<QDistribution<T>> {
    // (kept r, kept s), (integrated r, integrated s) in (r₊, s₊, r₋, s₋) order
    let (keep, drop) = match branch {
        Branch::Plus => ((0, 3), (2, 1)),
        Branch::Minus => ((2, 1), (0, 3)),
    };
    if let Some(g) = q4.as_gaussian() {
        return Ok(QDistribution::Gaussian(g.marginal(keep.0, keep.1)?));
    }
    if let GlobalQ::Example(e) = q4.global() {
        let f = q4.frame();
        let opposite = (f.theta1() + f.theta2()) % T::TAU();
        let aligned = opposite.abs() < T::lit(1e-12) || (opposite - T::TAU()).abs() < T::lit(1e-12);
        if f.has_unit_scalings() && aligned {
            let mut p = e.unit_marginal(branch);
            p.angle = -f.theta1();
            return Ok(QDistribution::PolyGaussian(p));
        }
    }

    let n = grid.nodes.max(4);
    let step = T::two() * grid.half_width / T::from_usize(n - 1).unwrap();
    let inner = grid.inner_half_width.unwrap_or_else(|| q4.support_half_width());
    let positions: Vec<T> = (0..n)
        .map(|i| -grid.half_width + step * T::from_usize(i).unwrap())
        .collect();
    let values: Vec<T> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (u, v) = (positions[idx / n], positions[idx % n]);
            let integrand = |a: T, b: T| {
                let mut y = [T::zero(); 4];
                y[keep.0] = u;
                y[keep.1] = v;
                y[drop.0] = a;
                y[drop.1] = b;
                q4.density(y)
            };
            quad.integrate2d(integrand, Square::centered(inner)).map(|e| e.value)
        })
        .collect::<Result<_>>()?;
    Ok(QDistribution::Grid(GridDensity {
        origin: [positions[0], positions[0]],
        spacing: [step, step],
        nx: n,
        ny: n,
        values,
        interpolation: Interpolation::Bicubic,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_tmsv_covariance() {
        let g = Gaussian4::<f64>::tmsv(0.6).unwrap();
        let (inv, det) = invert4(g.cov()).unwrap();
        assert!((det - 1.0 / (1.0f64 - 0.36).powi(4) * (1.0 - 0.36f64).powi(2)).abs() < 1e-12);
        assert!((inv[0][2] - 0.6).abs() < 1e-12);
        assert!((inv[1][3] + 0.6).abs() < 1e-12);
    }

    #[test]
    fn tmsv_nonlocal_marginal_is_narrow_on_plus() {
        let frame = NonLocalFrame::<f64>::unit(Branch::Plus);
        let q4 = apply_local_rotation(&GlobalQ::Gaussian(Gaussian4::tmsv(0.8).unwrap()), &frame).unwrap();
        let q = marginalize_mixed(&q4, Branch::Plus, &MarginalGrid::default(), &Quadrature::default()).unwrap();
        let (_, cov) = q.analytic_moments().unwrap();
        assert!((cov.xx - 2.0 / 1.8).abs() < 1e-12);
        assert!((cov.yy - 2.0 / 1.8).abs() < 1e-12);
        assert!(cov.xy.abs() < 1e-12);
    }

    #[test]
    fn gaussian_closed_form_matches_pointwise_transform() {
        let frame = NonLocalFrame::<f64>::new(0.4, 1.9, 2.0, 0.5, 0.5, 2.0, Branch::Plus).unwrap();
        let q4 = apply_local_rotation(&GlobalQ::Gaussian(Gaussian4::tmsv(0.5).unwrap()), &frame).unwrap();
        let g = *q4.as_gaussian().unwrap();
        for y in [[0.3, -0.2, 1.1, 0.4], [-1.0, 0.5, 0.0, 2.0], [0.0; 4]] {
            assert!((g.density(y) - q4.density(y)).abs() < 1e-13);
        }
    }

    #[test]
    fn example_closed_form_marginal_matches_direct_integration() {
        let quad = Quadrature::default();
        let global = GlobalQ::Example(ExampleGlobal::new(1.5, 0.8).unwrap());
        for branch in Branch::BOTH {
            let frame = NonLocalFrame::<f64>::new(0.5, -0.5, 1.0, 1.0, 1.0, 1.0, branch).unwrap();
            let q4 = apply_local_rotation(&global, &frame).unwrap();
            let q = marginalize_mixed(&q4, branch, &MarginalGrid::default(), &quad).unwrap();
            let (keep, drop) = match branch {
                Branch::Plus => ((0, 3), (2, 1)),
                Branch::Minus => ((2, 1), (0, 3)),
            };
            for (u, v) in [(0.7, -0.3), (-1.2, 1.9), (0.0, 0.0), (2.5, 0.4)] {
                let direct = quad
                    .integrate2d(
                        |a, b| {
                            let mut y = [0.0; 4];
                            y[keep.0] = u;
                            y[keep.1] = v;
                            y[drop.0] = a;
                            y[drop.1] = b;
                            q4.density(y)
                        },
                        Square::centered(16.0),
                    )
                    .unwrap()
                    .value;
                assert!((q.density(u, v) - direct).abs() < 1e-10, "{branch:?} ({u}, {v})");
            }
        }
    }
}
