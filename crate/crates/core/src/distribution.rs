//! Marginal Husimi Q-distributions on the `(r±, s∓)` plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::NonLocalFrame;
use crate::gaussian::{Cov2, Gaussian2, GaussianMixture};
use crate::profile::Profile1D;
use crate::quadrature::{Quadrature, Square};
use crate::scalar::Real;

/// Density is treated as zero beyond the point where it drops below this.
pub const TRUNCATION_EPSILON: f64 = 1e-12;

/// Relative cut-off for integration domains: `(q/peak)^p < 1e-14` outside.
pub const INTEGRATION_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QKind {
    Gaussian,
    GaussianMixture,
    PolyGaussian,
    Grid,
}

impl QKind {
    pub fn label(self) -> &'static str {
        match self {
            QKind::Gaussian => "gaussian",
            QKind::GaussianMixture => "gaussian-mixture",
            QKind::PolyGaussian => "poly-gaussian",
            QKind::Grid => "grid",
        }
    }
}

/// Separable distribution `2π·p_x(x)·p_y(y)` in coordinates rotated by
/// `angle`, i.e. `Q(z) = 2π p_x p_y (R(−angle) z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProductQ<T: Real> {
    pub x: Profile1D<T>,
    pub y: Profile1D<T>,
    pub angle: T,
}

impl<T: Real> ProductQ<T> {
    pub fn new(x: Profile1D<T>, y: Profile1D<T>, angle: T) -> Self {
        Self { x, y, angle }
    }

    fn to_axes(self, r: T, s: T) -> (T, T) {
        let (sn, cs) = self.angle.sin_cos();
        (cs * r + sn * s, -sn * r + cs * s)
    }

    pub fn density(&self, r: T, s: T) -> T {
        let (x, y) = self.to_axes(r, s);
        T::TAU() * self.x.density(x) * self.y.density(y)
    }

    pub fn peak(&self) -> T {
        T::TAU() * self.x.peak() * self.y.peak()
    }

    /// Covariance in the `(r, s)` plane.
    pub fn covariance(&self) -> Cov2<T> {
        Cov2::diag(self.x.variance(), self.y.variance()).rotated(self.angle)
    }
}

/// How a [`GridDensity`] is reconstructed between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Catmull–Rom bicubic through node values at `origin + (i·dr, j·ds)`.
    Bicubic,
    /// Constant on cells `[origin + i·dr, origin + (i+1)·dr) × …`.
    PiecewiseConstant,
}

/// Density tabulated on a uniform rectangular lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GridDensity<T: Real> {
    pub origin: [T; 2],
    pub spacing: [T; 2],
    pub nx: usize,
    pub ny: usize,
    /// Row-major over `x` then `y`: `values[i * ny + j]`.
    pub values: Vec<T>,
    pub interpolation: Interpolation,
}

impl<T: Real> GridDensity<T> {
    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.ny + j]
    }

    fn node(&self, i: isize, j: isize) -> T {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            T::zero()
        } else {
            self.value(i as usize, j as usize)
        }
    }

    pub fn density(&self, r: T, s: T) -> T {
        let u = (r - self.origin[0]) / self.spacing[0];
        let v = (s - self.origin[1]) / self.spacing[1];
        match self.interpolation {
            Interpolation::PiecewiseConstant => {
                if u < T::zero() || v < T::zero() {
                    return T::zero();
                }
                let (i, j) = (u.floor().as_f64() as usize, v.floor().as_f64() as usize);
                if i >= self.nx || j >= self.ny {
                    T::zero()
                } else {
                    self.value(i, j)
                }
            }
            Interpolation::Bicubic => {
                let (fu, fv) = (u.floor(), v.floor());
                let lim = T::lit(1e9);
                if fu.abs() > lim || fv.abs() > lim {
                    return T::zero();
                }
                let (i0, j0) = (fu.as_f64() as isize, fv.as_f64() as isize);
                if i0 < -2 || j0 < -2 || i0 > self.nx as isize || j0 > self.ny as isize {
                    return T::zero();
                }
                let wu = catmull_rom_weights(u - fu);
                let wv = catmull_rom_weights(v - fv);
                let mut total = T::zero();
                for (a, wa) in wu.iter().enumerate() {
                    let mut row = T::zero();
                    for (b, wb) in wv.iter().enumerate() {
                        row = row + *wb * self.node(i0 - 1 + a as isize, j0 - 1 + b as isize);
                    }
                    total = total + *wa * row;
                }
                total.max(T::zero())
            }
        }
    }

    pub fn peak(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Square whose initial panels coincide with the lattice cells, or a
    /// plain bounding square when the lattice is not square.
    fn aligned_square(&self) -> Square<T> {
        let (lo_x, hi_x, lo_y, hi_y) = self.extent();
        let w = (hi_x - lo_x).max(hi_y - lo_y) * T::half();
        let square = Square {
            cx: (lo_x + hi_x) * T::half(),
            cy: (lo_y + hi_y) * T::half(),
            half_width: w,
            initial_panels: 8,
        };
        let cells = match self.interpolation {
            Interpolation::Bicubic => self.nx + 1,
            Interpolation::PiecewiseConstant => self.nx,
        };
        if self.nx == self.ny && self.spacing[0] == self.spacing[1] {
            square.with_panels(cells)
        } else {
            square
        }
    }

    /// `(x_min, x_max, y_min, y_max)` of the region with support.
    pub fn extent(&self) -> (T, T, T, T) {
        let (nx, ny) = (T::from_usize(self.nx).unwrap(), T::from_usize(self.ny).unwrap());
        match self.interpolation {
            Interpolation::PiecewiseConstant => (
                self.origin[0],
                self.origin[0] + nx * self.spacing[0],
                self.origin[1],
                self.origin[1] + ny * self.spacing[1],
            ),
            Interpolation::Bicubic => (
                self.origin[0] - self.spacing[0],
                self.origin[0] + nx * self.spacing[0],
                self.origin[1] - self.spacing[1],
                self.origin[1] + ny * self.spacing[1],
            ),
        }
    }
}

fn catmull_rom_weights<T: Real>(t: T) -> [T; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let h = T::half();
    [
        h * (-t3 + T::two() * t2 - t),
        h * (T::lit(3.0) * t3 - T::lit(5.0) * t2 + T::two()),
        h * (-T::lit(3.0) * t3 + T::lit(4.0) * t2 + t),
        h * (t3 - t2),
    ]
}

/// Evaluatable, normalized quasi-probability density on the `(r±, s∓)`
/// plane, measured against `dr ds / (2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum QDistribution<T: Real> {
    Gaussian(Gaussian2<T>),
    GaussianMixture(GaussianMixture<T>),
    PolyGaussian(ProductQ<T>),
    Grid(GridDensity<T>),
}

impl<T: Real> QDistribution<T> {
    pub fn kind(&self) -> QKind {
        match self {
            QDistribution::Gaussian(_) => QKind::Gaussian,
            QDistribution::GaussianMixture(_) => QKind::GaussianMixture,
            QDistribution::PolyGaussian(_) => QKind::PolyGaussian,
            QDistribution::Grid(_) => QKind::Grid,
        }
    }

    pub fn gaussian(mean: [T; 2], cov: Cov2<T>) -> Result<Self> {
        Ok(QDistribution::Gaussian(Gaussian2::new(mean, cov)?))
    }

    #[inline]
    pub fn density(&self, r: T, s: T) -> T {
        match self {
            QDistribution::Gaussian(g) => g.density(r, s),
            QDistribution::GaussianMixture(m) => m.density(r, s),
            QDistribution::PolyGaussian(p) => p.density(r, s),
            QDistribution::Grid(g) => g.density(r, s),
        }
    }

    /// Supremum of the density.
    pub fn peak(&self) -> T {
        match self {
            QDistribution::Gaussian(g) => g.peak(),
            QDistribution::GaussianMixture(m) => mixture_peak(m),
            QDistribution::PolyGaussian(p) => p.peak(),
            QDistribution::Grid(g) => g.peak(),
        }
    }

    /// Separable representation, when the distribution has one. Integrals
    /// of `f(Q)` are rotation invariant, so the rotation angle is irrelevant
    /// for them.
    pub fn as_product(&self) -> Option<&ProductQ<T>> {
        match self {
            QDistribution::PolyGaussian(p) => Some(p),
            _ => None,
        }
    }

    /// Closed-form mean and covariance where available.
    pub fn analytic_moments(&self) -> Option<([T; 2], Cov2<T>)> {
        match self {
            QDistribution::Gaussian(g) => Some((g.mean, g.cov)),
            QDistribution::GaussianMixture(m) => Some(m.moments()),
            QDistribution::PolyGaussian(p) => Some(([T::zero(), T::zero()], p.covariance())),
            QDistribution::Grid(_) => None,
        }
    }

    /// Half-width of a centred square outside of which `(q/peak)^power`
    /// stays below [`INTEGRATION_CUTOFF`].
    pub fn integration_half_width(&self, power: T) -> T {
        let gauss_radius = |var: T| (T::two() * var * (-T::lit(INTEGRATION_CUTOFF).ln()) / power).sqrt();
        match self {
            QDistribution::Gaussian(g) => g.mean[0].abs().max(g.mean[1].abs()) + gauss_radius(g.max_variance()),
            QDistribution::GaussianMixture(m) => m
                .components
                .iter()
                .map(|g| g.mean[0].abs().max(g.mean[1].abs()) + gauss_radius(g.max_variance()))
                .fold(T::zero(), T::max),
            QDistribution::PolyGaussian(p) => {
                let rx = p.x.tail_radius(power, INTEGRATION_CUTOFF);
                let ry = p.y.tail_radius(power, INTEGRATION_CUTOFF);
                if p.angle == T::zero() {
                    rx.max(ry)
                } else {
                    rx.hypot(ry)
                }
            }
            QDistribution::Grid(g) => {
                let (a, b, c, d) = g.extent();
                a.abs().max(b.abs()).max(c.abs()).max(d.abs())
            }
        }
    }

    /// Radius beyond which the density is below [`TRUNCATION_EPSILON`].
    pub fn support_radius(&self) -> T {
        let peak = self.peak();
        let rel = (TRUNCATION_EPSILON / peak.as_f64()).min(0.5);
        let power = T::lit(rel.ln() / INTEGRATION_CUTOFF.ln());
        self.integration_half_width(power)
    }

    /// Integration square for integrands built from `q^power` (and the
    /// vacuum reference of `frame`, when given).
    pub fn integration_square(&self, power: T, frame: Option<&NonLocalFrame<T>>) -> Square<T> {
        if let QDistribution::Grid(g) = self {
            if frame.is_none() {
                return g.aligned_square();
            }
        }
        let mut w = self.integration_half_width(power);
        if let Some(frame) = frame {
            let vac = vacuum_reference(frame);
            w = w.max(vac.integration_half_width(power));
        }
        Square::centered(w)
    }
}

/// Mode search by the Gaussian-mixture mean-shift fixed point from every
/// component mean.
fn mixture_peak<T: Real>(m: &GaussianMixture<T>) -> T {
    let precisions: Vec<Cov2<T>> = m
        .components
        .iter()
        .map(|g| g.cov.inverse().expect("validated covariance"))
        .collect();
    let mut best = T::zero();
    for start in &m.components {
        let mut z = start.mean;
        for _ in 0..200 {
            let (mut a, mut bx, mut by) = (Cov2::new(T::zero(), T::zero(), T::zero()), T::zero(), T::zero());
            for ((w, g), p) in m.weights.iter().zip(&m.components).zip(&precisions) {
                let k = *w * g.density(z[0], z[1]);
                a = Cov2::new(a.xx + k * p.xx, a.xy + k * p.xy, a.yy + k * p.yy);
                let (mx, my) = (g.mean[0], g.mean[1]);
                bx = bx + k * (p.xx * mx + p.xy * my);
                by = by + k * (p.xy * mx + p.yy * my);
            }
            let Ok(inv) = a.inverse() else { break };
            let next = [inv.xx * bx + inv.xy * by, inv.xy * bx + inv.yy * by];
            let step = (next[0] - z[0]).hypot(next[1] - z[1]);
            z = next;
            if step < T::lit(1e-13) {
                break;
            }
        }
        best = best.max(m.density(z[0], z[1]));
        best = best.max(m.density(start.mean[0], start.mean[1]));
    }
    best
}

/// Husimi-level or Wigner-level second-moment summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentLevel {
    Husimi,
    Wigner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CovarianceSummary<T: Real> {
    pub mean_r: T,
    pub mean_s: T,
    pub var_r: T,
    pub var_s: T,
    pub cov_rs: T,
    pub level: MomentLevel,
}

impl<T: Real> CovarianceSummary<T> {
    pub fn husimi(mean: [T; 2], cov: Cov2<T>) -> Self {
        Self {
            mean_r: mean[0],
            mean_s: mean[1],
            var_r: cov.xx,
            var_s: cov.yy,
            cov_rs: cov.xy,
            level: MomentLevel::Husimi,
        }
    }

    pub fn wigner(var_r: T, var_s: T, cov_rs: T) -> Self {
        Self {
            mean_r: T::zero(),
            mean_s: T::zero(),
            var_r,
            var_s,
            cov_rs,
            level: MomentLevel::Wigner,
        }
    }

    pub fn matrix(&self) -> Cov2<T> {
        Cov2::new(self.var_r, self.cov_rs, self.var_s)
    }

    pub fn det(&self) -> T {
        self.matrix().det()
    }

    /// Husimi-level summary from a Wigner-level one: the diagonal gains
    /// `(a₁²+a₂²)/2` and `(b₁²+b₂²)/2`.
    pub fn to_husimi(&self, frame: &NonLocalFrame<T>) -> Self {
        match self.level {
            MomentLevel::Husimi => *self,
            MomentLevel::Wigner => {
                let (da, db) = frame.husimi_offsets();
                Self {
                    var_r: self.var_r + da,
                    var_s: self.var_s + db,
                    level: MomentLevel::Husimi,
                    ..*self
                }
            }
        }
    }

    pub fn to_wigner(&self, frame: &NonLocalFrame<T>) -> Self {
        match self.level {
            MomentLevel::Wigner => *self,
            MomentLevel::Husimi => {
                let (da, db) = frame.husimi_offsets();
                Self {
                    var_r: self.var_r - da,
                    var_s: self.var_s - db,
                    level: MomentLevel::Wigner,
                    ..*self
                }
            }
        }
    }
}

/// Vacuum reference `Q̄'± = exp(−(r² + s²)/(2c)) / c` with
/// `c = a₁b₁ + a₂b₂`.
pub fn vacuum_reference<T: Real>(frame: &NonLocalFrame<T>) -> QDistribution<T> {
    let c = frame.normalization();
    QDistribution::Gaussian(
        Gaussian2::centered(Cov2::isotropic(c)).expect("normalization is positive for valid frames"),
    )
}

/// First and second central moments by quadrature.
pub fn covariance_of<T: Real>(q: &QDistribution<T>, quad: &Quadrature) -> Result<CovarianceSummary<T>> {
    let square = q.integration_square(T::one(), None);
    let mass = quad.integrate2d(|r, s| q.density(r, s), square)?.value;
    if !(mass > T::zero()) {
        return Err(Error::param("q", "distribution has no mass"));
    }
    let mr = quad.integrate2d(|r, s| r * q.density(r, s), square)?.value / mass;
    let ms = quad.integrate2d(|r, s| s * q.density(r, s), square)?.value / mass;
    let vrr = quad
        .integrate2d(|r, s| (r - mr) * (r - mr) * q.density(r, s), square)?
        .value
        / mass;
    let vss = quad
        .integrate2d(|r, s| (s - ms) * (s - ms) * q.density(r, s), square)?
        .value
        / mass;
    let vrs = quad
        .integrate2d(|r, s| (r - mr) * (s - ms) * q.density(r, s), square)?
        .value
        / mass;
    Ok(CovarianceSummary::husimi([mr, ms], Cov2::new(vrr, vrs, vss)))
}

/// `∫ q dr ds/(2π)` over the distribution's own integration square.
pub fn total_mass<T: Real>(q: &QDistribution<T>, quad: &Quadrature) -> Result<T> {
    Ok(quad
        .integrate2d(|r, s| q.density(r, s), q.integration_square(T::one(), None))?
        .value)
}
