use crate::distribution::{vacuum_reference, GridDensity, Interpolation, QDistribution, INTEGRATION_CUTOFF};
use crate::error::{Error, Result};
use crate::frame::NonLocalFrame;
use crate::profile::Profile1D;
use crate::quadrature::{Estimate, Quadrature};
use crate::scalar::Real;

use super::{ConcaveFunction, CriterionId, WitnessReport};

/// Smallest Rényi order evaluated; below it the integral is dominated by the
/// truncation radius.
pub const BETA_MIN: f64 = 0.05;
pub const BETA_MAX: f64 = 20.0;

pub fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::param("beta", format!("must be positive and finite, got {beta}")));
    }
    let b = beta.as_f64();
    if !(BETA_MIN..=BETA_MAX).contains(&b) {
        return Err(Error::TruncationDominated {
            beta: b,
            min: BETA_MIN,
            max: BETA_MAX,
        });
    }
    Ok(())
}

/// `½ ln det V + ln β/(β−1)`, or `1 + ½ ln det V` at `β = 1`.
pub fn gaussian_renyi_entropy<T: Real>(det_v: T, beta: T) -> T {
    let base = T::half() * det_v.ln();
    if beta == T::one() {
        base + T::one()
    } else {
        base + beta.ln() / (beta - T::one())
    }
}

/// Rényi entropy of order `beta` of `density` against a base measure whose
/// integrals the caller's `integrate` provides. Works with `(q/peak)^β` to
/// keep the integrand of order one.
fn renyi_from<T: Real>(
    beta: T,
    peak: T,
    integrate: impl Fn(&dyn Fn(T) -> T) -> Result<Estimate<T>>,
) -> Result<Estimate<T>> {
    if beta == T::one() {
        let e = integrate(&|q: T| -q.xlnx())?;
        return Ok(e);
    }
    let e = integrate(&|q: T| (q / peak).powf(beta))?;
    if !(e.value > T::zero()) {
        return Err(Error::Quadrature {
            estimate: e.value.as_f64(),
            error: e.error.as_f64(),
        });
    }
    let scale = T::one() / (T::one() - beta);
    Ok(Estimate {
        value: scale * (e.value.ln() + beta * peak.ln()),
        error: scale.abs() * e.error / e.value,
        converged: e.converged,
    })
}

/// 1D Rényi entropy `(1/(1−β)) ln ∫ p^β dx` on `[-radius, radius]`.
pub fn renyi_entropy_1d<T: Real>(
    density: impl Fn(T) -> T,
    radius: T,
    peak: T,
    beta: T,
    quad: &Quadrature,
) -> Result<Estimate<T>> {
    renyi_from(beta, peak, |g| quad.integrate1d(|x| g(density(x)), -radius, radius, 16))
}

fn profile_entropy<T: Real>(p: &Profile1D<T>, beta: T, quad: &Quadrature) -> Result<Estimate<T>> {
    let radius = p.tail_radius(beta.min(T::one()), INTEGRATION_CUTOFF * 1e-2);
    renyi_entropy_1d(|x| p.density(x), radius, p.peak(), beta, quad)
}

fn grid_entropy<T: Real>(g: &GridDensity<T>, beta: T) -> Estimate<T> {
    let area = g.spacing[0] * g.spacing[1] / T::TAU();
    let value = if beta == T::one() {
        -g.values.iter().map(|&v| area * v.xlnx()).sum::<T>()
    } else {
        let peak = g.peak();
        let sum: T = g.values.iter().map(|&v| area * (v / peak).powf(beta)).sum();
        (sum.ln() + beta * peak.ln()) / (T::one() - beta)
    };
    Estimate {
        value,
        error: T::zero(),
        converged: true,
    }
}

/// Rényi–Wehrl entropy `S_β(Q) = (1/(1−β)) ln ∫ Q^β dr ds/(2π)`, with the
/// Wehrl entropy `−∫ Q ln Q` at `β = 1`.
///
/// Separable distributions use `S_β = −ln 2π + S_β(p_x) + S_β(p_y)` with 1D
/// entropies against `dx`; piecewise-constant grids are summed exactly.
pub fn renyi_wehrl_entropy<T: Real>(q: &QDistribution<T>, beta: T, quad: &Quadrature) -> Result<Estimate<T>> {
    check_beta(beta)?;
    if let Some(p) = q.as_product() {
        let a = profile_entropy(&p.x, beta, quad)?;
        let b = profile_entropy(&p.y, beta, quad)?;
        return Ok(Estimate {
            value: a.value + b.value - T::TAU().ln(),
            error: a.error + b.error,
            converged: a.converged && b.converged,
        });
    }
    if let QDistribution::Grid(g) = q {
        if g.interpolation == Interpolation::PiecewiseConstant {
            return Ok(grid_entropy(g, beta));
        }
    }
    renyi_entropy_2d(q, beta, quad)
}

/// Rényi–Wehrl entropy by 2D quadrature, regardless of representation.
pub fn renyi_entropy_2d<T: Real>(q: &QDistribution<T>, beta: T, quad: &Quadrature) -> Result<Estimate<T>> {
    check_beta(beta)?;
    let square = q.integration_square(beta.min(T::lit(0.9)), None);
    renyi_from(beta, q.peak(), |g| quad.integrate2d(|r, s| g(q.density(r, s)), square))
}

/// `𝒲_β = S_β(Q) − ln β/(β−1) − ln(a₁b₁ + a₂b₂)`, with `S₁ − 1 − ln(…)` at
/// `β = 1`.
pub fn renyi_wehrl_witness<T: Real>(
    q: &QDistribution<T>,
    beta: T,
    frame: &NonLocalFrame<T>,
    quad: &Quadrature,
) -> Result<WitnessReport<T>> {
    let s = renyi_wehrl_entropy(q, beta, quad)?;
    let offset = if beta == T::one() {
        T::one()
    } else {
        beta.ln() / (beta - T::one())
    };
    let value = s.value - offset - frame.normalization().ln();
    Ok(WitnessReport::new(CriterionId::RenyiWehrl, *frame, value, s.error)
        .with_param("beta", beta)
        .with_param("converged", s.converged))
}

/// `𝒲_f = ∫ [f(Q) − f(Q̄')] dr ds/(2π)`.
///
/// Piecewise-constant grids contribute exact cell sums against the closed
/// form vacuum integral; everything else integrates the difference directly.
pub fn witness_general<T: Real>(
    q: &QDistribution<T>,
    f: &ConcaveFunction<T>,
    frame: &NonLocalFrame<T>,
    quad: &Quadrature,
) -> Result<WitnessReport<T>> {
    let c = frame.normalization();
    let sup = q.peak().max(T::one() / c);
    if sup > f.t_max() {
        return Err(Error::Domain {
            function: f.label(),
            sup: sup.as_f64(),
            t_max: f.t_max().as_f64(),
        });
    }
    let (value, error, converged) = match q {
        QDistribution::Grid(g) if g.interpolation == Interpolation::PiecewiseConstant => {
            let area = g.spacing[0] * g.spacing[1] / T::TAU();
            let sum: T = g.values.iter().map(|&v| area * f.eval(v)).sum();
            (sum - f.reference_integral(c, quad)?, T::zero(), true)
        }
        _ => {
            let vac = vacuum_reference(frame);
            let square = q.integration_square(f.tail_power(), Some(frame));
            let e = quad.integrate2d(|r, s| f.eval(q.density(r, s)) - f.eval(vac.density(r, s)), square)?;
            (e.value, e.error, e.converged)
        }
    };
    Ok(WitnessReport::new(CriterionId::General, *frame, value, error)
        .with_param("f", f.label())
        .with_param("converged", converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Branch;
    use crate::gaussian::Cov2;

    #[test]
    fn vacuum_entropies() {
        let quad = Quadrature::default();
        let frame = NonLocalFrame::<f64>::unit(Branch::Plus);
        let vac = vacuum_reference(&frame);
        let s2 = renyi_wehrl_entropy(&vac, 2.0, &quad).unwrap().value;
        assert!((s2 - 4f64.ln()).abs() < 1e-9);
        let s1 = renyi_wehrl_entropy(&vac, 1.0, &quad).unwrap().value;
        assert!((s1 - (1.0 + 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn flat_grid_entropy_is_log_area() {
        // unit mass spread over a 3 × 2 block
        let area = 6.0 / std::f64::consts::TAU;
        let g = GridDensity {
            origin: [0.0, 0.0],
            spacing: [1.0, 1.0],
            nx: 3,
            ny: 2,
            values: vec![1.0 / area; 6],
            interpolation: Interpolation::PiecewiseConstant,
        };
        let q = QDistribution::Grid(g);
        for beta in [0.3, 1.0, 2.0, 7.0] {
            let s = renyi_wehrl_entropy(&q, beta, &Quadrature::default()).unwrap().value;
            assert!((s - area.ln()).abs() < 1e-12, "beta={beta}");
        }
    }

    #[test]
    fn beta_range_is_enforced() {
        let q = QDistribution::<f64>::gaussian([0.0, 0.0], Cov2::isotropic(2.0)).unwrap();
        let quad = Quadrature::default();
        assert!(matches!(
            renyi_wehrl_entropy(&q, 0.01, &quad),
            Err(Error::TruncationDominated { .. })
        ));
        assert!(matches!(
            renyi_wehrl_entropy(&q, -1.0, &quad),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn wehrl_witness_of_separable_gaussian() {
        let q = QDistribution::<f64>::gaussian([0.0, 0.0], Cov2::isotropic(3.0)).unwrap();
        let frame = NonLocalFrame::unit(Branch::Plus);
        let quad = Quadrature::default();
        let r = witness_general(&q, &ConcaveFunction::Wehrl, &frame, &quad).unwrap();
        assert!((r.value - 0.5 * (9.0f64 / 4.0).ln()).abs() < 1e-8, "{}", r.value);
        assert!(!r.is_witnessed());
    }
}
