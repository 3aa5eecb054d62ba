use crate::error::{Error, Result};
use crate::frame::NonLocalFrame;
use crate::quadrature::{Estimate, Quadrature};
use crate::scalar::Real;
use crate::states::MarginalDensity1D;

use super::{renyi_entropy_1d, CriterionId, WitnessReport};

/// Below this distance from `α = 1` the correction terms use their joint
/// series expansion.
const SERIES_RADIUS: f64 = 1e-3;

/// `β = α/(2α − 1)`, so that `1/α + 1/β = 2`.
pub fn conjugate_order<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::half()) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must exceed 1/2, got {alpha}")));
    }
    Ok(alpha / (T::two() * alpha - T::one()))
}

fn correction<T: Real>(order: T) -> T {
    (order / T::PI()).ln() / (T::two() * (T::one() - order))
}

/// Sum of the two order-dependent constants of the criterion.
pub fn stw_corrections<T: Real>(alpha: T) -> Result<T> {
    let beta = conjugate_order(alpha)?;
    let eps = alpha - T::one();
    if eps.abs().as_f64() < SERIES_RADIUS {
        // −1 − ln π + ε²/6 + O(ε³)
        return Ok(-T::one() - T::PI().ln() + eps * eps / T::lit(6.0));
    }
    Ok(correction(alpha) + correction(beta))
}

fn marginal_entropy<T: Real>(m: &MarginalDensity1D<T>, order: T, quad: &Quadrature) -> Result<Estimate<T>> {
    let radius = m.tail_radius(order.min(T::one()), 1e-16);
    // peak only rescales the integrand, a coarse scan suffices
    let n = 400;
    let peak = (0..=n)
        .map(|i| m.density(radius * T::from_usize(i).unwrap() / T::from_usize(n).unwrap()))
        .fold(T::zero(), T::max);
    renyi_entropy_1d(|x| m.density(x), radius, peak, order, quad)
}

/// Marginal-entropy criterion
/// `S_α(f) + S_β(g) − ln(a₁b₁ + a₂b₂) + corrections(α)` with `1/α + 1/β = 2`
/// and 1D Rényi entropies against `dx`.
pub fn stw_witness<T: Real>(
    f_marg: &MarginalDensity1D<T>,
    g_marg: &MarginalDensity1D<T>,
    alpha: T,
    frame: &NonLocalFrame<T>,
    quad: &Quadrature,
) -> Result<WitnessReport<T>> {
    let beta = conjugate_order(alpha)?;
    let sf = marginal_entropy(f_marg, alpha, quad)?;
    let sg = marginal_entropy(g_marg, beta, quad)?;
    let value = sf.value + sg.value - frame.normalization().ln() + stw_corrections(alpha)?;
    Ok(WitnessReport::new(CriterionId::Stw, *frame, value, sf.error + sg.error)
        .with_param("alpha", alpha)
        .with_param("beta", beta))
}
