use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::distribution::{CovarianceSummary, MomentLevel};
use crate::error::{Error, Result};
use crate::frame::NonLocalFrame;
use crate::scalar::Real;

use super::{CriterionId, WitnessReport};

/// `det V± − (a₁b₁ + a₂b₂)²` on the Husimi-level covariance.
pub fn second_moment_witness<T: Real>(v: &CovarianceSummary<T>, frame: &NonLocalFrame<T>) -> Result<WitnessReport<T>> {
    let h = v.to_husimi(frame);
    let m = h.matrix();
    if !m.is_positive_definite() {
        return Err(Error::NotPositiveDefinite { det: m.det().as_f64() });
    }
    let value = m.det() - frame.vacuum_det();
    Ok(WitnessReport::new(CriterionId::SecondMoment, *frame, value, T::zero()))
}

fn wigner_variances<T: Real>(v: &CovarianceSummary<T>, frame: &NonLocalFrame<T>) -> Result<(T, T)> {
    let w = v.to_wigner(frame);
    for var in [w.var_r, w.var_s] {
        if var < T::zero() || !var.is_finite() {
            return Err(Error::NegativeVariance(var.as_f64()));
        }
    }
    Ok((w.var_r, w.var_s))
}

/// Variance-sum criterion `σ²_r + σ²_s − (a₁b₁ + a₂b₂)` on Wigner-level
/// variances.
pub fn dgcz_witness<T: Real>(v: &CovarianceSummary<T>, frame: &NonLocalFrame<T>) -> Result<WitnessReport<T>> {
    let (vr, vs) = wigner_variances(v, frame)?;
    let value = vr + vs - frame.normalization();
    Ok(WitnessReport::new(CriterionId::Dgcz, *frame, value, T::zero()))
}

/// Variance-product criterion `σ²_r σ²_s − ((a₁b₁ + a₂b₂)/2)²` on
/// Wigner-level variances.
pub fn mgvt_witness<T: Real>(v: &CovarianceSummary<T>, frame: &NonLocalFrame<T>) -> Result<WitnessReport<T>> {
    let (vr, vs) = wigner_variances(v, frame)?;
    let half = frame.normalization() * T::half();
    let value = vr * vs - half * half;
    Ok(WitnessReport::new(CriterionId::Mgvt, *frame, value, T::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionLabel {
    /// Wigner covariance matrix not positive semidefinite.
    Gray,
    /// Witnessed by all three criteria.
    Green,
    /// Witnessed by MGVT and the determinant criterion.
    Yellow,
    /// Witnessed by MGVT only.
    Blue,
    /// Witnessed by the determinant criterion only.
    Red,
    None,
    /// Any other combination.
    Other,
}

impl RegionLabel {
    pub fn label(self) -> &'static str {
        match self {
            RegionLabel::Gray => "gray",
            RegionLabel::Green => "green",
            RegionLabel::Yellow => "yellow",
            RegionLabel::Blue => "blue",
            RegionLabel::Red => "red",
            RegionLabel::None => "none",
            RegionLabel::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionClassification {
    pub witnessed: BTreeSet<CriterionId>,
    pub physical: bool,
    pub label: RegionLabel,
}

/// Evaluates the variance-sum, variance-product and determinant criteria on
/// the same Wigner-level moments.
///
/// Moments whose Wigner covariance matrix is not positive semidefinite are
/// labelled [`RegionLabel::Gray`]; the criteria are still evaluated.
pub fn classify_region<T: Real>(
    sigma_r2: T,
    sigma_s2: T,
    sigma_rs: T,
    frame: &NonLocalFrame<T>,
) -> Result<RegionClassification> {
    for (name, v) in [("sigma_r2", sigma_r2), ("sigma_s2", sigma_s2), ("sigma_rs", sigma_rs)] {
        if !v.is_finite() {
            return Err(Error::param(name, "must be finite"));
        }
    }
    let physical = sigma_r2 >= T::zero() && sigma_s2 >= T::zero() && sigma_r2 * sigma_s2 >= sigma_rs * sigma_rs;
    let w = CovarianceSummary::wigner(sigma_r2, sigma_s2, sigma_rs);
    let mut witnessed = BTreeSet::new();
    if physical {
        if dgcz_witness(&w, frame)?.is_witnessed() {
            witnessed.insert(CriterionId::Dgcz);
        }
        if mgvt_witness(&w, frame)?.is_witnessed() {
            witnessed.insert(CriterionId::Mgvt);
        }
        match second_moment_witness(&w, frame) {
            Ok(r) if r.is_witnessed() => {
                witnessed.insert(CriterionId::SecondMoment);
            }
            Ok(_) => {}
            Err(Error::NotPositiveDefinite { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let (d, m, o) = (
        witnessed.contains(&CriterionId::Dgcz),
        witnessed.contains(&CriterionId::Mgvt),
        witnessed.contains(&CriterionId::SecondMoment),
    );
    let label = match (physical, d, m, o) {
        (false, ..) => RegionLabel::Gray,
        (true, true, true, true) => RegionLabel::Green,
        (true, false, true, true) => RegionLabel::Yellow,
        (true, false, true, false) => RegionLabel::Blue,
        (true, false, false, true) => RegionLabel::Red,
        (true, false, false, false) => RegionLabel::None,
        _ => RegionLabel::Other,
    };
    debug_assert!(w.level == MomentLevel::Wigner);
    Ok(RegionClassification {
        witnessed,
        physical,
        label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Branch;
    use crate::gaussian::Cov2;

    fn unit() -> NonLocalFrame<f64> {
        NonLocalFrame::unit(Branch::Plus)
    }

    #[test]
    fn comparison_criteria_arithmetic() {
        let f = unit();
        let vac = CovarianceSummary::wigner(1.0, 1.0, 0.0);
        assert_eq!(dgcz_witness(&vac, &f).unwrap().value, 0.0);
        assert_eq!(mgvt_witness(&vac, &f).unwrap().value, 0.0);
        assert_eq!(second_moment_witness(&vac, &f).unwrap().value, 0.0);
        let a = CovarianceSummary::wigner(0.5, 0.5, 0.0);
        assert_eq!(dgcz_witness(&a, &f).unwrap().value, -1.0);
        assert_eq!(mgvt_witness(&a, &f).unwrap().value, -0.75);
        let b = CovarianceSummary::wigner(3.0, 0.2, 0.0);
        assert!((dgcz_witness(&b, &f).unwrap().value - 1.2).abs() < 1e-15);
        assert!((mgvt_witness(&b, &f).unwrap().value + 0.4).abs() < 1e-15);
    }

    #[test]
    fn husimi_input_is_converted_for_comparisons() {
        let f = unit();
        let h = CovarianceSummary::husimi([0.0, 0.0], Cov2::isotropic(2.0));
        assert_eq!(dgcz_witness(&h, &f).unwrap().value, 0.0);
        let neg = CovarianceSummary::husimi([0.0, 0.0], Cov2::isotropic(0.5));
        assert!(matches!(dgcz_witness(&neg, &f), Err(Error::NegativeVariance(_))));
    }

    #[test]
    fn region_labels() {
        let f = unit();
        assert_eq!(classify_region(0.5, 0.5, 0.0, &f).unwrap().label, RegionLabel::Green);
        assert_eq!(classify_region(3.0, 0.2, 0.0, &f).unwrap().label, RegionLabel::Blue);
        assert_eq!(classify_region(1.0, 1.0, 0.9, &f).unwrap().label, RegionLabel::Red);
        assert_eq!(classify_region(2.0, 2.0, 0.0, &f).unwrap().label, RegionLabel::None);
        assert_eq!(classify_region(1.0, 1.0, 1.5, &f).unwrap().label, RegionLabel::Gray);
        assert_eq!(classify_region(-0.1, 1.0, 0.0, &f).unwrap().label, RegionLabel::Gray);
    }
}
