//! Husimi Q-distribution entanglement criteria for two-mode continuous
//! variable states.
//!
//! Everything numerical is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod criteria;
pub mod discretize;
pub mod distribution;
pub mod error;
pub mod frame;
pub mod gaussian;
pub mod phase_space;
pub mod profile;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod states;

pub use error::{Error, Result};

pub type QDistribution = distribution::QDistribution<f64>;
pub type NonLocalFrame = frame::NonLocalFrame<f64>;
pub type WitnessReport = criteria::WitnessReport<f64>;
pub type ConcaveFunction = criteria::ConcaveFunction<f64>;
pub type CovarianceSummary = distribution::CovarianceSummary<f64>;
pub type StateSpec = states::StateSpec<f64>;
pub type TileGrid = discretize::TileGrid<f64>;
pub type SampleSet = sampling::SampleSet<f64>;
pub type GmmFit = sampling::GmmFit<f64>;

#[cfg(test)]
mod tests {
    use crate::criteria::renyi_wehrl_witness;
    use crate::frame::{Branch, NonLocalFrame};
    use crate::quadrature::Quadrature;
    use crate::states::{tmsv_mixture_q, TmsvMixtureParams};

    #[test]
    fn single_precision_pipeline() {
        let frame = NonLocalFrame::<f32>::unit(Branch::Plus);
        let q = tmsv_mixture_q(&TmsvMixtureParams::tmsv(0.8f32), &frame).unwrap();
        let quad = Quadrature::default().with_rel_tol(1e-5);
        for beta in [0.5f32, 1.0, 2.0] {
            let w = renyi_wehrl_witness(&q, beta, &frame, &quad).unwrap();
            assert!((w.value + 1.8f32.ln()).abs() < 1e-4, "beta={beta}: {}", w.value);
        }
    }
}
