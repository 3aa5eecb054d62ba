//! Entanglement witnesses built on the marginal Husimi distribution, and the
//! marginal- and moment-based criteria they are compared against.
//!
//! Every witness is non-negative for separable states; a value below minus
//! its numerical error estimate certifies entanglement.

mod concave;
mod entropy;
mod moments;
mod optimize;
mod stw;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::frame::NonLocalFrame;
use crate::scalar::Real;

pub use concave::{ConcaveFunction, CustomConcave, CONCAVITY_SAMPLES, CONCAVITY_TOL};
pub use entropy::{
    check_beta, gaussian_renyi_entropy, renyi_entropy_1d, renyi_entropy_2d, renyi_wehrl_entropy, renyi_wehrl_witness,
    witness_general, BETA_MAX, BETA_MIN,
};
pub use moments::{
    classify_region, dgcz_witness, mgvt_witness, second_moment_witness, RegionClassification, RegionLabel,
};
pub use optimize::{
    default_alpha_grid, default_beta_grid, default_xi_grid, optimal_renyi_wehrl_example, optimal_stw_example,
    optimize_parameter, ExampleOptimum, Optimum, TIE_TOLERANCE,
};
pub use stw::{conjugate_order, stw_corrections, stw_witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionId {
    /// Witness functional for a general concave `f`.
    General,
    RenyiWehrl,
    SecondMoment,
    Dgcz,
    Mgvt,
    Stw,
    DiscretizedGeneral,
    DiscretizedRenyiWehrl,
    DiscretizedSecondMoment,
}

impl CriterionId {
    pub fn label(self) -> &'static str {
        match self {
            CriterionId::General => "general",
            CriterionId::RenyiWehrl => "renyi-wehrl",
            CriterionId::SecondMoment => "second-moment",
            CriterionId::Dgcz => "dgcz",
            CriterionId::Mgvt => "mgvt",
            CriterionId::Stw => "stw",
            CriterionId::DiscretizedGeneral => "discretized-general",
            CriterionId::DiscretizedRenyiWehrl => "discretized-renyi-wehrl",
            CriterionId::DiscretizedSecondMoment => "discretized-second-moment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Witnessed,
    NotWitnessed,
}

impl Verdict {
    pub fn is_witnessed(self) -> bool {
        self == Verdict::Witnessed
    }
}

/// Outcome of evaluating one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WitnessReport<T: Real> {
    pub criterion: CriterionId,
    pub frame: NonLocalFrame<T>,
    pub params: BTreeMap<String, serde_json::Value>,
    pub value: T,
    pub verdict: Verdict,
    pub error_estimate: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<serde_json::Value>,
}

impl<T: Real> WitnessReport<T> {
    /// Verdict is `Witnessed` iff `value < −error_estimate`.
    pub fn new(criterion: CriterionId, frame: NonLocalFrame<T>, value: T, error_estimate: T) -> Self {
        let error_estimate = error_estimate.abs();
        let verdict = if value < -error_estimate {
            Verdict::Witnessed
        } else {
            Verdict::NotWitnessed
        };
        Self {
            criterion,
            frame,
            params: BTreeMap::new(),
            value,
            verdict,
            error_estimate,
            diagnostics: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.params.insert(key.to_string(), v);
        self
    }

    pub fn with_diagnostics(mut self, diagnostics: serde_json::Value) -> Self {
        self.diagnostics = Some(diagnostics);
        self
    }

    pub fn is_witnessed(&self) -> bool {
        self.verdict.is_witnessed()
    }
}
