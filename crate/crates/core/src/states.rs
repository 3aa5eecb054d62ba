//! Benchmark states and their marginal Husimi distributions.

use serde::{Deserialize, Serialize};

use crate::distribution::QDistribution;
use crate::error::{Error, Result};
use crate::frame::{Branch, NonLocalFrame};
use crate::gaussian::{Cov2, Gaussian2, GaussianMixture};
use crate::phase_space::{apply_local_rotation, example_wigner_marginals, ExampleGlobal, Gaussian4, GlobalQ};
use crate::profile::Profile1D;
use crate::quadrature::Quadrature;
use crate::scalar::Real;

/// Two displaced two-mode squeezed vacua, weights `1−p` at `+r` and `p` at
/// `−r` along the `r±` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct TmsvMixtureParams<T: Real> {
    pub lambda: T,
    #[serde(default)]
    pub displacement_r: T,
    #[serde(default)]
    pub weight_p: T,
}

impl<T: Real> TmsvMixtureParams<T> {
    pub fn tmsv(lambda: T) -> Self {
        Self {
            lambda,
            displacement_r: T::zero(),
            weight_p: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > -T::one() && self.lambda < T::one()) {
            return Err(Error::param(
                "lambda",
                format!("must lie in (-1, 1), got {}", self.lambda),
            ));
        }
        if !self.displacement_r.is_finite() {
            return Err(Error::param("displacement_r", "must be finite"));
        }
        if !(self.weight_p >= T::zero() && self.weight_p <= T::one()) {
            return Err(Error::param(
                "weight_p",
                format!("must lie in [0, 1], got {}", self.weight_p),
            ));
        }
        Ok(())
    }
}

/// Widths, plane rotation and effective squeezing of the example state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct ExampleStateParams<T: Real> {
    pub sigma_plus: T,
    pub sigma_minus: T,
    #[serde(default)]
    pub phi: T,
    #[serde(default = "one")]
    pub xi: T,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> ExampleStateParams<T> {
    pub fn new(sigma_plus: T, sigma_minus: T) -> Self {
        Self {
            sigma_plus,
            sigma_minus,
            phi: T::zero(),
            xi: T::one(),
        }
    }

    pub fn with_phi(self, phi: T) -> Self {
        Self { phi, ..self }
    }

    pub fn with_xi(self, xi: T) -> Self {
        Self { xi, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_plus", self.sigma_plus),
            ("sigma_minus", self.sigma_minus),
            ("xi", self.xi),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !self.phi.is_finite() {
            return Err(Error::param("phi", "must be finite"));
        }
        Ok(())
    }

    /// Global state after equal local squeezing on both modes.
    pub fn squeezed_global(&self) -> Result<ExampleGlobal<T>> {
        self.validate()?;
        ExampleGlobal::new(self.xi * self.sigma_plus, self.xi * self.sigma_minus)
    }
}

/// Marginal quadrature distribution `Q(r±, s∓) ↦` one real variable,
/// normalized against `dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", tag = "form", rename_all = "kebab-case")]
pub enum MarginalDensity1D<T: Real> {
    Profile(Profile1D<T>),
    /// Marginal along the first axis of the product density `p_x(x) p_y(y)`
    /// rotated by `angle`.
    Rotated {
        x: Profile1D<T>,
        y: Profile1D<T>,
        angle: T,
    },
}

/// Fixed Gauss–Legendre rule for the inner projection integral.
const PROJECTION_PANELS: usize = 24;

impl<T: Real> MarginalDensity1D<T> {
    pub fn density(&self, t: T) -> T {
        match *self {
            MarginalDensity1D::Profile(p) => p.density(t),
            MarginalDensity1D::Rotated { x, y, angle } => {
                let (sn, cs) = angle.sin_cos();
                if sn.abs() < T::lit(1e-14) {
                    return x.density(t * cs.signum());
                }
                if cs.abs() < T::lit(1e-14) {
                    return y.density(-t * sn.signum());
                }
                let r = self.inner_radius();
                let quad = Quadrature::default();
                // ∫ p_x(c t + s u) p_y(−s t + c u) du
                quad.integrate1d(
                    |u| x.density(cs * t + sn * u) * y.density(-sn * t + cs * u),
                    -r,
                    r,
                    PROJECTION_PANELS,
                )
                .map(|e| e.value)
                .unwrap_or_else(|err| match err {
                    Error::Quadrature { estimate, .. } => T::lit(estimate),
                    _ => T::nan(),
                })
            }
        }
    }

    fn inner_radius(&self) -> T {
        match *self {
            MarginalDensity1D::Profile(p) => p.tail_radius(T::one(), 1e-18),
            MarginalDensity1D::Rotated { x, y, .. } => {
                x.tail_radius(T::one(), 1e-18).hypot(y.tail_radius(T::one(), 1e-18))
            }
        }
    }

    /// Radius beyond which `(p(x)/peak)^power` is below `eps`.
    pub fn tail_radius(&self, power: T, eps: f64) -> T {
        match *self {
            MarginalDensity1D::Profile(p) => p.tail_radius(power, eps),
            MarginalDensity1D::Rotated { x, y, .. } => x.tail_radius(power, eps).max(y.tail_radius(power, eps)),
        }
    }

    /// Radius beyond which the density is below the truncation threshold.
    pub fn support_radius(&self) -> T {
        self.tail_radius(T::one(), crate::distribution::TRUNCATION_EPSILON)
    }

    /// Closed-form variance.
    pub fn variance(&self) -> T {
        match *self {
            MarginalDensity1D::Profile(p) => p.variance(),
            MarginalDensity1D::Rotated { x, y, angle } => {
                let (sn, cs) = angle.sin_cos();
                cs * cs * x.variance() + sn * sn * y.variance()
            }
        }
    }
}

fn unsupported(frame: &NonLocalFrame<impl Real>) -> Error {
    Error::UnsupportedFrame(format!(
        "closed form requires unit scalings and no local rotation, got a=({}, {}) b=({}, {}) theta=({}, {})",
        frame.a1(),
        frame.a2(),
        frame.b1(),
        frame.b2(),
        frame.theta1(),
        frame.theta2()
    ))
}

/// Marginal of the displaced-TMSV mixture on the frame's branch.
///
/// The mixture is specified directly by its marginal form, which is the
/// same on either branch. Rotations with `ϑ₂ = −ϑ₁` rotate it rigidly.
pub fn tmsv_mixture_q<T: Real>(params: &TmsvMixtureParams<T>, frame: &NonLocalFrame<T>) -> Result<QDistribution<T>> {
    params.validate()?;
    let opposite = (frame.theta1() + frame.theta2()) % T::TAU();
    let tol = T::lit(1e-12);
    if !frame.has_unit_scalings() || !(opposite.abs() < tol || (opposite - T::TAU()).abs() < tol) {
        return Err(unsupported(frame));
    }
    let var = T::two() / (T::one() + params.lambda);
    let cov = Cov2::isotropic(var);
    let (sn, cs) = (-frame.theta1()).sin_cos();
    let r = params.displacement_r;
    let p = params.weight_p;
    if p == T::zero() || r == T::zero() {
        let mean = [cs * r * (T::one() - p - p), sn * r * (T::one() - p - p)];
        return Ok(QDistribution::Gaussian(Gaussian2::new(mean, cov)?));
    }
    let plus = Gaussian2::new([cs * r, sn * r], cov)?;
    let minus = Gaussian2::new([-cs * r, -sn * r], cov)?;
    Ok(QDistribution::GaussianMixture(GaussianMixture::new(
        vec![T::one() - p, p],
        vec![plus, minus],
    )?))
}

/// `Q₊(r₊, s₋)` of the example state.
pub fn example_state_q<T: Real>(params: &ExampleStateParams<T>) -> Result<QDistribution<T>> {
    example_state_q_on(params, Branch::Plus)
}

/// Example-state marginal on either branch, rotated by `φ` in its plane.
/// Squeezing by `ξ` acts on the state, scaling both widths.
pub fn example_state_q_on<T: Real>(params: &ExampleStateParams<T>, branch: Branch) -> Result<QDistribution<T>> {
    let g = params.squeezed_global()?;
    let mut p = g.unit_marginal(branch);
    p.angle = params.phi;
    Ok(QDistribution::PolyGaussian(p))
}

/// Wigner (quadrature) marginals `(f, g)` of the kept pair: `f` in
/// `r±`, `g` in `s∓`, both in the plane rotated by `φ`.
pub fn example_state_marginals<T: Real>(
    params: &ExampleStateParams<T>,
    branch: Branch,
) -> Result<(MarginalDensity1D<T>, MarginalDensity1D<T>)> {
    let g = params.squeezed_global()?;
    let (p2, m2) = (g.sigma_plus * g.sigma_plus, g.sigma_minus * g.sigma_minus);
    let (fx, gy) = example_wigner_marginals(p2, m2, branch);
    let phi = params.phi;
    if phi == T::zero() {
        return Ok((MarginalDensity1D::Profile(fx), MarginalDensity1D::Profile(gy)));
    }
    // The second axis of a plane rotated by φ is the first axis rotated by φ + π/2.
    Ok((
        MarginalDensity1D::Rotated {
            x: fx,
            y: gy,
            angle: phi,
        },
        MarginalDensity1D::Rotated {
            x: gy,
            y: fx,
            angle: phi,
        },
    ))
}

/// Marginal of the two-mode vacuum in `frame`.
pub fn vacuum_product_q<T: Real>(frame: &NonLocalFrame<T>) -> Result<QDistribution<T>> {
    let q4 = apply_local_rotation(&GlobalQ::Gaussian(Gaussian4::vacuum()), frame)?;
    let g = q4.as_gaussian().expect("Gaussian input");
    let (i, j) = match frame.branch() {
        Branch::Plus => (0, 3),
        Branch::Minus => (2, 1),
    };
    Ok(QDistribution::Gaussian(g.marginal(i, j)?))
}

/// Catalogue entry addressable by name with a JSON parameter object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", tag = "name", content = "params", rename_all = "kebab-case")]
pub enum StateSpec<T: Real> {
    Vacuum,
    Tmsv {
        lambda: T,
    },
    TmsvMixture(TmsvMixtureParams<T>),
    Example(ExampleStateParams<T>),
    /// Gaussian marginal given directly by its Husimi covariance.
    Gaussian {
        var_r: T,
        var_s: T,
        #[serde(default)]
        cov_rs: T,
    },
}

impl<T: Real> StateSpec<T> {
    pub fn name(&self) -> &'static str {
        match self {
            StateSpec::Vacuum => "vacuum",
            StateSpec::Tmsv { .. } => "tmsv",
            StateSpec::TmsvMixture(_) => "tmsv-mixture",
            StateSpec::Example(_) => "example",
            StateSpec::Gaussian { .. } => "gaussian",
        }
    }

    /// Parses `name` and a JSON parameter object.
    pub fn from_name(name: &str, params: serde_json::Value) -> Result<Self> {
        let value = if params.is_null() {
            serde_json::json!({ "name": name })
        } else {
            serde_json::json!({ "name": name, "params": params })
        };
        serde_json::from_value(value).map_err(|e| Error::param("state", e.to_string()))
    }

    /// Marginal Husimi distribution in `frame`.
    pub fn marginal(&self, frame: &NonLocalFrame<T>) -> Result<QDistribution<T>> {
        match self {
            StateSpec::Vacuum => vacuum_product_q(frame),
            StateSpec::Tmsv { lambda } => tmsv_mixture_q(&TmsvMixtureParams::tmsv(*lambda), frame),
            StateSpec::TmsvMixture(p) => tmsv_mixture_q(p, frame),
            StateSpec::Example(p) => {
                if !frame.has_unit_scalings() {
                    return Err(unsupported(frame));
                }
                let mut p = *p;
                p.phi = p.phi - frame.theta1();
                let opposite = (frame.theta1() + frame.theta2()) % T::TAU();
                let tol = T::lit(1e-12);
                if !(opposite.abs() < tol || (opposite - T::TAU()).abs() < tol) {
                    return Err(unsupported(frame));
                }
                example_state_q_on(&p, frame.branch())
            }
            StateSpec::Gaussian { var_r, var_s, cov_rs } => Ok(QDistribution::Gaussian(Gaussian2::centered(
                Cov2::new(*var_r, *cov_rs, *var_s),
            )?)),
        }
    }

    /// Wigner-level quadrature marginals for the marginal-based criteria.
    pub fn quadrature_marginals(
        &self,
        frame: &NonLocalFrame<T>,
    ) -> Result<(MarginalDensity1D<T>, MarginalDensity1D<T>)> {
        match self {
            StateSpec::Example(p) => example_state_marginals(p, frame.branch()),
            _ => {
                let q = self.marginal(frame)?;
                let (_, cov) = q.analytic_moments().expect("Gaussian catalogue entries");
                let (da, db) = frame.husimi_offsets();
                let (vr, vs) = (cov.xx - da, cov.yy - db);
                if !(vr > T::zero()) || !(vs > T::zero()) || !matches!(q, QDistribution::Gaussian(_)) {
                    return Err(Error::param(
                        "state",
                        "quadrature marginals are available for Gaussian states and the example state",
                    ));
                }
                Ok((
                    MarginalDensity1D::Profile(Profile1D::normal(vr)?),
                    MarginalDensity1D::Profile(Profile1D::normal(vs)?),
                ))
            }
        }
    }
}

/// Description of each catalogue entry and its parameters.
pub fn catalogue_entries() -> Vec<(&'static str, &'static str, serde_json::Value)> {
    use serde_json::json;
    vec![
        ("vacuum", "two-mode vacuum (separable)", json!(null)),
        ("tmsv", "two-mode squeezed vacuum", json!({ "lambda": 0.8 })),
        (
            "tmsv-mixture",
            "mixture of two oppositely displaced squeezed vacua",
            json!({ "lambda": 0.8, "displacement_r": 2.0, "weight_p": 0.3 }),
        ),
        (
            "example",
            "non-Gaussian pure state with widths sigma_plus, sigma_minus",
            json!({ "sigma_plus": 2.0, "sigma_minus": 1.0, "phi": 0.0, "xi": 1.0 }),
        ),
        (
            "gaussian",
            "centred Gaussian marginal with the given Husimi covariance",
            json!({ "var_r": 3.0, "var_s": 3.0, "cov_rs": 0.0 }),
        ),
    ]
}

/// Representative states used by property checks across modules.
pub fn reference_states<T: Real>() -> Vec<(String, QDistribution<T>)> {
    let frame = NonLocalFrame::unit(Branch::Plus);
    let lit = T::lit;
    let mut out = vec![
        ("vacuum".to_string(), vacuum_product_q(&frame).expect("vacuum")),
        (
            "tmsv(0.8)".to_string(),
            tmsv_mixture_q(&TmsvMixtureParams::tmsv(lit(0.8)), &frame).expect("tmsv"),
        ),
        (
            "tmsv-mixture(0.8, 2, 0.3)".to_string(),
            tmsv_mixture_q(
                &TmsvMixtureParams {
                    lambda: lit(0.8),
                    displacement_r: lit(2.0),
                    weight_p: lit(0.3),
                },
                &frame,
            )
            .expect("mixture"),
        ),
        (
            "thermal(det 9)".to_string(),
            QDistribution::Gaussian(Gaussian2::centered(Cov2::isotropic(lit(3.0))).expect("thermal")),
        ),
    ];
    for (sp, sm, phi, xi) in [(2.0, 1.0, 0.0, 1.0), (1.0, 1.0, 0.0, 1.0), (1.5, 1.0, 0.7, 1.3)] {
        let p = ExampleStateParams::new(lit(sp), lit(sm))
            .with_phi(lit(phi))
            .with_xi(lit(xi));
        out.push((
            format!("example({sp}, {sm}, {phi}, {xi})"),
            example_state_q(&p).expect("example"),
        ));
    }
    out
}
