//! Registered concave functions `f` with `f(0) = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::scalar::Real;

/// Slack allowed in the midpoint concavity test.
pub const CONCAVITY_TOL: f64 = 1e-12;

/// Number of random pairs used by the concavity test.
pub const CONCAVITY_SAMPLES: usize = 1000;

/// User supplied concave function on `[0, t_max]`.
#[derive(Clone)]
pub struct CustomConcave<T: Real> {
    pub name: String,
    pub t_max: T,
    pub f: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Real> fmt::Debug for CustomConcave<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomConcave")
            .field("name", &self.name)
            .field("t_max", &self.t_max)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "", tag = "name", rename_all = "kebab-case")]
pub enum ConcaveFunction<T: Real> {
    /// `t^β` with `0 < β < 1`.
    Power { beta: T },
    /// `−t^β` with `β > 1`.
    NegPower { beta: T },
    /// `−t ln t`.
    Wehrl,
    /// `min(t, c)`.
    Min { c: T },
    /// `t / (t + c)`.
    Saturating { c: T },
    #[serde(skip)]
    Custom(CustomConcave<T>),
}

impl<T: Real> ConcaveFunction<T> {
    pub fn power(beta: T) -> Result<Self> {
        if !(beta > T::zero() && beta < T::one()) {
            return Err(Error::param("beta", format!("power requires 0 < beta < 1, got {beta}")));
        }
        Ok(Self::Power { beta })
    }

    pub fn neg_power(beta: T) -> Result<Self> {
        if !(beta > T::one()) || !beta.is_finite() {
            return Err(Error::param("beta", format!("neg-power requires beta > 1, got {beta}")));
        }
        Ok(Self::NegPower { beta })
    }

    /// `t^β` for `β < 1`, `−t^β` for `β > 1`, `−t ln t` at `β = 1`.
    pub fn renyi(beta: T) -> Result<Self> {
        if beta == T::one() {
            Ok(Self::Wehrl)
        } else if beta < T::one() {
            Self::power(beta)
        } else {
            Self::neg_power(beta)
        }
    }

    pub fn min(c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::param("c", format!("must be positive, got {c}")));
        }
        Ok(Self::Min { c })
    }

    pub fn saturating(c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::param("c", format!("must be positive, got {c}")));
        }
        Ok(Self::Saturating { c })
    }

    /// Wraps `f` after checking `f(0) = 0` and midpoint concavity on
    /// `[0, t_max]`.
    pub fn custom(name: impl Into<String>, t_max: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        let name = name.into();
        if !(t_max > T::zero()) || !t_max.is_finite() {
            return Err(Error::param("t_max", "must be positive and finite"));
        }
        let custom = CustomConcave {
            name,
            t_max,
            f: Arc::new(f),
        };
        let g = Self::Custom(custom);
        g.validate()?;
        Ok(g)
    }

    /// One instance of each registered family at representative parameters.
    pub fn registry() -> Vec<Self> {
        vec![
            Self::Power { beta: T::lit(0.5) },
            Self::Power { beta: T::lit(0.2) },
            Self::NegPower { beta: T::two() },
            Self::NegPower { beta: T::lit(5.0) },
            Self::Wehrl,
            Self::Min { c: T::lit(0.3) },
            Self::Saturating { c: T::lit(0.5) },
        ]
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        match self {
            Self::Power { beta } => t.powf(*beta),
            Self::NegPower { beta } => -t.powf(*beta),
            Self::Wehrl => -t.xlnx(),
            Self::Min { c } => t.min(*c),
            Self::Saturating { c } => t / (t + *c),
            Self::Custom(c) => (c.f)(t),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Power { beta } => format!("power:{beta}"),
            Self::NegPower { beta } => format!("neg-power:{beta}"),
            Self::Wehrl => "wehrl".into(),
            Self::Min { c } => format!("min:{c}"),
            Self::Saturating { c } => format!("saturating:{c}"),
            Self::Custom(c) => c.name.clone(),
        }
    }

    /// Right end of the domain (infinite for the registered families).
    pub fn t_max(&self) -> T {
        match self {
            Self::Custom(c) => c.t_max,
            _ => T::infinity(),
        }
    }

    /// Exponent `p` such that `|f(t)| ≲ t^p` near zero, used to size the
    /// integration domain.
    pub fn tail_power(&self) -> T {
        match self {
            Self::Power { beta } => *beta,
            // −t ln t decays slightly slower than t
            Self::Wehrl => T::lit(0.9),
            _ => T::one(),
        }
    }

    /// `∫ f(Q̄') dr ds/(2π)` for the vacuum reference of normalization `c`,
    /// via `c ∫₀^∞ f(e^{−u}/c) du`.
    pub fn reference_integral(&self, c: T, quad: &Quadrature) -> Result<T> {
        let one = T::one();
        Ok(match self {
            Self::Power { beta } => c.powf(one - *beta) / *beta,
            Self::NegPower { beta } => -c.powf(one - *beta) / *beta,
            Self::Wehrl => c.ln() + one,
            Self::Min { c: k } => {
                let ck = c * *k;
                if ck >= one {
                    one
                } else {
                    ck * (one + (one / ck).ln())
                }
            }
            Self::Saturating { c: k } => c * (one + one / (c * *k)).ln(),
            Self::Custom(custom) => {
                let g = |u: T| (custom.f)((-u).exp() / c);
                // e^{−u} < 1e-300 beyond u ≈ 690
                quad.integrate1d(g, T::zero(), T::lit(700.0), 64)?.value * c
            }
        })
    }

    /// Checks `f(0) = 0` and midpoint concavity on random pairs in
    /// `[0, min(t_max, 1)]`.
    pub fn validate(&self) -> Result<()> {
        let f0 = self.eval(T::zero());
        if f0 != T::zero() {
            return Err(Error::NotConcave(format!("{}: f(0) = {f0}, expected 0", self.label())));
        }
        let hi = self.t_max().min(T::one()).as_f64();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..CONCAVITY_SAMPLES {
            let x = T::lit(rng.random_range(0.0..=hi));
            let y = T::lit(rng.random_range(0.0..=hi));
            let mid = self.eval((x + y) * T::half());
            let chord = (self.eval(x) + self.eval(y)) * T::half();
            if mid < chord - T::lit(CONCAVITY_TOL) {
                return Err(Error::NotConcave(format!(
                    "{}: f(({x}+{y})/2) = {mid} < {chord}",
                    self.label()
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real> fmt::Display for ConcaveFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses `wehrl`, `power:β`, `neg-power:β`, `renyi:β`, `min:c` and
/// `saturating:c`.
impl<T: Real> FromStr for ConcaveFunction<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let number = || -> Result<T> {
            let a = arg.ok_or_else(|| Error::param("f", format!("`{name}` needs a parameter, e.g. `{name}:0.5`")))?;
            a.parse::<f64>()
                .map(T::lit)
                .map_err(|e| Error::param("f", format!("bad parameter `{a}`: {e}")))
        };
        match name {
            "wehrl" => Ok(Self::Wehrl),
            "power" => Self::power(number()?),
            "neg-power" => Self::neg_power(number()?),
            "renyi" => Self::renyi(number()?),
            "min" => Self::min(number()?),
            "saturating" => Self::saturating(number()?),
            other => Err(Error::param("f", format!("unknown concave function `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_concave_with_zero_at_origin() {
        for f in ConcaveFunction::<f64>::registry() {
            f.validate().unwrap();
        }
    }

    #[test]
    fn rejects_square() {
        let err = ConcaveFunction::<f64>::custom("square", 1.0, |t| t * t).unwrap_err();
        assert!(matches!(err, Error::NotConcave(_)));
        let err = ConcaveFunction::<f64>::custom("shifted", 1.0, |t| t.sqrt() + 1.0).unwrap_err();
        assert!(matches!(err, Error::NotConcave(_)));
    }

    #[test]
    fn closed_form_reference_integrals_match_generic_route() {
        let quad = Quadrature::default();
        for c in [2.0, 0.7, 3.5] {
            for f in ConcaveFunction::<f64>::registry() {
                let closed = f.reference_integral(c, &quad).unwrap();
                let g = f.clone();
                let custom = CustomConcave {
                    name: "copy".into(),
                    t_max: 10.0,
                    f: Arc::new(move |t| g.eval(t)),
                };
                let generic = ConcaveFunction::Custom(custom).reference_integral(c, &quad).unwrap();
                assert!((closed - generic).abs() < 1e-9, "{f} c={c}: {closed} vs {generic}");
            }
        }
    }

    #[test]
    fn parses_labels() {
        for f in ConcaveFunction::<f64>::registry() {
            let back: ConcaveFunction<f64> = f.label().parse().unwrap();
            assert_eq!(back.label(), f.label());
        }
        assert!(matches!(
            "renyi:1".parse::<ConcaveFunction<f64>>().unwrap(),
            ConcaveFunction::Wehrl
        ));
        assert!("power:1.5".parse::<ConcaveFunction<f64>>().is_err());
        assert!("cube".parse::<ConcaveFunction<f64>>().is_err());
    }
}
