//! Local rotations and non-local scalings defining the `(r±, s∓)` plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which commuting pair of non-local variables the marginal lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `(r₊, s₋)`
    Plus,
    /// `(r₋, s₊)`
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

/// Local rotation angles and non-local scaling parameters.
///
/// The non-local quadratures are `R± = a₁R₁ ± a₂R₂` and `S± = b₁S₁ ± b₂S₂`;
/// the pairs with equal index commute to `i(a₁b₁ + a₂b₂)` only when
/// `a₁b₁ = a₂b₂`, which construction enforces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NonLocalFrame<T: Real> {
    theta1: T,
    theta2: T,
    a1: T,
    a2: T,
    b1: T,
    b2: T,
    branch: Branch,
}

/// Absolute tolerance on `a₁b₁ − a₂b₂`.
pub const SCALING_CONSTRAINT_TOL: f64 = 1e-12;

impl<T: Real> NonLocalFrame<T> {
    /// Validating constructor. Angles are reduced to `[0, 2π)`.
    ///
    /// Zero scalings are rejected: the variable change to non-local
    /// coordinates divides by `a₁a₂b₁b₂`.
    pub fn new(theta1: T, theta2: T, a1: T, a2: T, b1: T, b2: T, branch: Branch) -> Result<Self> {
        for (name, v) in [("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)] {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::FrameConstraint(format!(
                    "scaling {name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        if !theta1.is_finite() || !theta2.is_finite() {
            return Err(Error::FrameConstraint("rotation angles must be finite".into()));
        }
        let mismatch = (a1 * b1 - a2 * b2).abs();
        if mismatch.as_f64() > SCALING_CONSTRAINT_TOL {
            return Err(Error::FrameConstraint(format!(
                "a1*b1 = {} differs from a2*b2 = {}",
                a1 * b1,
                a2 * b2
            )));
        }
        Ok(Self {
            theta1: wrap_angle(theta1),
            theta2: wrap_angle(theta2),
            a1,
            a2,
            b1,
            b2,
            branch,
        })
    }

    /// `a₁ = b₁ = a₂ = b₂ = 1`, no local rotation.
    pub fn unit(branch: Branch) -> Self {
        let one = T::one();
        Self {
            theta1: T::zero(),
            theta2: T::zero(),
            a1: one,
            a2: one,
            b1: one,
            b2: one,
            branch,
        }
    }

    /// Unit scalings with equal local rotations `θ₁ = θ₂ = angle`.
    pub fn rotated_unit(angle: T, branch: Branch) -> Self {
        Self {
            theta1: wrap_angle(angle),
            theta2: wrap_angle(angle),
            ..Self::unit(branch)
        }
    }

    pub fn with_branch(self, branch: Branch) -> Self {
        Self { branch, ..self }
    }

    pub fn theta1(&self) -> T {
        self.theta1
    }
    pub fn theta2(&self) -> T {
        self.theta2
    }
    pub fn a1(&self) -> T {
        self.a1
    }
    pub fn a2(&self) -> T {
        self.a2
    }
    pub fn b1(&self) -> T {
        self.b1
    }
    pub fn b2(&self) -> T {
        self.b2
    }
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Commutator normalization `a₁b₁ + a₂b₂`.
    pub fn normalization(&self) -> T {
        self.a1 * self.b1 + self.a2 * self.b2
    }

    /// Determinant of the vacuum reference covariance, `(a₁b₁ + a₂b₂)²`.
    pub fn vacuum_det(&self) -> T {
        let c = self.normalization();
        c * c
    }

    /// Offsets added to the Wigner-level diagonal to obtain the Husimi-level
    /// covariance: `((a₁² + a₂²)/2, (b₁² + b₂²)/2)`.
    pub fn husimi_offsets(&self) -> (T, T) {
        (
            (self.a1 * self.a1 + self.a2 * self.a2) * T::half(),
            (self.b1 * self.b1 + self.b2 * self.b2) * T::half(),
        )
    }

    /// True when all four scalings equal one (to round-off).
    pub fn has_unit_scalings(&self) -> bool {
        let tol = T::lit(1e-12);
        [self.a1, self.a2, self.b1, self.b2]
            .iter()
            .all(|&v| (v - T::one()).abs() <= tol)
    }
}

fn wrap_angle<T: Real>(theta: T) -> T {
    let tau = T::TAU();
    let w = theta % tau;
    if w < T::zero() {
        w + tau
    } else {
        w
    }
}
