//! Both sides of the gradient and Harnack estimates, evaluated pointwise on a
//! flow trajectory.

mod cutoff;
mod quantities;
pub mod rhs;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cutoff::{build_cutoff, psi, psi_prime, psi_second, Constants, CutoffCertificate, CERTIFICATE_SAMPLES};
pub use quantities::{harnack_quantity, log_density, phi_quantity, sample_terms, time_derivative, SampleTerms};
pub use verify::{
    verify, Alternate, BoundsSource, EstimateReport, EstimateStatus, HypothesisCheck, MeasuredCurvature, PointRecord,
    VIOLATION_TOL,
};

use crate::flow::CurvatureBounds;
use crate::metric::{DistanceCenter, GeometryError};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    /// `‖∇u‖²/u²` under backward flow with conjugate heat.
    BackwardGradient,
    /// `‖∇u‖²/u²` under forward flow.
    ForwardGradient,
    /// `‖∇f‖² − α ∂_t f` on a geodesic cube.
    LocalHarnack,
    /// `‖∇u‖²/u² − α u_t/u` on the whole leaf.
    GlobalHarnack,
    /// The `α = 1`, `p = q = 2` case with `0 ≤ Ric ≤ ρ g`.
    LiYau,
    /// `t ‖∇u‖² ≤ C A (1 + ρ₁ T)`.
    GradientBound,
    /// `‖∇u‖²/u² − u_t/u ≤ αnp/(4t) + c(n) α² (ρ₁ + ρ₂)`.
    HarnackBound,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::BackwardGradient,
        TheoremId::ForwardGradient,
        TheoremId::LocalHarnack,
        TheoremId::GlobalHarnack,
        TheoremId::LiYau,
        TheoremId::GradientBound,
        TheoremId::HarnackBound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::BackwardGradient => "backward-gradient",
            TheoremId::ForwardGradient => "forward-gradient",
            TheoremId::LocalHarnack => "local-harnack",
            TheoremId::GlobalHarnack => "global-harnack",
            TheoremId::LiYau => "li-yau",
            TheoremId::GradientBound => "gradient-bound",
            TheoremId::HarnackBound => "harnack-bound",
        }
    }

    /// Whether the estimate is stated on a geodesic cube rather than the whole leaf.
    pub fn is_local(self) -> bool {
        matches!(self, TheoremId::BackwardGradient | TheoremId::ForwardGradient | TheoremId::LocalHarnack)
    }

    /// Whether the curvature scales read `Scal ≥ −ρ₁`, `Ric ≥ −ρ₂`, `‖∇Scal‖ ≤ ρ₃`
    /// (as opposed to `−ρ₁ g ≤ Ric ≤ ρ₂ g`).
    pub fn uses_scalar_bounds(self) -> bool {
        matches!(self, TheoremId::BackwardGradient | TheoremId::ForwardGradient)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = EstimateError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| EstimateError::UnknownTheorem(s.to_string()))
    }
}

/// Tolerance on `1/p + 1/q = 1/α`.
pub const EXPONENT_TOL: f64 = 1e-12;
/// Default slack on `A = (1 + A_SLACK) sup u`.
pub const A_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateParams<T> {
    pub alpha: T,
    pub p: T,
    pub q: T,
    /// Geodesic cube radius ρ; the cube is `d ≤ 2ρ`. `None` uses the whole leaf.
    pub radius: Option<T>,
    pub center: DistanceCenter,
    /// Upper bound for `u`; defaults to `(1 + A_SLACK) sup u`.
    pub a: Option<T>,
    /// Curvature scales; measured on the admissible set when absent.
    pub bounds: Option<CurvatureBounds<T>>,
}

impl<T: Real> Default for EstimateParams<T> {
    fn default() -> Self {
        Self {
            alpha: lit(2.0),
            p: lit(4.0),
            q: lit(4.0),
            radius: None,
            center: DistanceCenter::Node(0),
            a: None,
            bounds: None,
        }
    }
}

impl<T: Real> EstimateParams<T> {
    /// Parameters with `α = 1`, `p = q = 2`.
    pub fn li_yau() -> Self {
        Self { alpha: T::one(), p: lit(2.0), q: lit(2.0), ..Self::default() }
    }

    /// Checks `α`, `p`, `q`, `ρ` and `A` for the given estimate.
    pub fn validate(&self, theorem: TheoremId) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(EstimateError::InvalidParams { name, reason });
        let (alpha, p, q) = (self.alpha, self.p, self.q);
        if !(p > T::zero()) || !(q > T::zero()) || !p.is_finite() || !q.is_finite() {
            return bad("p, q", "must be positive and finite".into());
        }
        if !(alpha >= T::one()) || !alpha.is_finite() {
            return bad("alpha", format!("must be at least 1, got {alpha}"));
        }
        let gap = (T::one() / p + T::one() / q - T::one() / alpha).abs();
        if gap > lit(EXPONENT_TOL) {
            return bad("alpha-p-q", format!("1/p + 1/q = 1/alpha fails by {gap}"));
        }
        let needs_strict = match theorem {
            TheoremId::LocalHarnack | TheoremId::HarnackBound => true,
            // the nonnegative-Ricci branch allows α = 1
            TheoremId::GlobalHarnack => self.bounds.is_some_and(|b| b.rho1 > T::zero()),
            _ => false,
        };
        if needs_strict && !(alpha > T::one()) {
            return bad("alpha", format!("{theorem} needs alpha > 1"));
        }
        if theorem == TheoremId::LiYau && (alpha != T::one() || p != lit(2.0) || q != lit(2.0)) {
            return bad("alpha-p-q", "li-yau fixes alpha = 1 and p = q = 2".into());
        }
        if let Some(r) = self.radius {
            if !(r > T::zero()) || !r.is_finite() {
                return bad("radius", "must be positive and finite".into());
            }
        }
        if let Some(a) = self.a {
            if !(a > T::zero()) || !a.is_finite() {
                return bad("a", "must be positive and finite".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),
    #[error("invalid estimate parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },
    #[error("u = {value} exceeds the bound A = {bound} at node {node}")]
    ExceedsBound { node: usize, value: f64, bound: f64 },
    #[error("u must be positive; found {value} at node {node}")]
    NonPositive { node: usize, value: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("trajectory carries no heat field")]
    MissingHeat,
    #[error("no admissible points: the cube is empty or entirely masked")]
    EmptyAdmissibleSet,
    #[error("non-finite {what} at t = {time}, node {node}")]
    NonFinite { what: &'static str, time: f64, node: usize },
}

pub type Result<T, E = EstimateError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_ids_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.as_str().parse::<TheoremId>().unwrap(), t);
        }
        assert!("li_yau".parse::<TheoremId>().is_err());
    }

    #[test]
    fn exponent_constraint() {
        let ok = EstimateParams { alpha: 2.0, p: 3.0, q: 6.0, ..Default::default() };
        assert!(ok.validate(TheoremId::LocalHarnack).is_ok());
        let bad = EstimateParams { q: 5.0, ..ok };
        assert!(matches!(bad.validate(TheoremId::LocalHarnack), Err(EstimateError::InvalidParams { name: "alpha-p-q", .. })));
        let one = EstimateParams::<f64>::li_yau();
        assert!(one.validate(TheoremId::LiYau).is_ok());
        assert!(one.validate(TheoremId::GlobalHarnack).is_ok());
        assert!(matches!(one.validate(TheoremId::LocalHarnack), Err(EstimateError::InvalidParams { name: "alpha", .. })));
    }
}
