//! Jump-diffusion models `dX = beta dW + ∫ phi ṽ(dt, dz)`, their structural
//! condition checks and the finite-intensity truncation of general models.

mod coefficient;
mod conditions;
mod jump;
mod measure;
mod prepared;
mod truncate;

pub use coefficient::{Bump, CoefficientSpec, ZFunction};
pub use conditions::{check_conditions, ConditionEntry, ConditionReport, ConditionStatus, Resolution, Witness};
pub use jump::{JumpSizeSpec, SignPattern};
pub use measure::{DensitySpec, JumpQuadrature, MeasureSpec};
pub use prepared::PreparedJumps;
pub use truncate::{greatest_convex_minorant, truncate_model, TruncationOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A one-dimensional jump-diffusion model.
///
/// `lambda` must not depend on `x`; it is evaluated at `x = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Model<S> {
    pub label: String,
    /// Lower-bound constant in `phi(x,t,z) > gamma x`; must exceed -1.
    pub gamma: S,
    pub lambda: CoefficientSpec<S>,
    pub beta: CoefficientSpec<S>,
    pub phi: JumpSizeSpec<S>,
    pub measure: MeasureSpec<S>,
}

/// Coefficient values at a single point `(x, t, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientValues<S> {
    pub beta: S,
    pub phi: S,
    pub lambda: S,
}

impl<S: Scalar> Model<S> {
    /// Validates and builds a model.
    pub fn new(
        label: impl Into<String>,
        beta: CoefficientSpec<S>,
        phi: JumpSizeSpec<S>,
        lambda: CoefficientSpec<S>,
        measure: MeasureSpec<S>,
        gamma: S,
    ) -> Result<Self> {
        let model = Self {
            label: label.into(),
            gamma,
            lambda,
            beta,
            phi,
            measure,
        };
        model.validate()?;
        Ok(model)
    }

    /// Black–Scholes-type diffusion `beta = sigma x` without jumps.
    pub fn diffusion(label: impl Into<String>, sigma: S) -> Self {
        Self {
            label: label.into(),
            gamma: S::lit(-0.5),
            lambda: CoefficientSpec::Zero,
            beta: CoefficientSpec::Proportional { c: sigma },
            phi: JumpSizeSpec::Zero,
            measure: MeasureSpec::LebesgueUnit,
        }
    }

    /// `beta = sigma x`, `phi = c x`, constant intensity on the unit label space.
    pub fn relative_jump(label: impl Into<String>, sigma: S, c: S, intensity: S) -> Self {
        Self {
            label: label.into(),
            gamma: if c >= S::zero() {
                S::lit(-0.5)
            } else {
                (c - S::one()) * S::lit(0.5)
            },
            lambda: CoefficientSpec::Constant { value: intensity },
            beta: CoefficientSpec::Proportional { c: sigma },
            phi: JumpSizeSpec::RelativeConstant { c },
            measure: MeasureSpec::LebesgueUnit,
        }
    }

    pub fn with_gamma(mut self, gamma: S) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > -S::one()) {
            return Err(Error::InvalidSpec(format!("gamma must exceed -1, got {}", self.gamma)));
        }
        self.beta.validate()?;
        self.lambda.validate()?;
        self.phi.validate()?;
        self.measure.validate()?;
        if !self.lambda.is_x_independent() {
            return Err(Error::InvalidSpec("lambda may depend on t only".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model JSON: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    /// Jump intensity `lambda(t)`.
    #[inline]
    pub fn intensity(&self, t: S) -> S {
        self.lambda.eval(S::one(), t)
    }

    /// Evaluates `(beta, phi, lambda)` at `(x, t, z)` for `t ∈ [0, horizon]`.
    pub fn eval(&self, x: S, t: S, z: S, horizon: S) -> Result<CoefficientValues<S>> {
        if !(x > S::zero()) || !x.is_finite() {
            return Err(Error::Domain(format!("x must be positive, got {x}")));
        }
        if !(t >= S::zero() && t <= horizon) {
            return Err(Error::Domain(format!("t={t} outside [0, {horizon}]")));
        }
        if !self.measure.contains(z) {
            return Err(Error::Domain(format!(
                "label z={z} outside the measure's parameter space"
            )));
        }
        Ok(CoefficientValues {
            beta: self.beta.eval(x, t),
            phi: self.phi.eval(x, t, z),
            lambda: self.intensity(t),
        })
    }

    pub fn is_finite_activity(&self) -> bool {
        self.phi.is_zero() || self.measure.is_finite_activity()
    }

    /// Same model with the jump part removed.
    pub fn without_jumps(&self) -> Self {
        Self {
            label: format!("{} (no jumps)", self.label),
            phi: JumpSizeSpec::Zero,
            ..self.clone()
        }
    }
}

/// The pure-jump model `dX = phi(X(t-)) (dN - dt)` with a unit-intensity
/// Poisson process and a trapezoidal bump `phi` supported in `(1/2, 3/4)`.
/// Its option values are not convex for the put `(1 - x)^+`.
pub fn counterexample_model<S: Scalar>() -> Model<S> {
    Model {
        label: "bump counterexample".into(),
        gamma: S::lit(-0.5),
        lambda: CoefficientSpec::Constant { value: S::one() },
        beta: CoefficientSpec::Zero,
        phi: JumpSizeSpec::Bump(Bump {
            x_lo: S::lit(0.5),
            x_rise: S::lit(0.55),
            x_fall: S::lit(0.70),
            x_hi: S::lit(0.75),
            height: S::lit(1.2),
        }),
        measure: MeasureSpec::LebesgueUnit,
    }
}
