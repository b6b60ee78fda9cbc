//! Pricing and shape analysis for one-dimensional jump-diffusion models.
//!
//! The price process follows `dX = β(X, t) dW + ∫ φ(X, t, z) ṽ(dt, dz)` with a
//! compensated Poisson measure of intensity `λ(t) dt m(dz)`. The crate
//! provides:
//!
//! * [`model`]: coefficient families, structural condition checks and the
//!   truncation of infinite-activity label measures,
//! * [`payoff`]: contract functions with a compact text syntax,
//! * [`pide`]: an IMEX finite-difference solver for European and Bermudan
//!   prices in time to maturity,
//! * [`mc`]: a reproducible parallel Euler Monte Carlo pricer,
//! * [`analysis`]: convexity, model-ordering and generator probes.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix the scalar for the common case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod mc;
pub mod model;
pub mod numerics;
pub mod payoff;
pub mod pide;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Model = model::Model<f64>;
pub type Payoff = payoff::Payoff<f64>;
pub type Grid = pide::Grid<f64>;
pub type PriceSurface = pide::PriceSurface<f64>;
pub type Path = mc::Path<f64>;
pub type MCEstimate = mc::MCEstimate<f64>;
pub type ConditionReport = model::ConditionReport<f64>;
pub type ConvexityReport = analysis::ConvexityReport<f64>;
pub type ComparisonReport = analysis::ComparisonReport<f64>;
pub type LcpReport = analysis::LcpReport<f64>;

pub type Model32 = model::Model<f32>;
pub type Payoff32 = payoff::Payoff<f32>;
pub type Grid32 = pide::Grid<f32>;
pub type PriceSurface32 = pide::PriceSurface<f32>;
pub type Path32 = mc::Path<f32>;
pub type MCEstimate32 = mc::MCEstimate<f32>;
pub type ConditionReport32 = model::ConditionReport<f32>;
pub type ConvexityReport32 = analysis::ConvexityReport<f32>;
pub type ComparisonReport32 = analysis::ComparisonReport<f32>;
pub type LcpReport32 = analysis::LcpReport<f32>;
