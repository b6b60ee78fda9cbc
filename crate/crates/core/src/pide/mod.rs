//! Finite-difference pricing in time to maturity `τ = T - t`.
//!
//! The solver steps `u_τ = L u` from the payoff slice with an IMEX Euler
//! scheme: diffusion and the compensator drift are implicit, the nonlocal
//! jump term is explicit. The explicit part is stable and monotone while
//! `λ_max m(Z) Δτ ≤ 1`.

mod grid;
mod operator;
mod solver;
mod surface;

pub use grid::Grid;
pub use operator::{BoundaryPolicy, JumpInterpolation, SchemeConfig};
pub use solver::{apply_generator, explicit_euler_step, min_time_nodes, solve_bermudan, solve_pide, MAX_GROWTH_DEGREE};
pub use surface::PriceSurface;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, PreparedJumps};
use crate::payoff::Payoff;
use crate::scalar::Scalar;

/// Default number of x nodes.
pub const DEFAULT_N_X: usize = 401;
/// Time steps per unit of maturity used as an accuracy floor.
pub const DEFAULT_STEPS_PER_YEAR: usize = 960;

/// Largest relative jump `φ / x` over labels, sampled levels and times.
pub fn jump_reach<S: Scalar>(model: &Model<S>, lo: S, hi: S, horizon: S, config: &SchemeConfig) -> Result<S> {
    let jumps = PreparedJumps::new(model, config.z_quadrature_nodes)?;
    if !jumps.has_jumps() {
        return Ok(S::zero());
    }
    let n = 96;
    let ratio = (hi / lo).ln() / S::from_usize_(n);
    let mut reach = S::zero();
    for k in 0..=n {
        let x = lo * (ratio * S::from_usize_(k)).exp();
        for &t in &[S::zero(), horizon * S::lit(0.5), horizon] {
            for &z in &jumps.quadrature().nodes {
                reach = reach.max(model.phi.eval(x, t, z) / x);
            }
        }
    }
    Ok(reach)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    Geometric,
}

/// Parameters that determine a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GridSpec<S> {
    pub spacing: Spacing,
    pub x_min: S,
    pub x_max: S,
    pub n_x: usize,
    pub n_t: usize,
    /// Point made an exact node of a geometric grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<S>,
}

impl<S: Scalar> GridSpec<S> {
    pub fn build(&self, horizon: S) -> Result<Grid<S>> {
        match (self.spacing, self.anchor) {
            (Spacing::Uniform, _) => Grid::uniform(self.x_min, self.x_max, self.n_x, horizon, self.n_t),
            (Spacing::Geometric, Some(a)) if a > self.x_min && a < self.x_max => {
                Grid::geometric_through(a, self.x_min, self.x_max, self.n_x, horizon, self.n_t)
            }
            (Spacing::Geometric, _) => Grid::geometric(self.x_min, self.x_max, self.n_x, horizon, self.n_t),
        }
    }
}

/// Geometric grid through `x0` covering `[ref/8, 8 ref (1 + reach)]`, with
/// enough time steps for both stability and accuracy.
pub fn default_grid_spec<S: Scalar>(
    model: &Model<S>,
    payoff: &Payoff<S>,
    x0: S,
    horizon: S,
    config: &SchemeConfig,
) -> Result<GridSpec<S>> {
    if !(x0 > S::zero()) || !(horizon > S::zero()) {
        return Err(Error::Domain("x0 and horizon must be positive".into()));
    }
    let level = payoff.reference_level().unwrap_or(x0);
    let lo = x0.min(level) / S::lit(8.0);
    let hi = S::lit(8.0) * x0.max(level);
    let reach = jump_reach(model, lo, hi, horizon, config)?;
    let stable = 2 * min_time_nodes(model, horizon, config)?;
    let accurate = (horizon.to_f64_() * DEFAULT_STEPS_PER_YEAR as f64).ceil() as usize + 1;
    Ok(GridSpec {
        spacing: Spacing::Geometric,
        x_min: lo,
        x_max: hi * (S::one() + reach),
        n_x: DEFAULT_N_X,
        n_t: stable.max(accurate).max(65),
        anchor: Some(x0),
    })
}

/// The grid of [`default_grid_spec`].
pub fn default_grid<S: Scalar>(
    model: &Model<S>,
    payoff: &Payoff<S>,
    x0: S,
    horizon: S,
    config: &SchemeConfig,
) -> Result<Grid<S>> {
    default_grid_spec(model, payoff, x0, horizon, config)?.build(horizon)
}

/// Values at `x0` on a grid and its refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDoubling {
    pub coarse: f64,
    pub fine: f64,
    /// `|fine - coarse|`, an estimate of the coarse-grid error.
    pub error: f64,
}

pub fn step_doubling<S: Scalar>(
    model: &Model<S>,
    payoff: &Payoff<S>,
    grid: &Grid<S>,
    config: &SchemeConfig,
    x0: S,
) -> Result<(PriceSurface<S>, StepDoubling)> {
    let coarse = solve_pide(model, payoff, grid, config)?;
    let fine = solve_pide(model, payoff, &grid.refined(), config)?;
    let (c, f) = (coarse.price_at(x0).to_f64_(), fine.price_at(x0).to_f64_());
    Ok((
        coarse,
        StepDoubling {
            coarse: c,
            fine: f,
            error: (f - c).abs(),
        },
    ))
}
