//! Discretisation of `L u = a u_xx + B u` on a nonuniform grid.
//!
//! `B u = λ ∫ (u(x+φ) - u - φ u_x) m(dz)` is split into a local drift
//! `-λ (∫ φ m(dz)) u_x` and the nonlocal part `λ ∫ (u(x+φ) - u) m(dz)`.
//! Diffusion and drift form a tridiagonal operator; the nonlocal part is a
//! sparse interpolation matrix over jump destinations.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, PreparedJumps};
use crate::numerics::{bracket, first_diff_weights, second_diff_weights};
use crate::scalar::Scalar;

/// Treatment of the truncation boundaries `x_min`, `x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// `u_xx = 0` on the boundary rows; values beyond the grid are continued linearly.
    #[default]
    LinearExtrapolation,
}

/// Interpolation used for `u(x + φ)` between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JumpInterpolation {
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    /// Simpson panels for the label integral (exact sums for atoms).
    pub z_quadrature_nodes: usize,
    pub boundary: BoundaryPolicy,
    /// Number of initial time steps taken as two half steps.
    pub smoothing_startup_steps: usize,
    pub interpolation: JumpInterpolation,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            z_quadrature_nodes: 64,
            boundary: BoundaryPolicy::LinearExtrapolation,
            smoothing_startup_steps: 4,
            interpolation: JumpInterpolation::Linear,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.z_quadrature_nodes < 2 {
            return Err(Error::InvalidSpec("z_quadrature_nodes must be at least 2".into()));
        }
        Ok(())
    }
}

/// Tridiagonal operator `(A u)_i = lower_i u_{i-1} + diag_i u_i + upper_i u_{i+1}`.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal<S> {
    pub lower: Vec<S>,
    pub diag: Vec<S>,
    pub upper: Vec<S>,
}

/// Rows of `∫ (u(x_i + φ) - u(x_i)) m(dz)` before the intensity factor.
#[derive(Debug, Clone)]
pub(crate) struct JumpMatrix<S> {
    rows: Vec<Vec<(usize, S)>>,
    /// Mass of labels with a nonzero jump at node i.
    row_mass: Vec<S>,
}

impl<S: Scalar> JumpMatrix<S> {
    fn apply_into(&self, u: &[S], scale: S, out: &mut [S]) {
        for (i, (row, &mass)) in self.rows.iter().zip(&self.row_mass).enumerate() {
            if row.is_empty() {
                continue;
            }
            let gathered = row.iter().fold(S::zero(), |acc, &(k, c)| acc + c * u[k]);
            out[i] = out[i] + scale * (gathered - mass * u[i]);
        }
    }
}

/// The discrete generator of a model on a fixed x-grid.
pub(crate) struct DiscreteGenerator<'a, S> {
    model: &'a Model<S>,
    jumps: PreparedJumps<'a, S>,
    xs: &'a [S],
    cached: Option<JumpMatrix<S>>,
}

impl<'a, S: Scalar> DiscreteGenerator<'a, S> {
    pub fn new(model: &'a Model<S>, xs: &'a [S], config: &SchemeConfig) -> Result<Self> {
        config.validate()?;
        let jumps = PreparedJumps::new(model, config.z_quadrature_nodes)?;
        let mut generator = Self {
            model,
            jumps,
            xs,
            cached: None,
        };
        if generator.jumps.has_jumps() && model.phi.is_t_independent() {
            generator.cached = Some(generator.build_jump_matrix(S::zero())?);
        }
        Ok(generator)
    }

    pub fn mass(&self) -> S {
        self.jumps.mass()
    }

    pub fn has_jumps(&self) -> bool {
        self.jumps.has_jumps()
    }

    fn build_jump_matrix(&self, t: S) -> Result<JumpMatrix<S>> {
        let xs = self.xs;
        let quad = self.jumps.quadrature();
        let mut rows = Vec::with_capacity(xs.len());
        let mut row_mass = Vec::with_capacity(xs.len());
        for &x in xs {
            let mut row = Vec::new();
            let mut mass = S::zero();
            for (&z, &w) in quad.nodes.iter().zip(&quad.weights) {
                let phi = self.model.phi.eval(x, t, z);
                if phi == S::zero() || w == S::zero() {
                    continue;
                }
                let dest = x + phi;
                if !(dest > S::zero()) {
                    return Err(Error::Positivity {
                        x: x.to_f64_(),
                        t: t.to_f64_(),
                        z: z.to_f64_(),
                        dest: dest.to_f64_(),
                    });
                }
                let k = bracket(xs, dest);
                let theta = (dest - xs[k]) / (xs[k + 1] - xs[k]);
                row.push((k, w * (S::one() - theta)));
                row.push((k + 1, w * theta));
                mass = mass + w;
            }
            rows.push(row);
            row_mass.push(mass);
        }
        Ok(JumpMatrix { rows, row_mass })
    }

    pub fn jump_matrix(&self, t: S) -> Result<Cow<'_, JumpMatrix<S>>> {
        match &self.cached {
            Some(m) => Ok(Cow::Borrowed(m)),
            None => Ok(Cow::Owned(self.build_jump_matrix(t)?)),
        }
    }

    /// Adds `λ(t) ∫ (u(x+φ) - u) m(dz)` into `out`, scaled by `scale`.
    pub fn add_jump_part(&self, t: S, u: &[S], scale: S, out: &mut [S]) -> Result<()> {
        if !self.jumps.has_jumps() {
            return Ok(());
        }
        let lambda = self.model.intensity(t);
        if lambda == S::zero() {
            return Ok(());
        }
        self.jump_matrix(t)?.apply_into(u, scale * lambda, out);
        Ok(())
    }

    /// Diffusion plus compensator drift at time `t`.
    ///
    /// Central differences are used where they keep the off-diagonals
    /// nonnegative; otherwise the drift is upwinded.
    pub fn local_operator(&self, t: S) -> Tridiagonal<S> {
        let xs = self.xs;
        let n = xs.len();
        let lambda = self.model.intensity(t);
        let drift = |x: S| {
            if self.jumps.has_jumps() && lambda != S::zero() {
                -lambda * self.jumps.compensator(x, t)
            } else {
                S::zero()
            }
        };
        let mut lower = vec![S::zero(); n];
        let mut diag = vec![S::zero(); n];
        let mut upper = vec![S::zero(); n];
        let half = S::lit(0.5);
        for i in 1..n - 1 {
            let (hm, hp) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            let beta = self.model.beta.eval(xs[i], t);
            let a = half * beta * beta;
            let v = drift(xs[i]);
            let (wm2, wc2, wp2) = second_diff_weights(hm, hp);
            let (wm1, wc1, wp1) = first_diff_weights(hm, hp);
            let (l, d, u) = (a * wm2 + v * wm1, a * wc2 + v * wc1, a * wp2 + v * wp1);
            if l >= S::zero() && u >= S::zero() {
                lower[i] = l;
                diag[i] = d;
                upper[i] = u;
            } else if v > S::zero() {
                lower[i] = a * wm2;
                diag[i] = a * wc2 - v / hp;
                upper[i] = a * wp2 + v / hp;
            } else {
                lower[i] = a * wm2 - v / hm;
                diag[i] = a * wc2 + v / hm;
                upper[i] = a * wp2;
            }
        }
        // boundary rows: u_xx = 0, one-sided drift into the domain
        let v0 = drift(xs[0]);
        let h0 = xs[1] - xs[0];
        diag[0] = -v0 / h0;
        upper[0] = v0 / h0;
        let vn = drift(xs[n - 1]);
        let hn = xs[n - 1] - xs[n - 2];
        lower[n - 1] = -vn / hn;
        diag[n - 1] = vn / hn;
        Tridiagonal { lower, diag, upper }
    }

    /// `(L u)(x_i, t)` at every node.
    pub fn apply(&self, t: S, u: &[S]) -> Result<Vec<S>> {
        let op = self.local_operator(t);
        let n = u.len();
        let mut out: Vec<S> = (0..n)
            .map(|i| {
                let mut v = op.diag[i] * u[i];
                if i > 0 {
                    v = v + op.lower[i] * u[i - 1];
                }
                if i + 1 < n {
                    v = v + op.upper[i] * u[i + 1];
                }
                v
            })
            .collect();
        self.add_jump_part(t, u, S::one(), &mut out)?;
        Ok(out)
    }
}
