use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Grid;
use crate::numerics::{interp_linear, Extrapolation};
use crate::scalar::Scalar;

/// `u(x_i, τ_j)` on a grid, with `τ` the time to maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PriceSurface<S> {
    /// `values[i][j] = u(x_i, τ_j)`.
    pub values: Vec<Vec<S>>,
    pub grid: Grid<S>,
    pub model_label: String,
    pub payoff: String,
}

impl<S: Scalar> PriceSurface<S> {
    pub(crate) fn from_slices(slices: &[Vec<S>], grid: Grid<S>, model_label: String, payoff: String) -> Self {
        let n_x = grid.n_x();
        let values = (0..n_x).map(|i| slices.iter().map(|s| s[i]).collect()).collect();
        Self {
            values,
            grid,
            model_label,
            payoff,
        }
    }

    pub fn value(&self, i: usize, j: usize) -> S {
        self.values[i][j]
    }

    /// The slice `u(·, τ_j)` over all x nodes.
    pub fn slice(&self, j: usize) -> Vec<S> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// The slice at `τ = T`, i.e. calendar time 0.
    pub fn final_slice(&self) -> Vec<S> {
        self.slice(self.grid.n_t() - 1)
    }

    /// Linear interpolation of `u(·, τ_j)` at `x`.
    pub fn value_at(&self, x: S, j: usize) -> S {
        interp_linear(&self.grid.x_nodes, &self.slice(j), x, Extrapolation::Linear)
    }

    /// Price today: `u(x, τ = T)`.
    pub fn price_at(&self, x: S) -> S {
        self.value_at(x, self.grid.n_t() - 1)
    }

    /// Calendar time of slice `j`.
    pub fn calendar_time(&self, j: usize) -> S {
        self.grid.horizon() - self.grid.t_nodes[j]
    }

    /// CSV with header `x,tau,u`, time-major, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,tau,u\n");
        for (j, &tau) in self.grid.t_nodes.iter().enumerate() {
            for (i, &x) in self.grid.x_nodes.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e}",
                    x.to_f64_(),
                    tau.to_f64_(),
                    self.values[i][j].to_f64_()
                );
            }
        }
        out
    }
}
