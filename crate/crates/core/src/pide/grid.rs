use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::strictly_increasing;
use crate::scalar::Scalar;

/// Space-time grid: positive, strictly increasing `x_nodes` and a uniform
/// partition `t_nodes` of `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Grid<S> {
    pub x_nodes: Vec<S>,
    pub t_nodes: Vec<S>,
}

impl<S: Scalar> Grid<S> {
    pub fn new(x_nodes: Vec<S>, horizon: S, n_t: usize) -> Result<Self> {
        if !(horizon > S::zero()) || !horizon.is_finite() {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        if n_t < 2 {
            return Err(Error::Domain("need at least 2 time nodes".into()));
        }
        let dt = horizon / S::from_usize_(n_t - 1);
        let t_nodes = (0..n_t)
            .map(|k| if k == n_t - 1 { horizon } else { dt * S::from_usize_(k) })
            .collect();
        let grid = Self { x_nodes, t_nodes };
        grid.validate()?;
        Ok(grid)
    }

    pub fn uniform(x_min: S, x_max: S, n_x: usize, horizon: S, n_t: usize) -> Result<Self> {
        if n_x < 3 {
            return Err(Error::Domain("need at least 3 space nodes".into()));
        }
        let h = (x_max - x_min) / S::from_usize_(n_x - 1);
        let xs = (0..n_x)
            .map(|i| {
                if i == n_x - 1 {
                    x_max
                } else {
                    x_min + h * S::from_usize_(i)
                }
            })
            .collect();
        Self::new(xs, horizon, n_t)
    }

    pub fn geometric(x_min: S, x_max: S, n_x: usize, horizon: S, n_t: usize) -> Result<Self> {
        if n_x < 3 || !(x_min > S::zero()) {
            return Err(Error::Domain(
                "geometric grid needs x_min > 0 and at least 3 nodes".into(),
            ));
        }
        let ratio = (x_max / x_min).ln() / S::from_usize_(n_x - 1);
        let xs = (0..n_x)
            .map(|i| {
                if i == n_x - 1 {
                    x_max
                } else {
                    x_min * (ratio * S::from_usize_(i)).exp()
                }
            })
            .collect();
        Self::new(xs, horizon, n_t)
    }

    /// Geometric grid with `n_x` nodes starting at `x_min`, stretched so that
    /// `anchor` is a node and the last node is at least `x_max`.
    pub fn geometric_through(anchor: S, x_min: S, x_max: S, n_x: usize, horizon: S, n_t: usize) -> Result<Self> {
        if !(x_min > S::zero() && x_min < anchor && anchor < x_max) || n_x < 3 {
            return Err(Error::Domain("need 0 < x_min < anchor < x_max and n_x >= 3".into()));
        }
        let span = (x_max / x_min).ln();
        let below = (anchor / x_min).ln();
        let steps = S::from_usize_(n_x - 1);
        // node index of the anchor, then the common log-step that hits it exactly
        let k = (below / span * steps).round().max(S::one()).min(steps - S::one());
        let log_step = below / k;
        let k = k.to_usize().expect("small index");
        let xs = (0..n_x)
            .map(|i| {
                if i == k {
                    anchor
                } else {
                    anchor * (log_step * (S::from_usize_(i) - S::from_usize_(k))).exp()
                }
            })
            .collect();
        Self::new(xs, horizon, n_t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_nodes.len() < 3 || self.t_nodes.len() < 2 {
            return Err(Error::Domain("grid needs N_x >= 3 and N_t >= 2".into()));
        }
        if !(self.x_nodes[0] > S::zero()) || !strictly_increasing(&self.x_nodes) {
            return Err(Error::Domain("x nodes must be positive and strictly increasing".into()));
        }
        if self.t_nodes[0] != S::zero() || !strictly_increasing(&self.t_nodes) {
            return Err(Error::Domain("t nodes must start at 0 and increase".into()));
        }
        Ok(())
    }

    pub fn n_x(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn n_t(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn x_min(&self) -> S {
        self.x_nodes[0]
    }

    pub fn x_max(&self) -> S {
        self.x_nodes[self.x_nodes.len() - 1]
    }

    pub fn horizon(&self) -> S {
        self.t_nodes[self.t_nodes.len() - 1]
    }

    pub fn dt(&self) -> S {
        self.horizon() / S::from_usize_(self.n_t() - 1)
    }

    /// Grid with a midpoint inserted in every x-cell and every time step halved;
    /// every node of `self` is a node of the result.
    pub fn refined(&self) -> Self {
        let mut xs = Vec::with_capacity(2 * self.n_x() - 1);
        for w in self.x_nodes.windows(2) {
            xs.push(w[0]);
            xs.push((w[0] * w[1]).sqrt());
        }
        xs.push(self.x_max());
        let mut grid = Self::new(xs, self.horizon(), 2 * self.n_t() - 1).expect("refinement of a valid grid");
        // keep the coarse time nodes bit-identical
        for (k, &t) in self.t_nodes.iter().enumerate() {
            grid.t_nodes[2 * k] = t;
        }
        grid
    }

    /// Index of an x node equal to `x` (within round-off), if any.
    pub fn x_index(&self, x: S) -> Option<usize> {
        let tol = S::noise_floor() * x.abs().max(S::one());
        self.x_nodes.iter().position(|&v| (v - x).abs() <= tol)
    }

    /// Index of the calendar time node matching `t`, if any.
    pub fn t_index(&self, t: S) -> Option<usize> {
        let tol = S::lit(1e-9) * self.horizon().max(S::one());
        let k = (t / self.dt()).round();
        let k = k.to_usize()?;
        (k < self.n_t() && (self.t_nodes[k] - t).abs() <= tol).then_some(k)
    }
}
