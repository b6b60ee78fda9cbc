use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numerics::second_difference;
use crate::pide::PriceSurface;
use crate::scalar::Scalar;

/// Grid point in `(x, τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Location<S> {
    pub x: S,
    pub tau: S,
}

/// Where a surface came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SurfaceProvenance<S> {
    pub model: String,
    pub payoff: String,
    pub n_x: usize,
    pub n_t: usize,
    pub x_min: S,
    pub x_max: S,
    pub horizon: S,
}

impl<S: Scalar> SurfaceProvenance<S> {
    pub fn of(surface: &PriceSurface<S>) -> Self {
        let g = &surface.grid;
        Self {
            model: surface.model_label.clone(),
            payoff: surface.payoff.clone(),
            n_x: g.n_x(),
            n_t: g.n_t(),
            x_min: g.x_min(),
            x_max: g.x_max(),
            horizon: g.horizon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SliceConvexity<S> {
    pub tau: S,
    pub is_convex: bool,
    pub min_second_difference: S,
    pub x_at_min: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ConvexityReport<S> {
    pub is_convex: bool,
    pub min_second_difference: S,
    pub location: Location<S>,
    pub tolerance: S,
    /// Range of x nodes whose second differences were examined.
    pub x_window: (S, S),
    pub slices: Vec<SliceConvexity<S>>,
    pub provenance: SurfaceProvenance<S>,
}

/// `1e-6 · max |u|`, the default slack for convexity verdicts.
pub fn default_convexity_tolerance<S: Scalar>(surface: &PriceSurface<S>) -> S {
    let peak = surface.values.iter().flatten().fold(S::zero(), |m, v| m.max(v.abs()));
    S::lit(1e-6) * peak
}

/// Discrete convexity of every τ-slice over all interior nodes.
pub fn check_convexity<S: Scalar>(surface: &PriceSurface<S>, tolerance: S) -> ConvexityReport<S> {
    check_convexity_in(surface, tolerance, surface.grid.x_min(), surface.grid.x_max())
}

/// As [`check_convexity`], restricted to interior nodes in `[lo, hi]`.
pub fn check_convexity_in<S: Scalar>(surface: &PriceSurface<S>, tolerance: S, lo: S, hi: S) -> ConvexityReport<S> {
    let xs = &surface.grid.x_nodes;
    let nodes: Vec<usize> = (1..xs.len() - 1).filter(|&i| xs[i] >= lo && xs[i] <= hi).collect();
    let mut slices = Vec::with_capacity(surface.grid.n_t());
    for (j, &tau) in surface.grid.t_nodes.iter().enumerate() {
        let u = surface.slice(j);
        let (mut min, mut at) = (S::infinity(), lo);
        for &i in &nodes {
            let d2 = second_difference(xs, &u, i);
            if d2 < min {
                min = d2;
                at = xs[i];
            }
        }
        if nodes.is_empty() {
            min = S::zero();
        }
        slices.push(SliceConvexity {
            tau,
            is_convex: min >= -tolerance,
            min_second_difference: min,
            x_at_min: at,
        });
    }
    let worst = slices
        .iter()
        .min_by(|a, b| {
            a.min_second_difference
                .partial_cmp(&b.min_second_difference)
                .expect("finite values")
        })
        .expect("at least two slices");
    ConvexityReport {
        is_convex: slices.iter().all(|s| s.is_convex),
        min_second_difference: worst.min_second_difference,
        location: Location {
            x: worst.x_at_min,
            tau: worst.tau,
        },
        tolerance,
        x_window: (lo, hi),
        provenance: SurfaceProvenance::of(surface),
        slices,
    }
}

impl<S: Scalar> fmt::Display for ConvexityReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.provenance;
        writeln!(f, "convexity: {}", if self.is_convex { "convex" } else { "NOT convex" })?;
        writeln!(f, "model: {}", p.model)?;
        writeln!(f, "payoff: {}", p.payoff)?;
        writeln!(
            f,
            "grid: {} x nodes on [{}, {}], {} t nodes, T = {}",
            p.n_x, p.x_min, p.x_max, p.n_t, p.horizon
        )?;
        writeln!(
            f,
            "min second difference: {:e} at x = {}, tau = {}",
            self.min_second_difference, self.location.x, self.location.tau
        )?;
        writeln!(f, "tolerance: {:e}", self.tolerance)?;
        let bad = self.slices.iter().filter(|s| !s.is_convex).count();
        write!(f, "nonconvex slices: {bad} of {}", self.slices.len())
    }
}
