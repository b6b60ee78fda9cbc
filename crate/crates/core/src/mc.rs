//! Euler–Maruyama simulation with per-step Poisson jumps and Monte Carlo
//! pricing.
//!
//! Each path draws its Gaussians and its jumps from two ChaCha streams keyed
//! by `(seed, path_index)`, so estimates do not depend on thread scheduling.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, PreparedJumps};
use crate::numerics::pairwise_sum;
use crate::payoff::Payoff;
use crate::scalar::Scalar;

/// Value assigned when an Euler step would leave `(0, ∞)`.
pub const X_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCConfig {
    /// Number of path indices; with antithetics each index is a mirrored pair.
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub z_quadrature_nodes: usize,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 256,
            seed: 42,
            antithetic: false,
            z_quadrature_nodes: 64,
        }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::InvalidSpec("n_paths and n_steps must be positive".into()));
        }
        if self.z_quadrature_nodes < 2 {
            return Err(Error::InvalidSpec("z_quadrature_nodes must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Path<S> {
    pub times: Vec<S>,
    pub values: Vec<S>,
    pub jump_times: Vec<S>,
    /// Steps that hit the positivity floor.
    pub floor_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct MCEstimate<S> {
    pub mean: S,
    /// Sample standard deviation over path indices divided by `sqrt(n_paths)`.
    pub stderr: S,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub model_label: String,
    pub payoff: String,
    pub floor_events: usize,
}

struct Simulator<'a, S> {
    model: &'a Model<S>,
    jumps: PreparedJumps<'a, S>,
    x0: S,
    t0: S,
    dt: S,
    n_steps: usize,
    seed: u64,
}

struct Outcome<S> {
    terminal: S,
    floors: usize,
}

impl<'a, S: Scalar> Simulator<'a, S> {
    fn new(model: &'a Model<S>, x0: S, t0: S, horizon: S, config: &MCConfig) -> Result<Self> {
        config.validate()?;
        model.validate()?;
        if !(x0 > S::zero()) || !x0.is_finite() {
            return Err(Error::Domain(format!("x0 must be positive, got {x0}")));
        }
        if !(t0 >= S::zero() && t0 < horizon) {
            return Err(Error::Domain(format!("need 0 <= t0 < T, got t0 = {t0}, T = {horizon}")));
        }
        let jumps = PreparedJumps::new(model, config.z_quadrature_nodes)?;
        Ok(Self {
            model,
            jumps,
            x0,
            t0,
            dt: (horizon - t0) / S::from_usize_(config.n_steps),
            n_steps: config.n_steps,
            seed: config.seed,
        })
    }

    fn streams(&self, path_index: u64) -> (ChaCha8Rng, ChaCha8Rng) {
        let mut normals = ChaCha8Rng::seed_from_u64(self.seed);
        normals.set_stream(2 * path_index);
        let mut jumps = ChaCha8Rng::seed_from_u64(self.seed);
        jumps.set_stream(2 * path_index + 1);
        (normals, jumps)
    }

    /// Runs one path; `sign` mirrors the Gaussian increments.
    fn run(&self, path_index: u64, sign: S, mut record: Option<&mut Path<S>>) -> Outcome<S> {
        let (mut normals, mut jump_rng) = self.streams(path_index);
        let sqrt_dt = self.dt.sqrt();
        let floor = S::lit(X_FLOOR);
        let mut x = self.x0;
        let mut floors = 0;
        if let Some(p) = record.as_deref_mut() {
            p.times.push(self.t0);
            p.values.push(x);
        }
        for k in 0..self.n_steps {
            let t = self.t0 + self.dt * S::from_usize_(k);
            let t_next = self.t0 + self.dt * S::from_usize_(k + 1);
            let z: f64 = StandardNormal.sample(&mut normals);
            let mut next = x + self.model.beta.eval(x, t) * sqrt_dt * sign * S::lit(z);
            let mut jumped = false;
            if self.jumps.has_jumps() {
                let lambda = self.model.intensity(t);
                let rate = (lambda * self.jumps.mass() * self.dt).to_f64_();
                let count = if rate > 0.0 {
                    Poisson::new(rate).map(|p| p.sample(&mut jump_rng) as u64).unwrap_or(0)
                } else {
                    0
                };
                for _ in 0..count {
                    let label = self.jumps.sample_label(jump_rng.random::<f64>());
                    next = next + self.model.phi.eval(x, t, label);
                }
                jumped = count > 0;
                next = next - lambda * self.jumps.compensator(x, t) * self.dt;
            }
            if !(next > S::zero()) {
                next = floor;
                floors += 1;
            }
            x = next;
            if let Some(p) = record.as_deref_mut() {
                p.times.push(t_next);
                p.values.push(x);
                if jumped {
                    p.jump_times.push(t_next);
                }
            }
        }
        Outcome { terminal: x, floors }
    }
}

/// One Euler path on `n_steps` uniform steps of `[t0, T]`.
pub fn simulate_path<S: Scalar>(
    model: &Model<S>,
    x0: S,
    t0: S,
    horizon: S,
    config: &MCConfig,
    path_index: u64,
) -> Result<Path<S>> {
    let sim = Simulator::new(model, x0, t0, horizon, config)?;
    let mut path = Path {
        times: Vec::with_capacity(config.n_steps + 1),
        values: Vec::with_capacity(config.n_steps + 1),
        jump_times: Vec::new(),
        floor_events: 0,
    };
    let out = sim.run(path_index, S::one(), Some(&mut path));
    path.floor_events = out.floors;
    Ok(path)
}

/// Monte Carlo estimate of `E g(X(T))` started from `X(t0) = x0`.
pub fn price_mc<S: Scalar>(
    model: &Model<S>,
    payoff: &Payoff<S>,
    x0: S,
    t0: S,
    horizon: S,
    config: &MCConfig,
) -> Result<MCEstimate<S>> {
    payoff.validate()?;
    let sim = Simulator::new(model, x0, t0, horizon, config)?;
    let half = S::lit(0.5);
    let samples: Vec<(S, usize)> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let a = sim.run(i, S::one(), None);
            if config.antithetic {
                let b = sim.run(i, -S::one(), None);
                (
                    half * (payoff.value(a.terminal) + payoff.value(b.terminal)),
                    a.floors + b.floors,
                )
            } else {
                (payoff.value(a.terminal), a.floors)
            }
        })
        .collect();
    let values: Vec<S> = samples.iter().map(|s| s.0).collect();
    let n = S::from_usize_(values.len());
    let mean = pairwise_sum(&values) / n;
    let stderr = if values.len() > 1 {
        let sq: Vec<S> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
        (pairwise_sum(&sq) / (n - S::one())).sqrt() / n.sqrt()
    } else {
        S::zero()
    };
    Ok(MCEstimate {
        mean,
        stderr,
        n_paths: config.n_paths,
        n_steps: config.n_steps,
        seed: config.seed,
        antithetic: config.antithetic,
        model_label: model.label.clone(),
        payoff: payoff.to_string(),
        floor_events: samples.iter().map(|s| s.1).sum(),
    })
}

/// CSV with columns `path_index,time,value`, 17 significant digits.
pub fn paths_to_csv<S: Scalar>(paths: &[(u64, Path<S>)]) -> String {
    let mut out = String::from("path_index,time,value\n");
    for (index, path) in paths {
        for (t, v) in path.times.iter().zip(&path.values) {
            let _ = writeln!(out, "{index},{:.16e},{:.16e}", t.to_f64_(), v.to_f64_());
        }
    }
    out
}
