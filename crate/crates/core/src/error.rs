use thiserror::Error;

/// Errors raised by model construction, pricing and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("model has infinite jump activity; truncate it before {0}")]
    InfiniteActivity(&'static str),

    #[error("model already has a finite-intensity parameter space (Lebesgue on [0,1]); truncation does not apply")]
    AlreadyFinite,

    #[error("jump size changes sign in x at t={t}, z={z} (x={x_neg} gives {phi_neg}, x={x_pos} gives {phi_pos})")]
    MixedSign {
        t: f64,
        z: f64,
        x_neg: f64,
        phi_neg: f64,
        x_pos: f64,
        phi_pos: f64,
    },

    #[error("jump destination x+phi={dest} is not positive at x={x}, t={t}, z={z}")]
    Positivity { x: f64, t: f64, z: f64, dest: f64 },

    #[error("explicit jump step unstable: lambda*m(Z)*dt = {product} > 1 with dt={dt}; need at least {min_time_nodes} time nodes")]
    Stability {
        dt: f64,
        product: f64,
        min_time_nodes: usize,
    },

    #[error("exercise time {0} is not a grid time")]
    NotOnGrid(f64),

    #[error("payoff is not convex (slope decreases at x={0})")]
    NonConvexPayoff(f64),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
