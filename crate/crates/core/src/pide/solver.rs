use super::operator::{DiscreteGenerator, SchemeConfig};
use super::{Grid, PriceSurface};
use crate::error::{Error, Result};
use crate::model::{CoefficientSpec, Model, PreparedJumps};
use crate::numerics::solve_tridiagonal;
use crate::payoff::Payoff;
use crate::scalar::Scalar;

/// Highest payoff growth degree the solver accepts.
pub const MAX_GROWTH_DEGREE: f64 = 8.0;

/// `(L u)(x_i, t)` on the grid's x nodes.
pub fn apply_generator<S: Scalar>(
    model: &Model<S>,
    u_slice: &[S],
    grid: &Grid<S>,
    t: S,
    config: &SchemeConfig,
) -> Result<Vec<S>> {
    grid.validate()?;
    check_slice(u_slice, grid)?;
    check_time(t, grid)?;
    let generator = DiscreteGenerator::new(model, &grid.x_nodes, config)?;
    generator.apply(t, u_slice)
}

/// One explicit Euler step `u + dt · L u`.
pub fn explicit_euler_step<S: Scalar>(
    model: &Model<S>,
    u_slice: &[S],
    grid: &Grid<S>,
    t: S,
    dt: S,
    config: &SchemeConfig,
) -> Result<Vec<S>> {
    let lu = apply_generator(model, u_slice, grid, t, config)?;
    Ok(u_slice.iter().zip(&lu).map(|(&u, &l)| u + dt * l).collect())
}

/// European price surface.
pub fn solve_pide<S: Scalar>(
    model: &Model<S>,
    payoff: &Payoff<S>,
    grid: &Grid<S>,
    config: &SchemeConfig,
) -> Result<PriceSurface<S>> {
    run(model, payoff, grid, config, &[])
}

/// Bermudan price surface; `exercise_times` are calendar times on the grid.
pub fn solve_bermudan<S: Scalar>(
    model: &Model<S>,
    payoff: &Payoff<S>,
    grid: &Grid<S>,
    config: &SchemeConfig,
    exercise_times: &[S],
) -> Result<PriceSurface<S>> {
    run(model, payoff, grid, config, exercise_times)
}

/// Smallest `N_t` satisfying the explicit jump bound `λ_max m(Z) Δt ≤ 1`.
pub fn min_time_nodes<S: Scalar>(model: &Model<S>, horizon: S, config: &SchemeConfig) -> Result<usize> {
    let jumps = PreparedJumps::new(model, config.z_quadrature_nodes)?;
    if !jumps.has_jumps() {
        return Ok(2);
    }
    let lambda_max = max_intensity(model, horizon);
    let steps = (lambda_max * jumps.mass() * horizon).to_f64_().ceil();
    Ok((steps as usize).max(1) + 1)
}

fn max_intensity<S: Scalar>(model: &Model<S>, horizon: S) -> S {
    let samples = 512;
    let mut times: Vec<S> = (0..=samples)
        .map(|k| horizon * S::from_usize_(k) / S::from_usize_(samples))
        .collect();
    if let CoefficientSpec::TimeModulated { factor, .. } = &model.lambda {
        times.extend(
            factor
                .iter()
                .map(|&(t, _)| t)
                .filter(|&t| t >= S::zero() && t <= horizon),
        );
    }
    times
        .into_iter()
        .map(|t| model.intensity(t))
        .fold(S::zero(), |m, v| m.max(v))
}

fn check_slice<S: Scalar>(u: &[S], grid: &Grid<S>) -> Result<()> {
    if u.len() != grid.n_x() {
        return Err(Error::Domain(format!(
            "slice has {} values, grid has {} nodes",
            u.len(),
            grid.n_x()
        )));
    }
    Ok(())
}

fn check_time<S: Scalar>(t: S, grid: &Grid<S>) -> Result<()> {
    if !(t >= S::zero() && t <= grid.horizon()) {
        return Err(Error::Domain(format!("t = {t} outside [0, {}]", grid.horizon())));
    }
    Ok(())
}

#[allow(clippy::needless_range_loop)]
fn run<S: Scalar>(
    model: &Model<S>,
    payoff: &Payoff<S>,
    grid: &Grid<S>,
    config: &SchemeConfig,
    exercise_times: &[S],
) -> Result<PriceSurface<S>> {
    model.validate()?;
    payoff.validate()?;
    grid.validate()?;
    if payoff.growth_degree().to_f64_() > MAX_GROWTH_DEGREE {
        return Err(Error::Domain(format!(
            "payoff growth degree {} exceeds the solver envelope of {MAX_GROWTH_DEGREE}",
            payoff.growth_degree()
        )));
    }
    let n_t = grid.n_t();
    let horizon = grid.horizon();
    let mut exercise_at = vec![false; n_t];
    for &t in exercise_times {
        let k = grid.t_index(t).ok_or(Error::NotOnGrid(t.to_f64_()))?;
        exercise_at[n_t - 1 - k] = true;
    }

    let generator = DiscreteGenerator::new(model, &grid.x_nodes, config)?;
    let dt = grid.dt();
    if generator.has_jumps() {
        let product = max_intensity(model, horizon) * generator.mass() * dt;
        if product > S::one() {
            return Err(Error::Stability {
                dt: dt.to_f64_(),
                product: product.to_f64_(),
                min_time_nodes: min_time_nodes(model, horizon, config)?,
            });
        }
    }

    let payoff_slice: Vec<S> = grid.x_nodes.iter().map(|&x| payoff.value(x)).collect();
    let mut slices = Vec::with_capacity(n_t);
    slices.push(payoff_slice.clone());
    let mut u = payoff_slice.clone();
    let half = S::lit(0.5);
    for j in 1..n_t {
        let tau_prev = grid.t_nodes[j - 1];
        let step = grid.t_nodes[j] - tau_prev;
        if j <= config.smoothing_startup_steps {
            u = imex_step(&generator, &u, horizon, tau_prev, step * half)?;
            u = imex_step(&generator, &u, horizon, tau_prev + step * half, step * half)?;
        } else {
            u = imex_step(&generator, &u, horizon, tau_prev, step)?;
        }
        if exercise_at[j] {
            for (v, &g) in u.iter_mut().zip(&payoff_slice) {
                *v = v.max(g);
            }
        }
        slices.push(u.clone());
    }
    Ok(PriceSurface::from_slices(
        &slices,
        grid.clone(),
        model.label.clone(),
        payoff.to_string(),
    ))
}

/// `(I - Δτ A(t_new)) u_new = u + Δτ J(t_old) u`, with `t = T - τ`.
fn imex_step<S: Scalar>(generator: &DiscreteGenerator<'_, S>, u: &[S], horizon: S, tau: S, step: S) -> Result<Vec<S>> {
    let t_old = (horizon - tau).max(S::zero());
    let t_new = (horizon - tau - step).max(S::zero());
    let mut rhs = u.to_vec();
    generator.add_jump_part(t_old, u, step, &mut rhs)?;
    let op = generator.local_operator(t_new);
    let lower: Vec<S> = op.lower.iter().map(|&l| -step * l).collect();
    let diag: Vec<S> = op.diag.iter().map(|&d| S::one() - step * d).collect();
    let upper: Vec<S> = op.upper.iter().map(|&v| -step * v).collect();
    solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or_else(|| Error::Domain("singular implicit system".into()))
}
