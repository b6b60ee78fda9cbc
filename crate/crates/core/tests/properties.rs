use jumpvex::analysis::{check_convexity, compare_models, ComparisonMethod};
use jumpvex::mc::{price_mc, MCConfig};
use jumpvex::model::{
    truncate_model, CoefficientSpec, DensitySpec, JumpSizeSpec, MeasureSpec, TruncationOptions, ZFunction,
};
use jumpvex::pide::{apply_generator, solve_pide, Grid, SchemeConfig};
use jumpvex::{Model, Payoff};
use proptest::prelude::*;

fn small_grid() -> Grid<f64> {
    Grid::geometric_through(1.0, 0.1, 6.0, 121, 1.0, 161).unwrap()
}

fn jump_model(sigma: f64, c: f64, lambda: f64) -> Model {
    Model::relative_jump("m", sigma, c, lambda)
}

fn density_model(c: f64, rate: f64, alpha: f64) -> Model {
    Model::new(
        "density",
        CoefficientSpec::Proportional { c: 0.2 },
        JumpSizeSpec::RelativeOfZ {
            zeta: ZFunction::Saturating { c, rate },
        },
        CoefficientSpec::Constant { value: 1.0 },
        MeasureSpec::Density {
            density: DensitySpec::PowerLaw { scale: 0.2, alpha },
            window: None,
        },
        -0.5,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn surface_starts_at_payoff(sigma in 0.05f64..0.5, c in -0.4f64..0.6, strike in 0.5f64..2.0) {
        let grid = small_grid();
        let payoff = Payoff::Put { strike };
        let surface = solve_pide(&jump_model(sigma, c, 1.0), &payoff, &grid, &SchemeConfig::default()).unwrap();
        for (i, &x) in grid.x_nodes.iter().enumerate() {
            prop_assert_eq!(surface.value(i, 0), payoff.value(x));
        }
    }

    #[test]
    fn linear_payoffs_are_preserved(sigma in 0.0f64..0.5, c in -0.4f64..0.6, slope in -2.0f64..2.0, intercept in -1.0f64..1.0) {
        let grid = small_grid();
        let payoff = Payoff::Linear { slope, intercept };
        let surface = solve_pide(&jump_model(sigma, c, 1.5), &payoff, &grid, &SchemeConfig::default()).unwrap();
        for (i, &x) in grid.x_nodes.iter().enumerate() {
            let exact = slope * x + intercept;
            prop_assert!((surface.value(i, grid.n_t() - 1) - exact).abs() < 1e-6 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn monotone_in_payoff(sigma in 0.05f64..0.4, c in -0.3f64..0.5, k1 in 0.6f64..1.6, dk in 0.0f64..0.5) {
        let grid = small_grid();
        let config = SchemeConfig::default();
        let model = jump_model(sigma, c, 1.0);
        // (x - k1)^+ >= (x - k1 - dk)^+ pointwise
        let lo = solve_pide(&model, &Payoff::Call { strike: k1 + dk }, &grid, &config).unwrap();
        let hi = solve_pide(&model, &Payoff::Call { strike: k1 }, &grid, &config).unwrap();
        for i in 0..grid.n_x() {
            prop_assert!(hi.value(i, grid.n_t() - 1) >= lo.value(i, grid.n_t() - 1) - 1e-12);
        }
    }

    #[test]
    fn scaling_is_coherent(sigma in 0.05f64..0.4, c in -0.3f64..0.5, strike in 0.6f64..1.6) {
        let grid = small_grid();
        let config = SchemeConfig::default();
        let model = jump_model(sigma, c, 1.0);
        let one = solve_pide(&model, &Payoff::Put { strike }, &grid, &config).unwrap();
        let two = solve_pide(&model, &Payoff::PiecewiseLinear {
            knots: vec![(strike, 0.0)],
            left_slope: -2.0,
            right_slope: 0.0,
        }, &grid, &config).unwrap();
        for i in 0..grid.n_x() {
            let (a, b) = (one.value(i, grid.n_t() - 1), two.value(i, grid.n_t() - 1));
            prop_assert!((b - 2.0 * a).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn convex_payoff_values_dominate_payoff(sigma in 0.05f64..0.4, c in -0.3f64..0.5, strike in 0.6f64..1.6) {
        let grid = small_grid();
        let payoff = Payoff::Put { strike };
        let surface = solve_pide(&jump_model(sigma, c, 1.0), &payoff, &grid, &SchemeConfig::default()).unwrap();
        let report = check_convexity(&surface, 1e-6 * strike);
        prop_assert!(report.is_convex, "{}", report);
        for (i, &x) in grid.x_nodes.iter().enumerate() {
            prop_assert!(surface.value(i, grid.n_t() - 1) >= payoff.value(x) - 1e-6);
        }
    }

    #[test]
    fn generator_is_consistent_with_euler_step(sigma in 0.0f64..0.5, c in -0.4f64..0.6, t in 0.0f64..1.0) {
        let grid = small_grid();
        let config = SchemeConfig::default();
        let model = jump_model(sigma, c, 1.0);
        let u: Vec<f64> = grid.x_nodes.iter().map(|&x| (x - 1.0).max(0.0).powi(2)).collect();
        let lu = apply_generator(&model, &u, &grid, t, &config).unwrap();
        let dt = 1e-3;
        let stepped = jumpvex::pide::explicit_euler_step(&model, &u, &grid, t, dt, &config).unwrap();
        for i in 0..u.len() {
            prop_assert!((stepped[i] - u[i] - dt * lu[i]).abs() <= 1e-12 * (1.0 + u[i].abs()));
        }
    }

    #[test]
    fn comparison_is_antisymmetric(c1 in 0.0f64..0.4, c2 in 0.0f64..0.4, strike in 0.7f64..1.4) {
        let grid = Grid::geometric_through(1.0, 0.1, 6.0, 81, 1.0, 101).unwrap();
        let config = SchemeConfig::default();
        let payoff = Payoff::Call { strike };
        let (a, b) = (jump_model(0.2, c1, 1.0), jump_model(0.2, c2, 1.0));
        let ab = compare_models(&a, &b, &payoff, &grid, &config, &ComparisonMethod::Fd).unwrap();
        let ba = compare_models(&b, &a, &payoff, &grid, &config, &ComparisonMethod::Fd).unwrap();
        // max(u_b - u_a) >= min(u_b - u_a) = -max(u_a - u_b)
        prop_assert!(ab.max_violation >= -ba.max_violation - 1e-14);
        prop_assert!(ab.max_violation.max(ba.max_violation) >= -1e-14);
    }

    #[test]
    fn truncation_shrinks_and_stays_convex(c in 0.1f64..0.8, rate in 0.3f64..3.0, alpha in 0.2f64..1.8, n in 2u32..12) {
        let model = density_model(c, rate, alpha);
        let xs: Vec<f64> = (0..=60).map(|k| 0.05 * 1.08f64.powi(k)).collect();
        let truncated = truncate_model(&model, n, &xs, &TruncationOptions::default()).unwrap();
        prop_assert!(truncated.is_finite_activity());
        let nf = n as f64;
        for k in 0..=16 {
            let z = (1.0 / nf) * (nf * nf).powf(k as f64 / 16.0);
            let phis: Vec<f64> = xs.iter().map(|&x| truncated.phi.eval(x, 0.0, z)).collect();
            for (&x, &pn) in xs.iter().zip(&phis) {
                let phi = model.phi.eval(x, 0.0, z);
                prop_assert!(pn >= -1e-12 && pn <= phi * (1.0 + 1e-9) + 1e-12, "x={x} z={z}: {pn} vs {phi}");
                if pn > 1e-12 {
                    prop_assert!(phi / pn >= 1.0 - 1e-9);
                }
            }
            for w in 1..xs.len() - 1 {
                let left = (phis[w] - phis[w - 1]) / (xs[w] - xs[w - 1]);
                let right = (phis[w + 1] - phis[w]) / (xs[w + 1] - xs[w]);
                prop_assert!(right >= left - 1e-9 * (1.0 + left.abs()), "not convex at x={}", xs[w]);
            }
        }
    }
}

#[test]
fn mc_is_a_martingale() {
    let config = MCConfig {
        n_paths: 20_000,
        n_steps: 64,
        ..MCConfig::default()
    };
    let payoff = Payoff::Linear {
        slope: 1.0,
        intercept: 0.0,
    };
    for model in [
        Model::diffusion("bs", 0.3),
        jump_model(0.2, -0.3, 2.0),
        jumpvex::model::counterexample_model(),
    ] {
        let est = price_mc(&model, &payoff, 0.7, 0.0, 1.0, &config).unwrap();
        assert!(
            (est.mean - 0.7).abs() < 3.0 * est.stderr.max(1e-12),
            "{}: {} ± {}",
            model.label,
            est.mean,
            est.stderr
        );
    }
}

#[test]
fn mc_stderr_halves_with_four_times_the_paths() {
    let model = jump_model(0.2, 0.1, 1.0);
    let payoff = Payoff::Call { strike: 1.0 };
    let run = |n_paths| {
        let config = MCConfig {
            n_paths,
            n_steps: 32,
            ..MCConfig::default()
        };
        price_mc(&model, &payoff, 1.0, 0.0, 1.0, &config).unwrap().stderr
    };
    let ratio = run(10_000) / run(40_000);
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn refinement_converges() {
    let model = jump_model(0.2, 0.1, 1.0);
    let payoff = Payoff::Call { strike: 1.0 };
    let config = SchemeConfig::default();
    let g0 = Grid::geometric_through(1.0, 0.1, 8.0, 81, 1.0, 41).unwrap();
    let g1 = g0.refined();
    let g2 = g1.refined();
    let v: Vec<f64> = [&g0, &g1, &g2]
        .iter()
        .map(|g| solve_pide(&model, &payoff, g, &config).unwrap().price_at(1.0))
        .collect();
    let (d1, d2) = ((v[1] - v[0]).abs(), (v[2] - v[1]).abs());
    assert!(d2 < d1, "{v:?}");
}
