//! Command execution. Every command maps a resolved configuration to a set
//! of output files and a stdout summary; nothing here touches the disk.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use jumpvex::analysis::{
    check_convexity, check_convexity_in, compare_models, default_convexity_tolerance, lcp_scan_with, ComparisonMethod,
    Location,
};
use jumpvex::mc::{paths_to_csv, price_mc, simulate_path, MCConfig};
use jumpvex::model::{check_conditions, counterexample_model, truncate_model, TruncationOptions};
use jumpvex::pide::{solve_bermudan, solve_pide, step_doubling, GridSpec, SchemeConfig, StepDoubling};
use jumpvex::{ConvexityReport, MCEstimate, Model, Payoff, PriceSurface};
use serde::Serialize;

use crate::config::{parse_payoff, Method, RunConfig};

/// Exit status for a comparison whose hypotheses were not all met.
pub const EXIT_HYPOTHESES_UNMET: u8 = 2;

pub struct Outcome {
    /// `(file name, contents)` in a fixed order.
    pub files: Vec<(String, String)>,
    pub stdout: String,
    pub exit_code: u8,
}

impl Outcome {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            stdout: String::new(),
            exit_code: 0,
        }
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.files.push((name.to_string(), text));
        Ok(())
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }
}

pub fn execute(config: &RunConfig) -> Result<Outcome> {
    match config {
        RunConfig::Price {
            model,
            payoff,
            x0,
            horizon,
            method,
            grid,
            scheme,
            mc,
            error_estimate,
            dump_paths,
        } => {
            let payoff = parse_payoff(payoff)?;
            match method {
                Method::Fd => {
                    let grid = grid.as_ref().context("fd pricing needs a grid")?;
                    price_fd(model, &payoff, *x0, *horizon, grid, scheme, *error_estimate)
                }
                Method::Mc => {
                    let mc = mc.as_ref().context("mc pricing needs a Monte Carlo configuration")?;
                    price_paths(model, &payoff, *x0, *horizon, mc, *dump_paths)
                }
            }
        }
        RunConfig::Check {
            model,
            x_samples,
            t_samples,
            z_samples,
        } => {
            let report = check_conditions(model, x_samples, t_samples, z_samples)?;
            let mut out = Outcome::new();
            let _ = writeln!(out.stdout, "conditions for {}", report.model);
            for (name, entry) in report.entries() {
                let _ = write!(out.stdout, "{name:>9}: {:?}", entry.status);
                if let Some(c) = entry.constant {
                    let _ = write!(out.stdout, " (constant {c})");
                }
                if let Some(w) = entry.witness {
                    let _ = write!(out.stdout, " witness x = {}, t = {}", w.x, w.t);
                    if let Some(z) = w.z {
                        let _ = write!(out.stdout, ", z = {z}");
                    }
                }
                out.stdout.push('\n');
            }
            out.json("conditions.json", &report)?;
            Ok(out)
        }
        RunConfig::Convexity {
            model,
            payoff,
            horizon,
            grid,
            scheme,
            tolerance,
        } => {
            let payoff = parse_payoff(payoff)?;
            let surface = solve_pide(model, &payoff, &grid.build(*horizon)?, scheme)?;
            let tol = tolerance.unwrap_or_else(|| default_convexity_tolerance(&surface));
            let report = check_convexity(&surface, tol);
            let mut out = Outcome::new();
            let _ = writeln!(out.stdout, "{report}");
            out.file("surface.csv", surface.to_csv());
            out.json("convexity.json", &report)?;
            Ok(out)
        }
        RunConfig::Compare {
            model_hi,
            model_lo,
            payoff,
            horizon,
            method,
            grid,
            scheme,
            mc,
            x_points,
        } => {
            let payoff = parse_payoff(payoff)?;
            let grid = grid.build(*horizon)?;
            let method = match method {
                Method::Fd => ComparisonMethod::Fd,
                Method::Mc => ComparisonMethod::Mc {
                    config: mc.clone().context("mc comparison needs a Monte Carlo configuration")?,
                    x_points: x_points.clone(),
                },
            };
            let report = compare_models(model_hi, model_lo, &payoff, &grid, scheme, &method)?;
            let mut out = Outcome::new();
            let _ = writeln!(out.stdout, "{report}");
            out.json("comparison.json", &report)?;
            if !report.hypotheses_met {
                out.exit_code = EXIT_HYPOTHESES_UNMET;
            }
            Ok(out)
        }
        RunConfig::Lcp {
            model,
            x_points,
            t_points,
            widths,
            options,
        } => {
            let report = lcp_scan_with(model, x_points, t_points, widths, options)?;
            let mut out = Outcome::new();
            let _ = writeln!(out.stdout, "{report}");
            out.json("lcp.json", &report)?;
            Ok(out)
        }
        RunConfig::Counterexample {
            horizon,
            grid,
            scheme,
            mc,
            left,
            probe,
            right,
        } => counterexample(*horizon, grid, scheme, mc, [*left, *probe, *right]),
        RunConfig::Truncate {
            model,
            n,
            x_grid,
            z_intervals,
            t_grid,
            out_file,
        } => {
            let options = TruncationOptions {
                z_intervals: *z_intervals,
                t_grid: t_grid.clone(),
            };
            let truncated = truncate_model(model, *n, x_grid, &options)?;
            let mut out = Outcome::new();
            let _ = writeln!(out.stdout, "wrote {} ({})", out_file, truncated.label);
            let mut text = truncated.to_json();
            text.push('\n');
            out.file(out_file, text);
            Ok(out)
        }
        RunConfig::Bermudan {
            model,
            payoff,
            x0,
            horizon,
            dates,
            grid,
            scheme,
        } => {
            let payoff = parse_payoff(payoff)?;
            let grid = grid.build(*horizon)?;
            let bermudan = solve_bermudan(model, &payoff, &grid, scheme, dates)?;
            let european = solve_pide(model, &payoff, &grid, scheme)?;
            let summary = BermudanSummary {
                model: model.label.clone(),
                payoff: payoff.to_string(),
                x0: *x0,
                horizon: *horizon,
                dates: dates.clone(),
                bermudan: bermudan.price_at(*x0),
                european: european.price_at(*x0),
                intrinsic: payoff.value(*x0),
            };
            let mut out = Outcome::new();
            let _ = writeln!(
                out.stdout,
                "bermudan {} with {} dates at x0 = {}: {} (european {}, intrinsic {})",
                summary.payoff,
                dates.len(),
                x0,
                summary.bermudan,
                summary.european,
                summary.intrinsic
            );
            out.file("surface.csv", bermudan.to_csv());
            out.json("bermudan.json", &summary)?;
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct FdPrice<'a> {
    method: &'static str,
    model: &'a str,
    payoff: String,
    x0: f64,
    horizon: f64,
    price: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_doubling: Option<StepDoubling>,
    grid: &'a GridSpec<f64>,
}

#[derive(Serialize)]
struct BermudanSummary {
    model: String,
    payoff: String,
    x0: f64,
    horizon: f64,
    dates: Vec<f64>,
    bermudan: f64,
    european: f64,
    intrinsic: f64,
}

fn price_fd(
    model: &Model,
    payoff: &Payoff,
    x0: f64,
    horizon: f64,
    spec: &GridSpec<f64>,
    scheme: &SchemeConfig,
    error_estimate: bool,
) -> Result<Outcome> {
    let grid = spec.build(horizon)?;
    let (surface, sd) = if error_estimate {
        let (s, sd) = step_doubling(model, payoff, &grid, scheme, x0)?;
        (s, Some(sd))
    } else {
        (solve_pide(model, payoff, &grid, scheme)?, None)
    };
    let price = surface.price_at(x0);
    let mut out = Outcome::new();
    let _ = write!(out.stdout, "price {price}");
    if let Some(sd) = &sd {
        let _ = write!(out.stdout, " (step-doubling error {:e})", sd.error);
    }
    out.stdout.push('\n');
    out.file("surface.csv", surface.to_csv());
    out.json(
        "price.json",
        &FdPrice {
            method: "fd",
            model: &model.label,
            payoff: payoff.to_string(),
            x0,
            horizon,
            price,
            step_doubling: sd,
            grid: spec,
        },
    )?;
    Ok(out)
}

fn price_paths(model: &Model, payoff: &Payoff, x0: f64, horizon: f64, mc: &MCConfig, dump: usize) -> Result<Outcome> {
    let estimate = price_mc(model, payoff, x0, 0.0, horizon, mc)?;
    let mut out = Outcome::new();
    let _ = writeln!(
        out.stdout,
        "price {} ± {} ({} paths, {} steps, seed {}, floor events {})",
        estimate.mean, estimate.stderr, estimate.n_paths, estimate.n_steps, estimate.seed, estimate.floor_events
    );
    out.json("price.json", &estimate)?;
    if dump > 0 {
        let paths = (0..dump.min(mc.n_paths) as u64)
            .map(|i| simulate_path(model, x0, 0.0, horizon, mc, i).map(|p| (i, p)))
            .collect::<jumpvex::Result<Vec<_>>>()?;
        out.file("paths.csv", paths_to_csv(&paths));
    }
    Ok(out)
}

#[derive(Serialize)]
struct ChordCheck {
    u_left: f64,
    u_probe: f64,
    u_right: f64,
    chord: f64,
    /// `u_probe - chord`; positive means the surface lies above its chord.
    gap: f64,
    /// Noise level the gap is compared against.
    tolerance: f64,
    above_chord: bool,
}

#[derive(Serialize)]
struct McChord {
    estimates: [MCEstimate; 3],
    check: ChordCheck,
}

#[derive(Serialize)]
struct CounterexampleReport {
    model: String,
    payoff: String,
    horizon: f64,
    points: [f64; 3],
    is_convex: bool,
    witness: Location<f64>,
    fd: ChordCheck,
    mc: McChord,
    convexity: ConvexityReport,
}

fn node_value(surface: &PriceSurface, x: f64) -> f64 {
    let last = surface.grid.n_t() - 1;
    match surface.grid.x_index(x) {
        Some(i) => surface.value(i, last),
        None => surface.price_at(x),
    }
}

fn counterexample(
    horizon: f64,
    spec: &GridSpec<f64>,
    scheme: &SchemeConfig,
    mc: &MCConfig,
    pts: [f64; 3],
) -> Result<Outcome> {
    let [left, probe, right] = pts;
    if !(left < probe && probe < right) {
        bail!("chord points must be increasing");
    }
    let model = counterexample_model::<f64>();
    let payoff = Payoff::Put { strike: 1.0 };
    let surface = solve_pide(&model, &payoff, &spec.build(horizon)?, scheme)?;
    let tol = default_convexity_tolerance(&surface);
    let convexity = check_convexity_in(&surface, tol, left, right);
    let w = (probe - left) / (right - left);
    let chord = |l: f64, r: f64| (1.0 - w) * l + w * r;

    let u = [
        node_value(&surface, left),
        node_value(&surface, probe),
        node_value(&surface, right),
    ];
    let fd_chord = chord(u[0], u[2]);
    let fd = ChordCheck {
        u_left: u[0],
        u_probe: u[1],
        u_right: u[2],
        chord: fd_chord,
        gap: u[1] - fd_chord,
        tolerance: tol,
        above_chord: u[1] - fd_chord > tol,
    };

    let est = [
        price_mc(&model, &payoff, left, 0.0, horizon, mc)?,
        price_mc(&model, &payoff, probe, 0.0, horizon, mc)?,
        price_mc(&model, &payoff, right, 0.0, horizon, mc)?,
    ];
    let mc_chord = chord(est[0].mean, est[2].mean);
    let se = (est[1].stderr.powi(2) + ((1.0 - w) * est[0].stderr).powi(2) + (w * est[2].stderr).powi(2)).sqrt();
    let mc_check = ChordCheck {
        u_left: est[0].mean,
        u_probe: est[1].mean,
        u_right: est[2].mean,
        chord: mc_chord,
        gap: est[1].mean - mc_chord,
        tolerance: 3.0 * se,
        above_chord: est[1].mean - mc_chord > 3.0 * se,
    };

    let report = CounterexampleReport {
        model: model.label.clone(),
        payoff: payoff.to_string(),
        horizon,
        points: pts,
        is_convex: convexity.is_convex && !fd.above_chord,
        witness: Location { x: probe, tau: horizon },
        fd,
        mc: McChord {
            estimates: est,
            check: mc_check,
        },
        convexity,
    };
    let mut out = Outcome::new();
    let _ = writeln!(out.stdout, "model: {}", report.model);
    let _ = writeln!(out.stdout, "payoff: {}, T = {horizon}", report.payoff);
    let _ = writeln!(
        out.stdout,
        "fd: u({left}) = {}, u({probe}) = {}, u({right}) = {}, chord {}, gap {:e}",
        report.fd.u_left, report.fd.u_probe, report.fd.u_right, report.fd.chord, report.fd.gap
    );
    let _ = writeln!(
        out.stdout,
        "mc: u({left}) = {}, u({probe}) = {}, u({right}) = {}, gap {:e} (3 stderr {:e})",
        report.mc.check.u_left,
        report.mc.check.u_probe,
        report.mc.check.u_right,
        report.mc.check.gap,
        report.mc.check.tolerance
    );
    let _ = writeln!(
        out.stdout,
        "convex on [{left}, {right}]: {} (witness x = {probe}, min second difference {:e} at x = {})",
        report.is_convex, report.convexity.min_second_difference, report.convexity.location.x
    );
    out.file("surface.csv", surface.to_csv());
    out.json("counterexample.json", &report)?;
    Ok(out)
}
