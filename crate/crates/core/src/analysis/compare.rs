use std::fmt;

use rayon::join;
use serde::{Deserialize, Serialize};

use super::convexity::Location;
use crate::error::{Error, Result};
use crate::mc::{price_mc, MCConfig};
use crate::model::{check_conditions, Model, Witness};
use crate::payoff::Payoff;
use crate::pide::{solve_pide, Grid, PriceSurface, SchemeConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", bound = "S: Scalar")]
pub enum ComparisonMethod<S> {
    /// Both models on the same grid; tolerance from step doubling.
    Fd,
    /// Common random numbers at `x_points`, started at time 0.
    Mc { config: MCConfig, x_points: Vec<S> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ScreenItem<S> {
    pub hypothesis: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<S>>,
    pub note: String,
}

/// Pointwise prices entering a Monte Carlo comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PointComparison<S> {
    pub x: S,
    pub hi: S,
    pub hi_stderr: S,
    pub lo: S,
    pub lo_stderr: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ComparisonReport<S> {
    pub dominated: bool,
    /// Largest `u_lo - u_hi`; for Monte Carlo, taken at the point of largest excess over its tolerance.
    pub max_violation: S,
    pub location: Location<S>,
    pub tolerance: S,
    pub method: String,
    pub hypotheses_met: bool,
    pub screen: Vec<ScreenItem<S>>,
    /// Coefficients that differ between the two models.
    pub differs: Vec<String>,
    pub model_hi: String,
    pub model_lo: String,
    pub payoff: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_error_estimate: Option<S>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub points: Vec<PointComparison<S>>,
}

/// Checks whether `model_lo` prices below `model_hi` for a convex payoff.
pub fn compare_models<S: Scalar>(
    model_hi: &Model<S>,
    model_lo: &Model<S>,
    payoff: &Payoff<S>,
    grid: &Grid<S>,
    config: &SchemeConfig,
    method: &ComparisonMethod<S>,
) -> Result<ComparisonReport<S>> {
    if let (false, witness) = payoff.is_convex() {
        return Err(Error::NonConvexPayoff(witness.map_or(f64::NAN, |w| w.to_f64_())));
    }
    grid.validate()?;
    let screen = hypothesis_screen(model_hi, model_lo, grid, config)?;
    let mut report = match method {
        ComparisonMethod::Fd => compare_fd(model_hi, model_lo, payoff, grid, config)?,
        ComparisonMethod::Mc { config: mc, x_points } => compare_mc(model_hi, model_lo, payoff, grid, mc, x_points)?,
    };
    report.hypotheses_met = screen.iter().all(|s| s.passed);
    report.screen = screen;
    report.differs = differing_coefficients(model_hi, model_lo);
    Ok(report)
}

fn blank_report<S: Scalar>(hi: &Model<S>, lo: &Model<S>, payoff: &Payoff<S>, method: &str) -> ComparisonReport<S> {
    ComparisonReport {
        dominated: false,
        max_violation: S::zero(),
        location: Location {
            x: S::zero(),
            tau: S::zero(),
        },
        tolerance: S::zero(),
        method: method.into(),
        hypotheses_met: false,
        screen: Vec::new(),
        differs: Vec::new(),
        model_hi: hi.label.clone(),
        model_lo: lo.label.clone(),
        payoff: payoff.to_string(),
        fd_error_estimate: None,
        points: Vec::new(),
    }
}

fn compare_fd<S: Scalar>(
    hi: &Model<S>,
    lo: &Model<S>,
    payoff: &Payoff<S>,
    grid: &Grid<S>,
    config: &SchemeConfig,
) -> Result<ComparisonReport<S>> {
    let fine = grid.refined();
    let solve = |m: &Model<S>| -> Result<(PriceSurface<S>, S)> {
        let (coarse, refined) = join(
            || solve_pide(m, payoff, grid, config),
            || solve_pide(m, payoff, &fine, config),
        );
        let (coarse, refined) = (coarse?, refined?);
        Ok((coarse.clone(), surface_gap(&coarse, &refined)))
    };
    let (a, b) = join(|| solve(hi), || solve(lo));
    let ((u_hi, err_hi), (u_lo, err_lo)) = (a?, b?);
    let mut report = blank_report(hi, lo, payoff, "fd");
    let mut worst = S::neg_infinity();
    for (i, &x) in grid.x_nodes.iter().enumerate() {
        for (j, &tau) in grid.t_nodes.iter().enumerate() {
            let v = u_lo.value(i, j) - u_hi.value(i, j);
            if v > worst {
                worst = v;
                report.location = Location { x, tau };
            }
        }
    }
    let estimate = err_hi.max(err_lo);
    report.max_violation = worst;
    report.tolerance = S::lit(2.0) * estimate;
    report.fd_error_estimate = Some(estimate);
    report.dominated = worst <= report.tolerance;
    Ok(report)
}

/// Largest change at coarse nodes when the grid is refined.
fn surface_gap<S: Scalar>(coarse: &PriceSurface<S>, fine: &PriceSurface<S>) -> S {
    let mut gap = S::zero();
    for i in 0..coarse.grid.n_x() {
        for j in 0..coarse.grid.n_t() {
            gap = gap.max((coarse.value(i, j) - fine.value(2 * i, 2 * j)).abs());
        }
    }
    gap
}

fn compare_mc<S: Scalar>(
    hi: &Model<S>,
    lo: &Model<S>,
    payoff: &Payoff<S>,
    grid: &Grid<S>,
    mc: &MCConfig,
    x_points: &[S],
) -> Result<ComparisonReport<S>> {
    if x_points.is_empty() {
        return Err(Error::Incompatible(
            "Monte Carlo comparison needs at least one x point".into(),
        ));
    }
    let horizon = grid.horizon();
    let mut report = blank_report(hi, lo, payoff, "mc");
    let mut best_excess = S::neg_infinity();
    for &x in x_points {
        let (a, b) = join(
            || price_mc(hi, payoff, x, S::zero(), horizon, mc),
            || price_mc(lo, payoff, x, S::zero(), horizon, mc),
        );
        let (a, b) = (a?, b?);
        let violation = b.mean - a.mean;
        let tol = S::lit(3.0) * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        if violation - tol > best_excess {
            best_excess = violation - tol;
            report.max_violation = violation;
            report.tolerance = tol;
            report.location = Location { x, tau: horizon };
        }
        report.points.push(PointComparison {
            x,
            hi: a.mean,
            hi_stderr: a.stderr,
            lo: b.mean,
            lo_stderr: b.stderr,
        });
    }
    report.dominated = report.max_violation <= report.tolerance;
    Ok(report)
}

fn differing_coefficients<S: Scalar>(a: &Model<S>, b: &Model<S>) -> Vec<String> {
    let mut out = Vec::new();
    if a.beta != b.beta {
        out.push("beta".to_string());
    }
    if a.lambda != b.lambda {
        out.push("lambda".to_string());
    }
    if a.phi != b.phi {
        out.push("phi".to_string());
    }
    if a.measure != b.measure {
        out.push("measure".to_string());
    }
    out
}

/// Samples the ordering hypotheses: `|β_lo| ≤ |β_hi|`, `λ_lo ≤ λ_hi`,
/// `φ_hi / φ_lo ≥ 1` where `φ_lo ≠ 0`, and the convexity condition on at
/// least one jump size.
pub fn hypothesis_screen<S: Scalar>(
    hi: &Model<S>,
    lo: &Model<S>,
    grid: &Grid<S>,
    config: &SchemeConfig,
) -> Result<Vec<ScreenItem<S>>> {
    let stride = (grid.n_x() / 128).max(1);
    let xs: Vec<S> = grid.x_nodes.iter().step_by(stride).copied().collect();
    let horizon = grid.horizon();
    let ts: Vec<S> = (0..=8).map(|k| horizon * S::from_usize_(k) / S::lit(8.0)).collect();
    let tol = S::lit(1e-12);
    let rel_exceeds = |a: S, b: S| a > b + tol * (S::one() + b.abs());

    let mut vol = ScreenItem {
        hypothesis: "volatility".into(),
        passed: true,
        witness: None,
        note: "|beta_lo| <= |beta_hi|".into(),
    };
    let mut intensity = ScreenItem {
        hypothesis: "intensity".into(),
        passed: true,
        witness: None,
        note: "lambda_lo <= lambda_hi".into(),
    };
    for &t in &ts {
        if intensity.passed && rel_exceeds(lo.intensity(t), hi.intensity(t)) {
            intensity.passed = false;
            intensity.witness = Some(Witness { x: xs[0], t, z: None });
        }
        for &x in &xs {
            if vol.passed && rel_exceeds(lo.beta.eval(x, t).abs(), hi.beta.eval(x, t).abs()) {
                vol.passed = false;
                vol.witness = Some(Witness { x, t, z: None });
            }
        }
    }

    let same_measure = hi.measure == lo.measure;
    let measure = ScreenItem {
        hypothesis: "measure".into(),
        passed: same_measure,
        witness: None,
        note: if same_measure {
            "both models share the label measure".into()
        } else {
            "label measures differ; the jump-size ratio is not comparable".into()
        },
    };

    let zs = screen_labels(hi, lo, config)?;
    let mut ratio = ScreenItem {
        hypothesis: "jump_ratio".into(),
        passed: true,
        witness: None,
        note: "phi_hi / phi_lo >= 1 wherever phi_lo != 0".into(),
    };
    'outer: for &t in &ts {
        for &x in &xs {
            for &z in &zs {
                let (p_hi, p_lo) = (hi.phi.eval(x, t, z), lo.phi.eval(x, t, z));
                if p_lo != S::zero() && (p_hi / p_lo) < S::one() - tol {
                    ratio.passed = false;
                    ratio.witness = Some(Witness { x, t, z: Some(z) });
                    break 'outer;
                }
            }
        }
    }

    let erl_hi = check_conditions(hi, &xs, &ts, &zs)?.erlander;
    let erl_lo = check_conditions(lo, &xs, &ts, &zs)?.erlander;
    let erlander = ScreenItem {
        hypothesis: "erlander".into(),
        passed: !erl_hi.failed() || !erl_lo.failed(),
        witness: if erl_hi.failed() { erl_hi.witness } else { None },
        note: format!(
            "phi convex where positive and concave where negative: hi {:?}, lo {:?}",
            erl_hi.status, erl_lo.status
        ),
    };
    Ok(vec![vol, intensity, measure, ratio, erlander])
}

fn screen_labels<S: Scalar>(hi: &Model<S>, lo: &Model<S>, config: &SchemeConfig) -> Result<Vec<S>> {
    let mut zs = Vec::new();
    for m in [hi, lo] {
        if m.measure.is_finite_activity() {
            zs.extend(m.measure.quadrature(config.z_quadrature_nodes)?.nodes);
        } else if let Some((a, b)) = m.measure.finite_window() {
            zs.extend((0..=32).map(|k| a * (b / a).powf(S::from_usize_(k) / S::lit(32.0))));
        }
    }
    zs.retain(|&z| hi.measure.contains(z) && lo.measure.contains(z));
    zs.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
    zs.dedup();
    if zs.is_empty() {
        return Err(Error::Incompatible("the two label spaces do not overlap".into()));
    }
    Ok(zs)
}

impl<S: Scalar> fmt::Display for ComparisonReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "comparison ({}): {}",
            self.method,
            if self.dominated { "dominated" } else { "NOT dominated" }
        )?;
        writeln!(f, "upper model: {}", self.model_hi)?;
        writeln!(f, "lower model: {}", self.model_lo)?;
        writeln!(f, "payoff: {}", self.payoff)?;
        writeln!(
            f,
            "differs in: {}",
            if self.differs.is_empty() {
                "nothing".into()
            } else {
                self.differs.join(", ")
            }
        )?;
        writeln!(
            f,
            "max violation: {:e} at x = {}, tau = {} (tolerance {:e})",
            self.max_violation, self.location.x, self.location.tau, self.tolerance
        )?;
        if let Some(e) = self.fd_error_estimate {
            writeln!(f, "step-doubling error estimate: {e:e}")?;
        }
        for p in &self.points {
            writeln!(
                f,
                "x = {}: hi {} ± {}, lo {} ± {}",
                p.x, p.hi, p.hi_stderr, p.lo, p.lo_stderr
            )?;
        }
        write!(f, "hypotheses: {}", if self.hypotheses_met { "met" } else { "UNMET" })?;
        for s in &self.screen {
            write!(
                f,
                "\n  {}: {} ({})",
                s.hypothesis,
                if s.passed { "ok" } else { "fail" },
                s.note
            )?;
            if let Some(w) = &s.witness {
                write!(f, " at x = {}, t = {}", w.x, w.t)?;
                if let Some(z) = w.z {
                    write!(f, ", z = {z}")?;
                }
            }
        }
        Ok(())
    }
}
