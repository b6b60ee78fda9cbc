use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, PreparedJumps};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LcpVerdict {
    NoViolationFound,
    Violated,
}

/// `∂²ₓ(L f)(x0, t0)` for the quartic `f(x) = w ((x - x0) / w)⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct LcpProbe<S> {
    pub x0: S,
    pub t0: S,
    pub width: S,
    pub value: S,
    /// Round-off allowance below zero for this probe.
    pub tolerance: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct LcpReport<S> {
    pub verdict: LcpVerdict,
    pub model: String,
    /// Minimum over widths at each sampled point.
    pub points: Vec<LcpProbe<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<LcpProbe<S>>,
    pub z_quadrature_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcpOptions {
    pub z_quadrature_nodes: usize,
    /// Finite-difference step as a fraction of `min(w, x0)`.
    pub step_fraction: f64,
    /// Relative round-off allowance.
    pub relative_tolerance: f64,
}

impl Default for LcpOptions {
    fn default() -> Self {
        Self {
            z_quadrature_nodes: 64,
            step_fraction: 1.0 / 16.0,
            relative_tolerance: 1e-8,
        }
    }
}

/// Probes the local convexity-preservation inequality over a quartic family.
///
/// A negative value is a genuine witness; the absence of one is not a proof.
pub fn lcp_scan<S: Scalar>(model: &Model<S>, x_points: &[S], t_points: &[S], widths: &[S]) -> Result<LcpReport<S>> {
    lcp_scan_with(model, x_points, t_points, widths, &LcpOptions::default())
}

pub fn lcp_scan_with<S: Scalar>(
    model: &Model<S>,
    x_points: &[S],
    t_points: &[S],
    widths: &[S],
    options: &LcpOptions,
) -> Result<LcpReport<S>> {
    if x_points.is_empty() || t_points.is_empty() || widths.is_empty() {
        return Err(Error::Domain("lcp_scan needs x points, t points and widths".into()));
    }
    if x_points.iter().chain(widths).any(|v| !(*v > S::zero())) {
        return Err(Error::Domain("x points and widths must be positive".into()));
    }
    let jumps = PreparedJumps::new(model, options.z_quadrature_nodes)?;
    let mut points = Vec::new();
    let mut witness: Option<LcpProbe<S>> = None;
    for &t0 in t_points {
        for &x0 in x_points {
            let mut best: Option<LcpProbe<S>> = None;
            for &w in widths {
                let probe = probe(model, &jumps, x0, t0, w, options)?;
                if best.is_none_or(|b| probe.value < b.value) {
                    best = Some(probe);
                }
            }
            let best = best.expect("nonempty widths");
            if best.value < -best.tolerance && witness.is_none_or(|w| best.value < w.value) {
                witness = Some(best);
            }
            points.push(best);
        }
    }
    Ok(LcpReport {
        verdict: if witness.is_some() {
            LcpVerdict::Violated
        } else {
            LcpVerdict::NoViolationFound
        },
        model: model.label.clone(),
        points,
        witness,
        z_quadrature_nodes: options.z_quadrature_nodes,
    })
}

fn probe<S: Scalar>(
    model: &Model<S>,
    jumps: &PreparedJumps<'_, S>,
    x0: S,
    t0: S,
    w: S,
    options: &LcpOptions,
) -> Result<LcpProbe<S>> {
    let h = S::lit(options.step_fraction) * w.min(x0) * S::lit(0.5);
    let stencil = [-2, -1, 0, 1, 2];
    let coeffs = [-1.0, 16.0, -30.0, 16.0, -1.0];
    let mut value = S::zero();
    let mut magnitude = S::zero();
    for (&k, &c) in stencil.iter().zip(&coeffs) {
        let lf = generator_on_quartic(model, jumps, x0 + h * S::lit(k as f64), t0, x0, w)?;
        value = value + S::lit(c) * lf;
        magnitude = magnitude + S::lit(c.abs()) * lf.abs();
    }
    let denom = S::lit(12.0) * h * h;
    Ok(LcpProbe {
        x0,
        t0,
        width: w,
        value: value / denom,
        tolerance: S::lit(options.relative_tolerance) * magnitude / denom,
    })
}

/// `(L f)(x, t)` with `f`, `f'`, `f''` in closed form.
fn generator_on_quartic<S: Scalar>(
    model: &Model<S>,
    jumps: &PreparedJumps<'_, S>,
    x: S,
    t: S,
    x0: S,
    w: S,
) -> Result<S> {
    let f = |y: S| {
        let s = (y - x0) / w;
        w * s * s * s * s
    };
    let df = |y: S| {
        let s = (y - x0) / w;
        S::lit(4.0) * s * s * s
    };
    let s = (x - x0) / w;
    let d2f = S::lit(12.0) * s * s / w;
    let beta = model.beta.eval(x, t);
    let mut out = S::lit(0.5) * beta * beta * d2f;
    if jumps.has_jumps() {
        let lambda = model.intensity(t);
        let quad = jumps.quadrature();
        let mut integral = S::zero();
        for (&z, &m) in quad.nodes.iter().zip(&quad.weights) {
            let phi = model.phi.eval(x, t, z);
            if x + phi <= S::zero() {
                return Err(Error::Positivity {
                    x: x.to_f64_(),
                    t: t.to_f64_(),
                    z: z.to_f64_(),
                    dest: (x + phi).to_f64_(),
                });
            }
            integral = integral + m * (f(x + phi) - f(x) - phi * df(x));
        }
        out = out + lambda * integral;
    }
    Ok(out)
}

impl<S: Scalar> fmt::Display for LcpReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lcp scan: {}",
            match self.verdict {
                LcpVerdict::NoViolationFound => "no violation found",
                LcpVerdict::Violated => "VIOLATED",
            }
        )?;
        writeln!(f, "model: {}", self.model)?;
        writeln!(f, "probe points: {}", self.points.len())?;
        match &self.witness {
            Some(p) => write!(
                f,
                "witness: x0 = {}, t0 = {}, width = {}, value = {:e}",
                p.x0, p.t0, p.width, p.value
            ),
            None => write!(
                f,
                "minimum value: {:e}",
                self.points.iter().map(|p| p.value).fold(S::infinity(), S::min)
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::counterexample_model;

    fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn diffusions_have_no_violation() {
        for m in [
            Model::<f64>::diffusion("bs", 0.3),
            Model::relative_jump("rc", 0.2, 0.4, 2.0),
            Model::relative_jump("neg", 0.2, -0.5, 1.0),
        ] {
            let r = lcp_scan(&m, &grid_points(0.2, 3.0, 30), &[0.0, 0.5], &[0.05, 0.2, 1.0]).unwrap();
            assert_eq!(r.verdict, LcpVerdict::NoViolationFound, "{}", m.label);
            assert!(r.points.iter().all(|p| p.value >= -p.tolerance));
        }
    }

    #[test]
    fn counterexample_violates() {
        let m = counterexample_model::<f64>();
        let r = lcp_scan(&m, &grid_points(0.45, 0.8, 36), &[0.0], &[0.05, 0.1, 0.2]).unwrap();
        assert_eq!(r.verdict, LcpVerdict::Violated);
        let w = r.witness.unwrap();
        assert!(w.value < 0.0 && w.x0 > 0.5 && w.x0 < 0.75);
    }

    #[test]
    fn rejects_empty_inputs() {
        let m = Model::<f64>::diffusion("bs", 0.3);
        assert!(lcp_scan(&m, &[], &[0.0], &[0.1]).is_err());
        assert!(lcp_scan(&m, &[1.0], &[0.0], &[-0.1]).is_err());
    }
}
