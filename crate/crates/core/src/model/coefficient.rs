//! Parametric coefficient families over `(x, t)` and functions of the jump label.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bracket, interp_linear, strictly_increasing, Extrapolation};
use crate::scalar::Scalar;

/// Trapezoidal bump in `x`: zero outside `(x_lo, x_hi)`, rising linearly to
/// `height` on `[x_lo, x_rise]`, flat on `[x_rise, x_fall]`, falling to zero on
/// `[x_fall, x_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Bump<S> {
    pub x_lo: S,
    pub x_rise: S,
    pub x_fall: S,
    pub x_hi: S,
    pub height: S,
}

impl<S: Scalar> Bump<S> {
    pub fn eval(&self, x: S) -> S {
        if x <= self.x_lo || x >= self.x_hi {
            S::zero()
        } else if x < self.x_rise {
            self.height * (x - self.x_lo) / (self.x_rise - self.x_lo)
        } else if x <= self.x_fall {
            self.height
        } else {
            self.height * (self.x_hi - x) / (self.x_hi - self.x_fall)
        }
    }

    /// Largest absolute slope of the ramps.
    pub fn lipschitz(&self) -> S {
        let up = self.height.abs() / (self.x_rise - self.x_lo);
        let down = self.height.abs() / (self.x_hi - self.x_fall);
        up.max(down)
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = self.x_lo < self.x_rise && self.x_rise <= self.x_fall && self.x_fall < self.x_hi;
        if !ordered || !self.height.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "bump knots must satisfy x_lo < x_rise <= x_fall < x_hi, got ({}, {}, {}, {})",
                self.x_lo, self.x_rise, self.x_fall, self.x_hi
            )));
        }
        Ok(())
    }
}

/// A closed family of coefficient functions of `(x, t)`.
///
/// JSON form: `{"kind": "<kind>", ...fields}` with kinds `zero`, `constant`,
/// `proportional`, `power`, `piecewise_x`, `bump_x`, `time_modulated`, `tabulated`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "S: Scalar")]
pub enum CoefficientSpec<S> {
    Zero,
    Constant {
        value: S,
    },
    /// `c * x`
    Proportional {
        c: S,
    },
    /// `c * x^p`
    Power {
        c: S,
        p: S,
    },
    /// Piecewise linear in `x` through `(x, value)` knots, flat outside.
    #[serde(rename = "piecewise_x")]
    PiecewiseX {
        knots: Vec<(S, S)>,
    },
    #[serde(rename = "bump_x")]
    BumpX(Bump<S>),
    /// `base(x, t) * factor(t)` with `factor` piecewise linear through `(t, value)` knots.
    TimeModulated {
        base: Box<CoefficientSpec<S>>,
        factor: Vec<(S, S)>,
    },
    /// Bilinear interpolation of `values[ix][it]`, flat outside the grids.
    Tabulated {
        x_grid: Vec<S>,
        t_grid: Vec<S>,
        values: Vec<Vec<S>>,
    },
}

fn knots_increasing<S: Scalar>(knots: &[(S, S)], what: &str) -> Result<()> {
    if knots.is_empty() {
        return Err(Error::InvalidSpec(format!("{what}: knot list is empty")));
    }
    let xs: Vec<S> = knots.iter().map(|k| k.0).collect();
    if !strictly_increasing(&xs) || knots.iter().any(|k| !k.1.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "{what}: knots must be finite and strictly increasing"
        )));
    }
    Ok(())
}

pub(crate) fn eval_knots<S: Scalar>(knots: &[(S, S)], x: S) -> S {
    match knots.len() {
        0 => S::zero(),
        1 => knots[0].1,
        _ => {
            let xs: Vec<S> = knots.iter().map(|k| k.0).collect();
            let ys: Vec<S> = knots.iter().map(|k| k.1).collect();
            interp_linear(&xs, &ys, x, Extrapolation::Flat)
        }
    }
}

pub(crate) fn bilinear<S: Scalar>(xg: &[S], tg: &[S], values: &[Vec<S>], x: S, t: S) -> S {
    // interpolate in t on the two x rows around x, then in x
    let at = |i: usize| interp_linear(tg, &values[i], t, Extrapolation::Flat);
    let n = xg.len();
    if n == 1 || x <= xg[0] {
        return at(0);
    }
    if x >= xg[n - 1] {
        return at(n - 1);
    }
    let i = bracket(xg, x);
    let (lo, hi) = (at(i), at(i + 1));
    lo + (x - xg[i]) / (xg[i + 1] - xg[i]) * (hi - lo)
}

pub(crate) fn validate_table<S: Scalar>(xg: &[S], tg: &[S], values: &[Vec<S>], what: &str) -> Result<()> {
    if xg.is_empty() || tg.is_empty() || !strictly_increasing(xg) || !strictly_increasing(tg) {
        return Err(Error::InvalidSpec(format!(
            "{what}: grids must be nonempty and strictly increasing"
        )));
    }
    if values.len() != xg.len() || values.iter().any(|r| r.len() != tg.len()) {
        return Err(Error::InvalidSpec(format!(
            "{what}: values must be {}x{} (x by t)",
            xg.len(),
            tg.len()
        )));
    }
    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpec(format!("{what}: values must be finite")));
    }
    Ok(())
}

impl<S: Scalar> CoefficientSpec<S> {
    pub fn eval(&self, x: S, t: S) -> S {
        match self {
            Self::Zero => S::zero(),
            Self::Constant { value } => *value,
            Self::Proportional { c } => *c * x,
            Self::Power { c, p } => *c * x.powf(*p),
            Self::PiecewiseX { knots } => eval_knots(knots, x),
            Self::BumpX(b) => b.eval(x),
            Self::TimeModulated { base, factor } => base.eval(x, t) * eval_knots(factor, t),
            Self::Tabulated { x_grid, t_grid, values } => bilinear(x_grid, t_grid, values, x, t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::Constant { value } if value.is_finite() => Ok(()),
            Self::Proportional { c } if c.is_finite() => Ok(()),
            Self::Power { c, p } if c.is_finite() && p.is_finite() => Ok(()),
            Self::Constant { .. } | Self::Proportional { .. } | Self::Power { .. } => {
                Err(Error::InvalidSpec("coefficient parameters must be finite".into()))
            }
            Self::PiecewiseX { knots } => knots_increasing(knots, "piecewise_x"),
            Self::BumpX(b) => b.validate(),
            Self::TimeModulated { base, factor } => {
                base.validate()?;
                knots_increasing(factor, "time_modulated factor")
            }
            Self::Tabulated { x_grid, t_grid, values } => validate_table(x_grid, t_grid, values, "tabulated"),
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match self {
            Self::Zero | Self::Constant { .. } => true,
            Self::Proportional { c } => *c == S::zero(),
            Self::Power { c, p } => *c == S::zero() || *p == S::zero(),
            Self::PiecewiseX { knots } => knots.len() == 1,
            Self::BumpX(b) => b.height == S::zero(),
            Self::TimeModulated { base, .. } => base.is_x_independent(),
            Self::Tabulated { x_grid, .. } => x_grid.len() == 1,
        }
    }

    pub fn is_t_independent(&self) -> bool {
        match self {
            Self::TimeModulated { base, factor } => {
                base.is_t_independent() && factor.iter().all(|k| k.1 == factor[0].1)
            }
            Self::Tabulated { t_grid, .. } => t_grid.len() == 1,
            _ => true,
        }
    }
}

/// A function of the jump label `z`, used in `phi = x * zeta(z)` families.
///
/// JSON kinds: `affine` (`a + b z`), `power` (`c z^p`), `saturating`
/// (`c (1 - exp(-rate z))`), `tabulated` (linear, flat outside the grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "S: Scalar")]
pub enum ZFunction<S> {
    Affine { a: S, b: S },
    Power { c: S, p: S },
    Saturating { c: S, rate: S },
    Tabulated { z_grid: Vec<S>, values: Vec<S> },
}

impl<S: Scalar> ZFunction<S> {
    pub fn constant(c: S) -> Self {
        Self::Affine { a: c, b: S::zero() }
    }

    pub fn eval(&self, z: S) -> S {
        match self {
            Self::Affine { a, b } => *a + *b * z,
            Self::Power { c, p } => *c * z.powf(*p),
            Self::Saturating { c, rate } => *c * (S::one() - (-*rate * z).exp()),
            Self::Tabulated { z_grid, values } => interp_linear(z_grid, values, z, Extrapolation::Flat),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Affine { a, b } => a.is_finite() && b.is_finite(),
            Self::Power { c, p } => c.is_finite() && p.is_finite(),
            Self::Saturating { c, rate } => c.is_finite() && rate.is_finite() && *rate > S::zero(),
            Self::Tabulated { z_grid, values } => {
                !z_grid.is_empty()
                    && z_grid.len() == values.len()
                    && strictly_increasing(z_grid)
                    && values.iter().all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("invalid zeta function {self:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate() {
        let x = 2.0_f64;
        assert_eq!(CoefficientSpec::Proportional { c: 0.2 }.eval(x, 0.5), 0.4);
        assert_eq!(CoefficientSpec::Power { c: 0.5, p: 2.0 }.eval(x, 0.0), 2.0);
        let pw = CoefficientSpec::PiecewiseX {
            knots: vec![(1.0, 1.0), (3.0, 2.0)],
        };
        assert_eq!(pw.eval(2.0, 0.0), 1.5);
        assert_eq!(pw.eval(0.1, 0.0), 1.0);
        assert_eq!(pw.eval(9.0, 0.0), 2.0);
        let tm = CoefficientSpec::TimeModulated {
            base: Box::new(CoefficientSpec::Constant { value: 2.0 }),
            factor: vec![(0.0, 1.0), (1.0, 3.0)],
        };
        assert_eq!(tm.eval(1.0, 0.5), 4.0);
        assert!(!tm.is_t_independent());
        assert!(tm.is_x_independent());
    }

    #[test]
    fn tabulated_is_bilinear() {
        let tab = CoefficientSpec::Tabulated {
            x_grid: vec![1.0_f64, 2.0],
            t_grid: vec![0.0, 1.0],
            values: vec![vec![0.0, 1.0], vec![2.0, 3.0]],
        };
        tab.validate().unwrap();
        assert!((tab.eval(1.5, 0.5) - 1.5).abs() < 1e-15);
        let bad = CoefficientSpec::Tabulated {
            x_grid: vec![2.0, 1.0],
            t_grid: vec![0.0],
            values: vec![vec![0.0], vec![1.0]],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bump_shape() {
        let b = Bump {
            x_lo: 0.5_f64,
            x_rise: 0.55,
            x_fall: 0.70,
            x_hi: 0.75,
            height: 1.2,
        };
        assert_eq!(b.eval(0.5), 0.0);
        assert_eq!(b.eval(0.6), 1.2);
        assert!((b.eval(0.525) - 0.6).abs() < 1e-12);
        assert_eq!(b.eval(1.0), 0.0);
        assert!((b.lipschitz() - 24.0).abs() < 1e-9);
    }

    #[test]
    fn json_kinds_are_normative() {
        let spec: CoefficientSpec<f64> =
            serde_json::from_str(r#"{"kind":"piecewise_x","knots":[[1,0.1],[2,0.3]]}"#).unwrap();
        assert_eq!(spec.eval(1.5, 0.0), 0.2);
        let spec: CoefficientSpec<f64> =
            serde_json::from_str(r#"{"kind":"bump_x","x_lo":0.5,"x_rise":0.55,"x_fall":0.7,"x_hi":0.75,"height":1.2}"#)
                .unwrap();
        assert_eq!(spec.eval(0.6, 0.0), 1.2);
        let text = serde_json::to_string(&CoefficientSpec::<f64>::Zero).unwrap();
        assert_eq!(text, r#"{"kind":"zero"}"#);
    }
}
