//! Jump-size families `phi(x, t, z)`.

use serde::{Deserialize, Serialize};

use super::coefficient::{Bump, CoefficientSpec, ZFunction};
use crate::error::{Error, Result};
use crate::numerics::{bracket, interp_linear, strictly_increasing, Extrapolation};
use crate::scalar::Scalar;

/// Sign of `x ↦ phi(x, t, z)` for fixed `(t, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    Zero,
    Nonnegative,
    Nonpositive,
    Mixed,
}

impl SignPattern {
    fn of<S: Scalar>(v: S) -> Self {
        if v > S::zero() {
            Self::Nonnegative
        } else if v < S::zero() {
            Self::Nonpositive
        } else {
            Self::Zero
        }
    }

    /// Combines the patterns of two factors of a product.
    fn times(self, other: Self) -> Self {
        use SignPattern::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Mixed, _) | (_, Mixed) => Mixed,
            (a, b) if a == b => Nonnegative,
            _ => Nonpositive,
        }
    }

    /// Whether sampled values with this pattern are consistent with `self` as a declaration.
    pub fn admits(self, sampled: Self) -> bool {
        use SignPattern::*;
        match (self, sampled) {
            (Mixed, _) => true,
            (_, Zero) => true,
            (Zero, _) => false,
            (a, b) => a == b,
        }
    }
}

/// The jump size `phi(x, t, z)` added to the state when a jump labelled `z` occurs.
///
/// JSON kinds: `zero`, `relative_constant`, `relative_of_z`, `separable`, `bump`,
/// `tabulated_xz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "S: Scalar")]
pub enum JumpSizeSpec<S> {
    Zero,
    /// `c * x` for every label.
    RelativeConstant {
        c: S,
    },
    /// `x * zeta(z)`
    RelativeOfZ {
        zeta: ZFunction<S>,
    },
    /// `psi(x, t) * zeta(z)`
    Separable {
        psi: CoefficientSpec<S>,
        zeta: ZFunction<S>,
    },
    /// Label-independent trapezoidal bump in `x`.
    Bump(Bump<S>),
    /// `values[it][ix][iz]`: linear in `x` (extrapolated linearly), linear in `z`
    /// (zero outside the z-grid range) and linear in `t` (flat outside).
    TabulatedXz {
        x_grid: Vec<S>,
        z_grid: Vec<S>,
        t_grid: Vec<S>,
        values: Vec<Vec<Vec<S>>>,
    },
}

fn tabulated_slice<S: Scalar>(x_grid: &[S], z_grid: &[S], slice: &[Vec<S>], x: S, z: S) -> S {
    if z < z_grid[0] || z > z_grid[z_grid.len() - 1] {
        return S::zero();
    }
    let at = |i: usize| interp_linear(z_grid, &slice[i], z, Extrapolation::Flat);
    if x_grid.len() == 1 {
        return at(0);
    }
    let i = bracket(x_grid, x);
    let (lo, hi) = (at(i), at(i + 1));
    lo + (x - x_grid[i]) / (x_grid[i + 1] - x_grid[i]) * (hi - lo)
}

impl<S: Scalar> JumpSizeSpec<S> {
    pub fn eval(&self, x: S, t: S, z: S) -> S {
        match self {
            Self::Zero => S::zero(),
            Self::RelativeConstant { c } => *c * x,
            Self::RelativeOfZ { zeta } => x * zeta.eval(z),
            Self::Separable { psi, zeta } => psi.eval(x, t) * zeta.eval(z),
            Self::Bump(b) => b.eval(x),
            Self::TabulatedXz {
                x_grid,
                z_grid,
                t_grid,
                values,
            } => {
                if t_grid.len() == 1 {
                    return tabulated_slice(x_grid, z_grid, &values[0], x, z);
                }
                let per_t: Vec<S> = values
                    .iter()
                    .map(|slice| tabulated_slice(x_grid, z_grid, slice, x, z))
                    .collect();
                interp_linear(t_grid, &per_t, t, Extrapolation::Flat)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::RelativeConstant { c } => {
                if c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec("relative_constant: c must be finite".into()))
                }
            }
            Self::RelativeOfZ { zeta } => zeta.validate(),
            Self::Separable { psi, zeta } => {
                psi.validate()?;
                zeta.validate()
            }
            Self::Bump(b) => b.validate(),
            Self::TabulatedXz {
                x_grid,
                z_grid,
                t_grid,
                values,
            } => {
                let grids_ok = !x_grid.is_empty()
                    && !z_grid.is_empty()
                    && !t_grid.is_empty()
                    && strictly_increasing(x_grid)
                    && strictly_increasing(z_grid)
                    && strictly_increasing(t_grid);
                let shape_ok = values.len() == t_grid.len()
                    && values
                        .iter()
                        .all(|slice| slice.len() == x_grid.len() && slice.iter().all(|row| row.len() == z_grid.len()));
                let finite = values.iter().flatten().flatten().all(|v| v.is_finite());
                if grids_ok && shape_ok && finite {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(
                        "tabulated_xz: grids must be strictly increasing and values shaped [t][x][z]".into(),
                    ))
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::RelativeConstant { c } => *c == S::zero(),
            Self::Bump(b) => b.height == S::zero(),
            _ => false,
        }
    }

    pub fn is_t_independent(&self) -> bool {
        match self {
            Self::Separable { psi, .. } => psi.is_t_independent(),
            Self::TabulatedXz { t_grid, .. } => t_grid.len() == 1,
            _ => true,
        }
    }

    /// Sign pattern known from the family's parameters, when the family fixes it.
    pub fn declared_sign(&self, z: S) -> Option<SignPattern> {
        match self {
            Self::Zero => Some(SignPattern::Zero),
            Self::RelativeConstant { c } => Some(SignPattern::of(*c)),
            Self::RelativeOfZ { zeta } => Some(SignPattern::of(zeta.eval(z))),
            Self::Separable { psi, zeta } => {
                let psi_sign = match psi {
                    CoefficientSpec::Zero => Some(SignPattern::Zero),
                    CoefficientSpec::Constant { value } => Some(SignPattern::of(*value)),
                    CoefficientSpec::Proportional { c } | CoefficientSpec::Power { c, .. } => Some(SignPattern::of(*c)),
                    _ => None,
                }?;
                Some(psi_sign.times(SignPattern::of(zeta.eval(z))))
            }
            Self::Bump(b) => Some(SignPattern::of(b.height)),
            Self::TabulatedXz { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_families() {
        let phi = JumpSizeSpec::RelativeConstant { c: 0.1_f64 };
        assert!((phi.eval(1.5, 0.3, 0.7) - 0.15).abs() < 1e-15);
        let phi = JumpSizeSpec::RelativeOfZ {
            zeta: ZFunction::Affine { a: -0.2_f64, b: 0.4 },
        };
        assert!((phi.eval(2.0, 0.0, 1.0) - 0.4).abs() < 1e-15);
        assert_eq!(phi.declared_sign(0.0), Some(SignPattern::Nonpositive));
        assert_eq!(phi.declared_sign(1.0), Some(SignPattern::Nonnegative));
    }

    #[test]
    fn tabulated_xz_interpolates_and_extrapolates() {
        let phi = JumpSizeSpec::TabulatedXz {
            x_grid: vec![1.0_f64, 2.0],
            z_grid: vec![0.0, 1.0],
            t_grid: vec![0.0],
            values: vec![vec![vec![0.1, 0.3], vec![0.2, 0.6]]],
        };
        phi.validate().unwrap();
        assert!((phi.eval(1.5, 0.0, 0.5) - 0.3).abs() < 1e-15);
        // linear continuation in x beyond the table
        assert!((phi.eval(3.0, 0.0, 0.0) - 0.3).abs() < 1e-15);
        // no jumps for labels outside the tabulated window
        assert_eq!(phi.eval(1.5, 0.0, 1.5), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let phi: JumpSizeSpec<f64> = serde_json::from_str(
            r#"{"kind":"separable","psi":{"kind":"proportional","c":1.0},"zeta":{"kind":"saturating","c":0.3,"rate":1.0}}"#,
        )
        .unwrap();
        phi.validate().unwrap();
        let back: JumpSizeSpec<f64> = serde_json::from_str(&serde_json::to_string(&phi).unwrap()).unwrap();
        assert_eq!(back, phi);
        assert_eq!(phi.declared_sign(0.5), Some(SignPattern::Nonnegative));
    }
}
