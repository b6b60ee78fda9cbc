//! Jump-label measures: the unit Lebesgue measure of the finite-intensity model
//! and Radon measures on `(0, ∞)` for the general model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{interp_linear, simpson, simpson_log, strictly_increasing, Extrapolation};
use crate::scalar::Scalar;

/// Density `d(z)` of a measure on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "S: Scalar")]
pub enum DensitySpec<S> {
    /// `scale * z^(-1-alpha)`; infinite mass near 0 whenever `alpha >= 0`.
    PowerLaw { scale: S, alpha: S },
    /// `scale * exp(-rate z)`
    Exponential { scale: S, rate: S },
    /// `scale * z^(-1-alpha) * exp(-rate z)`
    TemperedStable { scale: S, alpha: S, rate: S },
    /// Linear between nodes, zero outside `[z_grid[0], z_grid[last]]`.
    Tabulated { z_grid: Vec<S>, values: Vec<S> },
}

impl<S: Scalar> DensitySpec<S> {
    pub fn eval(&self, z: S) -> S {
        if z <= S::zero() {
            return S::zero();
        }
        match self {
            Self::PowerLaw { scale, alpha } => *scale * z.powf(-S::one() - *alpha),
            Self::Exponential { scale, rate } => *scale * (-*rate * z).exp(),
            Self::TemperedStable { scale, alpha, rate } => *scale * z.powf(-S::one() - *alpha) * (-*rate * z).exp(),
            Self::Tabulated { z_grid, values } => {
                if z < z_grid[0] || z > z_grid[z_grid.len() - 1] {
                    S::zero()
                } else {
                    interp_linear(z_grid, values, z, Extrapolation::Flat)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::PowerLaw { scale, alpha } => *scale >= S::zero() && alpha.is_finite(),
            Self::Exponential { scale, rate } => *scale >= S::zero() && *rate > S::zero(),
            Self::TemperedStable { scale, alpha, rate } => {
                *scale >= S::zero() && alpha.is_finite() && *rate >= S::zero()
            }
            Self::Tabulated { z_grid, values } => {
                !z_grid.is_empty()
                    && z_grid[0] > S::zero()
                    && z_grid.len() == values.len()
                    && strictly_increasing(z_grid)
                    && values.iter().all(|v| v.is_finite() && *v >= S::zero())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "invalid density {self:?}: parameters must be finite and nonnegative"
            )))
        }
    }

    fn support(&self) -> Option<(S, S)> {
        match self {
            Self::Tabulated { z_grid, .. } => Some((z_grid[0], z_grid[z_grid.len() - 1])),
            _ => None,
        }
    }
}

/// Intensity measure of the jump labels.
///
/// JSON kinds: `lebesgue_unit`, `density` (`density`, optional `window: [a, b]`),
/// `atoms` (`atoms: [[z, mass], ...]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "S: Scalar")]
pub enum MeasureSpec<S> {
    /// Lebesgue measure on `[0, 1]`.
    LebesgueUnit,
    /// `d(z) dz`, restricted to `window` when present.
    Density {
        density: DensitySpec<S>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<(S, S)>,
    },
    Atoms {
        atoms: Vec<(S, S)>,
    },
}

/// Quadrature rule for integrals against the measure: `∫ f m(dz) ≈ Σ w_k f(z_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpQuadrature<S> {
    pub nodes: Vec<S>,
    pub weights: Vec<S>,
}

impl<S: Scalar> JumpQuadrature<S> {
    pub fn mass(&self) -> S {
        self.weights.iter().fold(S::zero(), |acc, &w| acc + w)
    }

    pub fn integrate(&self, mut f: impl FnMut(S) -> S) -> S {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(S::zero(), |acc, (&z, &w)| acc + w * f(z))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl<S: Scalar> MeasureSpec<S> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::LebesgueUnit => Ok(()),
            Self::Density { density, window } => {
                density.validate()?;
                if let Some((a, b)) = window {
                    if !(*a > S::zero() && a <= b && b.is_finite()) {
                        return Err(Error::InvalidSpec(format!(
                            "density window must satisfy 0 < a <= b < inf, got [{a}, {b}]"
                        )));
                    }
                }
                Ok(())
            }
            Self::Atoms { atoms } => {
                if atoms
                    .iter()
                    .all(|(z, m)| *z > S::zero() && z.is_finite() && *m >= S::zero() && m.is_finite())
                {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(
                        "atoms need z > 0 and finite nonnegative mass".into(),
                    ))
                }
            }
        }
    }

    /// Whether `z` lies in the label space: `[0, 1]` for the unit measure, `(0, ∞)` otherwise.
    pub fn contains(&self, z: S) -> bool {
        match self {
            Self::LebesgueUnit => z >= S::zero() && z <= S::one(),
            _ => z > S::zero() && z.is_finite(),
        }
    }

    /// Compact set carrying the whole measure, if any.
    pub fn finite_window(&self) -> Option<(S, S)> {
        match self {
            Self::LebesgueUnit => Some((S::zero(), S::one())),
            Self::Density { density, window } => match (window, density.support()) {
                (Some((a, b)), Some((c, d))) => Some((a.max(c), b.min(d))),
                (Some(w), None) => Some(*w),
                (None, s) => s,
            },
            Self::Atoms { atoms } => {
                let lo = atoms.iter().map(|a| a.0).fold(S::infinity(), S::min);
                let hi = atoms.iter().map(|a| a.0).fold(S::neg_infinity(), S::max);
                if atoms.is_empty() {
                    Some((S::one(), S::one()))
                } else {
                    Some((lo, hi))
                }
            }
        }
    }

    /// True when the measure has finite total mass on a compact label window,
    /// so that simulation and the explicit jump step are well defined.
    pub fn is_finite_activity(&self) -> bool {
        self.finite_window().is_some()
    }

    /// Quadrature rule with roughly `intervals` Simpson panels (exact sum for atoms).
    pub fn quadrature(&self, intervals: usize) -> Result<JumpQuadrature<S>> {
        let pairs: Vec<(S, S)> = match self {
            Self::LebesgueUnit => simpson(S::zero(), S::one(), intervals),
            Self::Atoms { atoms } => atoms.clone(),
            Self::Density { density, .. } => {
                let (a, b) = self
                    .finite_window()
                    .ok_or(Error::InfiniteActivity("building a jump quadrature"))?;
                if b <= a {
                    Vec::new()
                } else {
                    simpson_log(a, b, intervals)
                        .into_iter()
                        .map(|(z, w)| (z, w * density.eval(z)))
                        .collect()
                }
            }
        };
        Ok(JumpQuadrature {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// Mass assigned to `[a, b]`, computed with `intervals` panels for densities.
    pub fn mass_on(&self, a: S, b: S, intervals: usize) -> S {
        match self {
            Self::LebesgueUnit => (b.min(S::one()) - a.max(S::zero())).max(S::zero()),
            Self::Atoms { atoms } => atoms
                .iter()
                .filter(|(z, _)| *z >= a && *z <= b)
                .fold(S::zero(), |acc, (_, m)| acc + *m),
            Self::Density { density, window } => {
                let (lo, hi) = match window {
                    Some((wa, wb)) => (a.max(*wa), b.min(*wb)),
                    None => (a, b),
                };
                if !(lo > S::zero()) || hi <= lo {
                    return if lo <= S::zero() && hi > lo {
                        S::infinity()
                    } else {
                        S::zero()
                    };
                }
                simpson_log(lo, hi, intervals)
                    .into_iter()
                    .fold(S::zero(), |acc, (z, w)| acc + w * density.eval(z))
            }
        }
    }

    /// Checks the Radon property on the requested compact windows of `(0, ∞)`:
    /// every window must receive finite, nonnegative mass.
    pub fn check_radon(&self, windows: &[(S, S)], intervals: usize) -> Result<()> {
        for &(a, b) in windows {
            if !(a > S::zero() && a <= b) {
                return Err(Error::Domain(format!(
                    "window [{a}, {b}] is not a compact subset of (0, inf)"
                )));
            }
            let m = self.mass_on(a, b, intervals);
            if !m.is_finite() || m < S::zero() {
                return Err(Error::InvalidSpec(format!("measure assigns mass {m} to [{a}, {b}]")));
            }
        }
        Ok(())
    }

    /// Restriction of the measure to `[a, b]`.
    pub fn restrict(&self, a: S, b: S) -> Result<Self> {
        match self {
            Self::LebesgueUnit => Err(Error::AlreadyFinite),
            Self::Density { density, window } => {
                let (lo, hi) = match window {
                    Some((wa, wb)) => (a.max(*wa), b.min(*wb)),
                    None => (a, b),
                };
                Ok(Self::Density {
                    density: density.clone(),
                    window: Some((lo, hi.max(lo))),
                })
            }
            Self::Atoms { atoms } => Ok(Self::Atoms {
                atoms: atoms.iter().copied().filter(|(z, _)| *z >= a && *z <= b).collect(),
            }),
        }
    }
}
