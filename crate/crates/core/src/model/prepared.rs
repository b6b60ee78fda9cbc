use super::{CoefficientSpec, JumpQuadrature, JumpSizeSpec, MeasureSpec, Model};
use crate::error::{Error, Result};
use crate::numerics::{interp_linear, Extrapolation};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
enum Compensator<'a, S> {
    Zero,
    /// `k * x`
    Linear(S),
    /// `k * psi(x, t)`
    Scaled(&'a CoefficientSpec<S>, S),
    /// `k * bump(x)`
    Bump(S),
    /// Integrated table `[it][ix]` sharing the tabulated jump's x/t grids.
    Table {
        x_grid: &'a [S],
        t_grid: &'a [S],
        table: Vec<Vec<S>>,
    },
}

/// A finite-activity model paired with its label quadrature.
///
/// Caches `∫ phi(x,t,z) m(dz)` in closed form where the jump family allows it
/// and provides the label distribution `m / m(Z)` used by the simulator.
#[derive(Debug, Clone)]
pub struct PreparedJumps<'a, S> {
    model: &'a Model<S>,
    quadrature: JumpQuadrature<S>,
    mass: S,
    compensator: Compensator<'a, S>,
    /// Cumulative label probabilities over quadrature nodes; `None` means uniform on [0,1].
    label_cdf: Option<Vec<f64>>,
}

impl<'a, S: Scalar> PreparedJumps<'a, S> {
    pub fn new(model: &'a Model<S>, z_intervals: usize) -> Result<Self> {
        if model.phi.is_zero() {
            return Ok(Self {
                model,
                quadrature: JumpQuadrature {
                    nodes: Vec::new(),
                    weights: Vec::new(),
                },
                mass: S::zero(),
                compensator: Compensator::Zero,
                label_cdf: None,
            });
        }
        if !model.measure.is_finite_activity() {
            return Err(Error::InfiniteActivity("pricing"));
        }
        let quadrature = model.measure.quadrature(z_intervals)?;
        let mass = quadrature.mass();
        let compensator = match &model.phi {
            JumpSizeSpec::Zero => Compensator::Zero,
            JumpSizeSpec::RelativeConstant { c } => Compensator::Linear(*c * mass),
            JumpSizeSpec::RelativeOfZ { zeta } => Compensator::Linear(quadrature.integrate(|z| zeta.eval(z))),
            JumpSizeSpec::Separable { psi, zeta } => Compensator::Scaled(psi, quadrature.integrate(|z| zeta.eval(z))),
            JumpSizeSpec::Bump(_) => Compensator::Bump(mass),
            JumpSizeSpec::TabulatedXz {
                x_grid,
                z_grid: _,
                t_grid,
                ..
            } => {
                let table = t_grid
                    .iter()
                    .map(|&t| {
                        x_grid
                            .iter()
                            .map(|&x| quadrature.integrate(|z| model.phi.eval(x, t, z)))
                            .collect()
                    })
                    .collect();
                Compensator::Table { x_grid, t_grid, table }
            }
        };
        let label_cdf = match model.measure {
            MeasureSpec::LebesgueUnit => None,
            _ => {
                let total = mass.to_f64_();
                let mut acc = 0.0;
                Some(
                    quadrature
                        .weights
                        .iter()
                        .map(|w| {
                            acc += w.to_f64_() / total;
                            acc
                        })
                        .collect(),
                )
            }
        };
        Ok(Self {
            model,
            quadrature,
            mass,
            compensator,
            label_cdf,
        })
    }

    pub fn model(&self) -> &'a Model<S> {
        self.model
    }

    pub fn quadrature(&self) -> &JumpQuadrature<S> {
        &self.quadrature
    }

    /// Total label mass `m(Z)`.
    pub fn mass(&self) -> S {
        self.mass
    }

    pub fn has_jumps(&self) -> bool {
        !matches!(self.compensator, Compensator::Zero) && self.mass > S::zero()
    }

    /// `∫ phi(x, t, z) m(dz)` with the prepared quadrature.
    pub fn compensator(&self, x: S, t: S) -> S {
        match &self.compensator {
            Compensator::Zero => S::zero(),
            Compensator::Linear(k) => *k * x,
            Compensator::Scaled(psi, k) => *k * psi.eval(x, t),
            Compensator::Bump(k) => *k * self.model.phi.eval(x, t, S::zero()),
            Compensator::Table { x_grid, t_grid, table } => {
                let per_t: Vec<S> = table
                    .iter()
                    .map(|row| interp_linear(x_grid, row, x, Extrapolation::Linear))
                    .collect();
                interp_linear(t_grid, &per_t, t, Extrapolation::Flat)
            }
        }
    }

    /// Maps a uniform draw in `[0, 1)` to a label distributed as `m / m(Z)`.
    pub fn sample_label(&self, u: f64) -> S {
        match &self.label_cdf {
            None => S::lit(u),
            Some(cdf) => {
                let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                self.quadrature.nodes[k]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{counterexample_model, DensitySpec, ZFunction};
    use super::*;

    #[test]
    fn closed_form_compensators_match_quadrature() {
        let models = vec![
            Model::<f64>::relative_jump("rc", 0.2, 0.1, 1.0),
            counterexample_model(),
            Model {
                phi: JumpSizeSpec::RelativeOfZ {
                    zeta: ZFunction::Saturating { c: 0.4, rate: 2.0 },
                },
                measure: MeasureSpec::Density {
                    density: DensitySpec::PowerLaw { scale: 0.3, alpha: 0.5 },
                    window: Some((0.1, 10.0)),
                },
                ..Model::relative_jump("dens", 0.2, 0.0, 1.0)
            },
        ];
        for m in &models {
            let p = PreparedJumps::new(m, 64).unwrap();
            for &x in &[0.3, 0.6, 1.0, 2.5] {
                let brute = p.quadrature().integrate(|z| m.phi.eval(x, 0.2, z));
                assert!((p.compensator(x, 0.2) - brute).abs() < 1e-12, "{}", m.label);
            }
        }
    }

    #[test]
    fn discrete_labels_follow_weights() {
        let m = Model {
            measure: MeasureSpec::Atoms {
                atoms: vec![(0.5, 1.0), (2.0, 3.0)],
            },
            ..Model::<f64>::relative_jump("atoms", 0.2, 0.1, 1.0)
        };
        let p = PreparedJumps::new(&m, 8).unwrap();
        assert_eq!(p.mass(), 4.0);
        assert_eq!(p.sample_label(0.1), 0.5);
        assert_eq!(p.sample_label(0.3), 2.0);
        assert_eq!(p.sample_label(0.999), 2.0);
    }

    #[test]
    fn infinite_activity_rejected() {
        let m = Model {
            measure: MeasureSpec::Density {
                density: DensitySpec::PowerLaw { scale: 1.0, alpha: 0.5 },
                window: None,
            },
            ..Model::<f64>::relative_jump("inf", 0.2, 0.1, 1.0)
        };
        assert!(matches!(PreparedJumps::new(&m, 64), Err(Error::InfiniteActivity(_))));
    }
}
