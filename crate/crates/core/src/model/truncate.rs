//! Finite-intensity approximation of models driven by a general Radon label measure.

use super::{JumpSizeSpec, MeasureSpec, Model};
use crate::error::{Error, Result};
use crate::numerics::strictly_increasing;
use crate::scalar::Scalar;

/// Greatest convex minorant of the points `(xs[i], ys[i])` among convex
/// functions whose right derivative never exceeds `slope_cap`, evaluated at `xs`.
///
/// Builds the lower convex hull (monotone chain) and, from the first hull
/// vertex whose outgoing slope exceeds the cap, continues with slope `slope_cap`.
pub fn greatest_convex_minorant<S: Scalar>(xs: &[S], ys: &[S], slope_cap: S) -> Vec<S> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the chord from a to i
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= S::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }

    // first hull vertex whose outgoing segment is steeper than the cap
    let anchor = hull
        .windows(2)
        .find(|w| (ys[w[1]] - ys[w[0]]) / (xs[w[1]] - xs[w[0]]) > slope_cap)
        .map(|w| w[0]);

    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 0..n {
        let x = xs[i];
        if let Some(k) = anchor {
            if x >= xs[k] {
                out.push(ys[k] + slope_cap * (x - xs[k]));
                continue;
            }
        }
        while seg + 1 < hull.len() - 1 && xs[hull[seg + 1]] <= x {
            seg += 1;
        }
        if hull.len() == 1 {
            out.push(ys[hull[0]]);
            continue;
        }
        let (a, b) = (hull[seg], hull[seg + 1]);
        if i == a {
            out.push(ys[a]);
        } else if i == b {
            out.push(ys[b]);
        } else {
            let w = (x - xs[a]) / (xs[b] - xs[a]);
            out.push(ys[a] + w * (ys[b] - ys[a]));
        }
    }
    out
}

/// Options for [`truncate_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationOptions<S> {
    /// Simpson panels for the label grid on `[1/n, n]` (densities).
    pub z_intervals: usize,
    /// Times at which the truncated jump size is tabulated.
    pub t_grid: Vec<S>,
}

impl<S: Scalar> Default for TruncationOptions<S> {
    fn default() -> Self {
        Self {
            z_intervals: 64,
            t_grid: vec![S::zero()],
        }
    }
}

/// Replaces a model with a general label measure by the finite-intensity model
/// with measure restricted to `[1/n, n]` and jump size `phi_n`: the greatest
/// convex minorant of `phi` with right slope `<= n` where `phi >= 0`, and the
/// least concave majorant with right slope `>= (1-n)/n` where `phi <= 0`.
/// The origin `(0, 0)` is used as left anchor of the hull.
pub fn truncate_model<S: Scalar>(
    model: &Model<S>,
    n: u32,
    x_grid: &[S],
    options: &TruncationOptions<S>,
) -> Result<Model<S>> {
    if matches!(model.measure, MeasureSpec::LebesgueUnit) {
        return Err(Error::AlreadyFinite);
    }
    if n == 0 {
        return Err(Error::Domain("truncation level n must be positive".into()));
    }
    if x_grid.len() < 2 || !strictly_increasing(x_grid) || !(x_grid[0] > S::zero()) {
        return Err(Error::Domain("x grid must be positive and strictly increasing".into()));
    }
    if options.t_grid.is_empty() || !strictly_increasing(&options.t_grid) {
        return Err(Error::Domain(
            "truncation t grid must be nonempty and strictly increasing".into(),
        ));
    }
    let nn = S::from_u32(n).expect("u32 fits scalar");
    let (lo, hi) = (S::one() / nn, nn);
    let measure = model.measure.restrict(lo, hi)?;

    let mut z_grid: Vec<S> = match &measure {
        MeasureSpec::Density { .. } => measure.quadrature(options.z_intervals)?.nodes,
        MeasureSpec::Atoms { atoms } => {
            let mut zs: Vec<S> = atoms.iter().map(|a| a.0).collect();
            zs.push(lo);
            zs.push(hi);
            zs
        }
        MeasureSpec::LebesgueUnit => unreachable!(),
    };
    z_grid.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
    z_grid.dedup();
    if z_grid.len() < 2 || lo == hi {
        // n = 1: the window is the single label 1
        z_grid = vec![lo, lo + S::epsilon() * S::lit(4.0)];
    }

    let up_cap = nn;
    let down_cap = (nn - S::one()) / nn;
    let mut anchored_x = Vec::with_capacity(x_grid.len() + 1);
    anchored_x.push(S::zero());
    anchored_x.extend_from_slice(x_grid);

    let mut values = Vec::with_capacity(options.t_grid.len());
    for &t in &options.t_grid {
        let mut slice = vec![vec![S::zero(); z_grid.len()]; x_grid.len()];
        for (iz, &z) in z_grid.iter().enumerate() {
            let phi: Vec<S> = x_grid.iter().map(|&x| model.phi.eval(x, t, z)).collect();
            let scale = phi.iter().fold(S::zero(), |m, v| m.max(v.abs()));
            let tol = S::noise_floor() * scale;
            let pos = phi.iter().position(|&v| v > tol);
            let neg = phi.iter().position(|&v| v < -tol);
            let column: Vec<S> = match (pos, neg) {
                (Some(p), Some(q)) => {
                    return Err(Error::MixedSign {
                        t: t.to_f64_(),
                        z: z.to_f64_(),
                        x_neg: x_grid[q].to_f64_(),
                        phi_neg: phi[q].to_f64_(),
                        x_pos: x_grid[p].to_f64_(),
                        phi_pos: phi[p].to_f64_(),
                    })
                }
                (Some(_), None) => {
                    let mut ys = Vec::with_capacity(phi.len() + 1);
                    ys.push(S::zero());
                    ys.extend(phi.iter().map(|v| v.max(S::zero())));
                    greatest_convex_minorant(&anchored_x, &ys, up_cap)[1..].to_vec()
                }
                (None, Some(_)) => {
                    let mut ys = Vec::with_capacity(phi.len() + 1);
                    ys.push(S::zero());
                    ys.extend(phi.iter().map(|v| -v.min(S::zero())));
                    greatest_convex_minorant(&anchored_x, &ys, down_cap)[1..]
                        .iter()
                        .map(|v| -*v)
                        .collect()
                }
                (None, None) => vec![S::zero(); phi.len()],
            };
            for (ix, v) in column.into_iter().enumerate() {
                slice[ix][iz] = v;
            }
        }
        values.push(slice);
    }

    let truncated = Model {
        label: format!("{} [truncated n={n}]", model.label),
        gamma: model.gamma,
        lambda: model.lambda.clone(),
        beta: model.beta.clone(),
        phi: JumpSizeSpec::TabulatedXz {
            x_grid: x_grid.to_vec(),
            z_grid,
            t_grid: options.t_grid.clone(),
            values,
        },
        measure,
    };
    truncated.validate()?;
    Ok(truncated)
}

#[cfg(test)]
mod tests {
    use super::super::{DensitySpec, ZFunction};
    use super::*;

    /// Brute force: best affine minorant with slope `s <= cap` over a dense slope set.
    fn brute_minorant(xs: &[f64], ys: &[f64], cap: f64) -> Vec<f64> {
        let mut slopes: Vec<f64> = (0..=4000)
            .map(|k| -20.0 + k as f64 * 0.005)
            .filter(|s| *s <= cap)
            .collect();
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let s = (ys[j] - ys[i]) / (xs[j] - xs[i]);
                if s <= cap {
                    slopes.push(s);
                }
            }
        }
        slopes.push(cap);
        xs.iter()
            .map(|&x| {
                slopes
                    .iter()
                    .map(|&s| {
                        let b = xs
                            .iter()
                            .zip(ys)
                            .map(|(&xi, &yi)| yi - s * xi)
                            .fold(f64::INFINITY, f64::min);
                        s * x + b
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    #[test]
    fn minorant_matches_brute_force() {
        let xs: Vec<f64> = (0..25).map(|k| k as f64 * 0.2).collect();
        let shapes: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(|x| 2.0 * x),
            Box::new(|x| (x - 2.0).powi(2)),
            Box::new(|x| (3.0 * x).sin() + 1.5 + 0.2 * x * x),
            Box::new(|x| if x < 1.0 { 0.0 } else { (x - 1.0).sqrt() }),
        ];
        for f in &shapes {
            let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            for cap in [0.5, 1.0, 3.0, 100.0] {
                let fast = greatest_convex_minorant(&xs, &ys, cap);
                let slow = brute_minorant(&xs, &ys, cap);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-9, "cap {cap}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn slope_cap_through_origin() {
        // phi = 2x, cap 1, anchored at the origin -> x
        let xs: Vec<f64> = (0..=10).map(|k| k as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let out = greatest_convex_minorant(&xs, &ys, 1.0);
        for (x, v) in xs.iter().zip(out) {
            assert!((v - x).abs() < 1e-14);
        }
    }

    fn density_model(zeta: ZFunction<f64>) -> Model<f64> {
        Model {
            phi: JumpSizeSpec::RelativeOfZ { zeta },
            measure: MeasureSpec::Density {
                density: DensitySpec::PowerLaw { scale: 0.2, alpha: 0.5 },
                window: None,
            },
            ..Model::relative_jump("dens", 0.2, 0.0, 1.0)
        }
    }

    #[test]
    fn linear_jumps_with_admissible_slope_are_unchanged() {
        let xs: Vec<f64> = (1..=50).map(|k| k as f64 * 0.1).collect();
        let m = density_model(ZFunction::Saturating { c: 0.5, rate: 1.0 });
        let t = truncate_model(&m, 4, &xs, &TruncationOptions::default()).unwrap();
        assert!(t.is_finite_activity());
        for &z in &[0.25, 0.5, 1.0, 3.9] {
            for &x in &xs {
                let a = t.phi.eval(x, 0.0, z);
                let b = m.phi.eval(x, 0.0, z);
                // interpolation in z between label nodes is the only difference
                assert!((a - b).abs() < 2e-3 * x, "z={z} x={x}: {a} vs {b}");
            }
        }
        // exactly equal at label nodes
        let JumpSizeSpec::TabulatedXz { z_grid, .. } = &t.phi else {
            panic!()
        };
        for &z in z_grid {
            for &x in &xs {
                assert!((t.phi.eval(x, 0.0, z) - m.phi.eval(x, 0.0, z)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn labels_outside_window_do_not_jump() {
        let xs: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25).collect();
        let m = density_model(ZFunction::constant(0.3));
        let t = truncate_model(&m, 4, &xs, &TruncationOptions::default()).unwrap();
        for &x in &xs {
            assert_eq!(t.phi.eval(x, 0.0, 0.2), 0.0);
            assert_eq!(t.phi.eval(x, 0.0, 5.0), 0.0);
        }
    }

    #[test]
    fn steep_jump_is_clamped() {
        let xs: Vec<f64> = (1..=40).map(|k| k as f64 * 0.1).collect();
        let m = density_model(ZFunction::constant(2.0));
        let t = truncate_model(&m, 1, &xs, &TruncationOptions::default()).unwrap();
        for &x in &xs {
            assert!((t.phi.eval(x, 0.0, 1.0) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_branch_respects_lower_slope() {
        let xs: Vec<f64> = (1..=40).map(|k| k as f64 * 0.1).collect();
        let m = density_model(ZFunction::constant(-0.9));
        let n = 4;
        let t = truncate_model(&m, n, &xs, &TruncationOptions::default()).unwrap();
        let floor = (1.0 - n as f64) / n as f64;
        for &x in &xs {
            let v = t.phi.eval(x, 0.0, 1.0);
            assert!(v <= 0.0 && v >= -0.9 * x - 1e-12);
            // right slope from the origin is at least (1-n)/n
            assert!((v - floor * x).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let xs = vec![0.5, 1.0, 1.5];
        let unit = Model::<f64>::relative_jump("u", 0.2, 0.1, 1.0);
        assert_eq!(
            truncate_model(&unit, 2, &xs, &TruncationOptions::default()),
            Err(Error::AlreadyFinite)
        );
        let mixed = density_model(ZFunction::Affine { a: -1.0, b: 1.0 });
        let mixed = Model {
            phi: JumpSizeSpec::Separable {
                psi: super::super::CoefficientSpec::PiecewiseX {
                    knots: vec![(0.5, -1.0), (1.5, 1.0)],
                },
                zeta: ZFunction::constant(1.0),
            },
            ..mixed
        };
        assert!(matches!(
            truncate_model(&mixed, 2, &xs, &TruncationOptions::default()),
            Err(Error::MixedSign { .. })
        ));
        let m = density_model(ZFunction::constant(0.1));
        assert!(truncate_model(&m, 2, &[1.0, 0.5], &TruncationOptions::default()).is_err());
    }
}
