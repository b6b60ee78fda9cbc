//! Sampling-based checks of the structural conditions on a model.
//!
//! Every condition is evaluated on a finite sample cloud; the report records
//! the cloud so that a pass is never mistaken for a proof.

use serde::{Deserialize, Serialize};

use super::{MeasureSpec, Model};
use crate::error::{Error, Result};
use crate::numerics::simpson_log;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// Sample point at which a condition was found violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Witness<S> {
    pub x: S,
    pub t: S,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ConditionEntry<S> {
    pub status: ConditionStatus,
    /// Smallest constant `C` (or, for M4, the largest admissible `gamma`) on the samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<S>>,
    /// Amount by which the inequality fails at the witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<S>,
    pub note: String,
}

impl<S: Scalar> ConditionEntry<S> {
    fn pass(constant: Option<S>, note: impl Into<String>) -> Self {
        Self {
            status: ConditionStatus::Pass,
            constant,
            witness: None,
            violation: None,
            note: note.into(),
        }
    }

    fn fail(constant: Option<S>, witness: Witness<S>, violation: S, note: impl Into<String>) -> Self {
        Self {
            status: ConditionStatus::Fail,
            constant,
            witness: Some(witness),
            violation: Some(violation),
            note: note.into(),
        }
    }

    fn not_applicable(note: impl Into<String>) -> Self {
        Self {
            status: ConditionStatus::NotApplicable,
            constant: None,
            witness: None,
            violation: None,
            note: note.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == ConditionStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == ConditionStatus::Fail
    }
}

/// Sample cloud used for a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Resolution<S> {
    pub n_x: usize,
    pub n_t: usize,
    pub n_z: usize,
    pub x_min: S,
    pub x_max: S,
    /// Smallest gap between consecutive x samples.
    pub min_dx: S,
    /// Label window used for integrals against `m` (general-measure conditions).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_window: Option<(S, S)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ConditionReport<S> {
    pub model: String,
    /// Relative tolerance for the discrete inequalities.
    pub tolerance: S,
    pub resolution: Resolution<S>,
    pub m2: ConditionEntry<S>,
    pub m3: ConditionEntry<S>,
    pub m4: ConditionEntry<S>,
    pub erlander: ConditionEntry<S>,
    pub palme: ConditionEntry<S>,
    pub g2: ConditionEntry<S>,
    pub g3: ConditionEntry<S>,
    pub g5: ConditionEntry<S>,
}

impl<S: Scalar> ConditionReport<S> {
    pub fn entries(&self) -> [(&'static str, &ConditionEntry<S>); 8] {
        [
            ("M2", &self.m2),
            ("M3", &self.m3),
            ("M4", &self.m4),
            ("erlander", &self.erlander),
            ("palme", &self.palme),
            ("G2", &self.g2),
            ("G3", &self.g3),
            ("G5", &self.g5),
        ]
    }
}

/// Worst (most negative) normalised convexity gap on one `x`-slice.
struct ShapeScan<S> {
    /// First adjacent pair where the sign flips: (x_neg, phi_neg, x_pos, phi_pos).
    sign_change: Option<(S, S, S, S)>,
    /// (x, violation) of the worst erlander breach.
    erlander: Option<(S, S)>,
    /// (x, violation) of the worst `phi_xx * phi < 0` breach.
    palme: Option<(S, S)>,
}

fn scan_shape<S: Scalar>(xs: &[S], f: &[S], rel_tol: S) -> ShapeScan<S> {
    let scale = f.iter().fold(S::zero(), |m, v| m.max(v.abs()));
    let sign_tol = rel_tol * scale;
    let mut sign_change = None;
    let (mut pos, mut neg) = (None, None);
    for (i, &v) in f.iter().enumerate() {
        if v > sign_tol && pos.is_none() {
            pos = Some(i);
        }
        if v < -sign_tol && neg.is_none() {
            neg = Some(i);
        }
    }
    if let (Some(p), Some(n)) = (pos, neg) {
        sign_change = Some((xs[n], f[n], xs[p], f[p]));
    }

    let mut erlander: Option<(S, S)> = None;
    let mut palme: Option<(S, S)> = None;
    for i in 1..xs.len().saturating_sub(1) {
        let (hm, hp) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        // chord through the neighbours minus the value: >= 0 iff locally convex
        let gap = (hp * f[i - 1] + hm * f[i + 1]) / (hm + hp) - f[i];
        let local = f[i - 1].abs().max(f[i].abs()).max(f[i + 1].abs());
        let tol = rel_tol * local.max(S::min_positive_value());
        let breach = if f[i] > sign_tol {
            -gap
        } else if f[i] < -sign_tol {
            gap
        } else {
            S::zero()
        };
        if breach > tol && erlander.is_none_or(|(_, v)| breach > v) {
            erlander = Some((xs[i], breach));
        }
        // palme uses the signed product directly
        let product = -gap * f[i].signum();
        if f[i] != S::zero() && product > tol && palme.is_none_or(|(_, v)| product > v) {
            palme = Some((xs[i], product));
        }
    }
    ShapeScan {
        sign_change,
        erlander,
        palme,
    }
}

/// Checks (M2)–(M4), the convexity conditions on `phi` and, for general label
/// measures, (G2), (G3), (G5) on the given sample cloud.
pub fn check_conditions<S: Scalar>(
    model: &Model<S>,
    x_samples: &[S],
    t_samples: &[S],
    z_samples: &[S],
) -> Result<ConditionReport<S>> {
    if x_samples.is_empty() || t_samples.is_empty() || z_samples.is_empty() {
        return Err(Error::Domain("sample lists must be nonempty".into()));
    }
    if x_samples.iter().any(|x| !(*x > S::zero()) || !x.is_finite()) {
        return Err(Error::Domain("x samples must be positive".into()));
    }
    if let Some(z) = z_samples.iter().find(|z| !model.measure.contains(**z)) {
        return Err(Error::Domain(format!("z sample {z} outside the label space")));
    }
    let mut xs = x_samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    xs.dedup();
    let rel_tol = S::lit(1e-9);
    let min_dx = xs.windows(2).map(|w| w[1] - w[0]).fold(S::infinity(), S::min);

    // (M2) and (M4) pointwise, (M3) on adjacent pairs.
    let mut m2_c = S::zero();
    let mut m2_bad: Option<Witness<S>> = None;
    let mut m3_c = S::zero();
    let mut m3_bad: Option<Witness<S>> = None;
    let mut m4_ratio = S::infinity();
    let mut m4_worst: Option<(Witness<S>, S)> = None;
    for &t in t_samples {
        let beta: Vec<S> = xs.iter().map(|&x| model.beta.eval(x, t)).collect();
        for &z in z_samples {
            let phi: Vec<S> = xs.iter().map(|&x| model.phi.eval(x, t, z)).collect();
            for (i, &x) in xs.iter().enumerate() {
                let w = Witness { x, t, z: Some(z) };
                let r = (beta[i] * beta[i] + phi[i] * phi[i]) / (x * x);
                if !r.is_finite() {
                    m2_bad.get_or_insert(w);
                } else {
                    m2_c = m2_c.max(r);
                }
                m4_ratio = m4_ratio.min(phi[i] / x);
                let slack = phi[i] - model.gamma * x;
                if slack < -rel_tol * x && m4_worst.is_none_or(|(_, v)| -slack > v) {
                    m4_worst = Some((w, -slack));
                }
                if i > 0 {
                    let l = ((beta[i] - beta[i - 1]).abs() + (phi[i] - phi[i - 1]).abs()) / (x - xs[i - 1]);
                    if !l.is_finite() {
                        m3_bad.get_or_insert(w);
                    } else {
                        m3_c = m3_c.max(l);
                    }
                }
            }
        }
    }
    let m2 = match m2_bad {
        None => ConditionEntry::pass(Some(m2_c), "beta^2 + phi^2 <= C x^2 on samples"),
        Some(w) => ConditionEntry::fail(None, w, S::infinity(), "non-finite coefficient ratio"),
    };
    let m3 = match m3_bad {
        None => ConditionEntry::pass(Some(m3_c), "Lipschitz constant over adjacent x samples"),
        Some(w) => ConditionEntry::fail(None, w, S::infinity(), "non-finite difference quotient"),
    };
    let m4 = match m4_worst {
        None => ConditionEntry::pass(Some(m4_ratio), "phi > gamma x; constant is min phi/x on samples"),
        Some((w, v)) => ConditionEntry::fail(Some(m4_ratio), w, v, "phi <= gamma x at witness"),
    };

    // shape conditions on phi, slice by slice
    let (erlander, palme) = if xs.len() < 3 {
        (
            ConditionEntry::not_applicable("fewer than 3 distinct x samples; second differences unavailable"),
            ConditionEntry::not_applicable("fewer than 3 distinct x samples; second differences unavailable"),
        )
    } else {
        let mut sign_witness: Option<(Witness<S>, S)> = None;
        let mut erl_worst: Option<(Witness<S>, S)> = None;
        let mut palme_worst: Option<(Witness<S>, S)> = None;
        for &t in t_samples {
            for &z in z_samples {
                let phi: Vec<S> = xs.iter().map(|&x| model.phi.eval(x, t, z)).collect();
                let scan = scan_shape(&xs, &phi, rel_tol);
                if let Some((x_neg, phi_neg, _, phi_pos)) = scan.sign_change {
                    if sign_witness.is_none() {
                        sign_witness = Some((
                            Witness {
                                x: x_neg,
                                t,
                                z: Some(z),
                            },
                            phi_pos.min(-phi_neg),
                        ));
                    }
                }
                if let Some((x, v)) = scan.erlander {
                    if erl_worst.is_none_or(|(_, w)| v > w) {
                        erl_worst = Some((Witness { x, t, z: Some(z) }, v));
                    }
                }
                if let Some((x, v)) = scan.palme {
                    if palme_worst.is_none_or(|(_, w)| v > w) {
                        palme_worst = Some((Witness { x, t, z: Some(z) }, v));
                    }
                }
            }
        }
        let erlander = match (sign_witness, erl_worst) {
            (Some((w, v)), _) => ConditionEntry::fail(None, w, v, "phi changes sign in x at fixed (t, z)"),
            (None, Some((w, v))) => ConditionEntry::fail(
                None,
                w,
                v,
                "phi not convex where positive (or not concave where negative)",
            ),
            (None, None) => ConditionEntry::pass(
                None,
                "discrete convexity of phi where positive, concavity where negative",
            ),
        };
        let palme = match palme_worst {
            Some((w, v)) => ConditionEntry::fail(None, w, v, "phi_xx * phi < 0 at witness"),
            None => ConditionEntry::pass(None, "phi_xx * phi >= 0 by central second differences"),
        };
        (erlander, palme)
    };

    // integrability conditions against a general label measure
    let z_window = match &model.measure {
        MeasureSpec::LebesgueUnit => None,
        m => m.finite_window().or_else(|| {
            let lo = z_samples.iter().copied().fold(S::infinity(), S::min);
            let hi = z_samples.iter().copied().fold(S::neg_infinity(), S::max);
            Some((lo, hi))
        }),
    };
    let (g2, g3, g5) = match (&model.measure, z_window) {
        (MeasureSpec::LebesgueUnit, _) | (_, None) => {
            let na = "unit label measure: implied by (M2)";
            (
                ConditionEntry::not_applicable(na),
                ConditionEntry::not_applicable(na),
                ConditionEntry::not_applicable(na),
            )
        }
        (measure, Some((a, b))) => {
            let rule: Vec<(S, S)> = match measure {
                MeasureSpec::Atoms { atoms } => atoms.clone(),
                MeasureSpec::Density { density, .. } => {
                    if b > a {
                        simpson_log(a, b, 256)
                            .into_iter()
                            .map(|(z, w)| (z, w * density.eval(z)))
                            .collect()
                    } else {
                        Vec::new()
                    }
                }
                MeasureSpec::LebesgueUnit => unreachable!(),
            };
            general_conditions(model, &xs, t_samples, &rule)
        }
    };

    Ok(ConditionReport {
        model: model.label.clone(),
        tolerance: rel_tol,
        resolution: Resolution {
            n_x: xs.len(),
            n_t: t_samples.len(),
            n_z: z_samples.len(),
            x_min: xs[0],
            x_max: xs[xs.len() - 1],
            min_dx: if min_dx.is_finite() { min_dx } else { S::zero() },
            z_window,
        },
        m2,
        m3,
        m4,
        erlander,
        palme,
        g2,
        g3,
        g5,
    })
}

fn general_conditions<S: Scalar>(
    model: &Model<S>,
    xs: &[S],
    ts: &[S],
    rule: &[(S, S)],
) -> (ConditionEntry<S>, ConditionEntry<S>, ConditionEntry<S>) {
    let integrate = |f: &dyn Fn(S) -> S| rule.iter().fold(S::zero(), |acc, &(z, w)| acc + w * f(z));
    let mut g2_c = S::zero();
    let mut g3_c = S::zero();
    let mut g5_c = S::zero();
    let mut bad: [Option<Witness<S>>; 3] = [None; 3];
    for &t in ts {
        for (i, &x) in xs.iter().enumerate() {
            let w = Witness { x, t, z: None };
            let b = model.beta.eval(x, t);
            let r2 = (b * b + integrate(&|z| model.phi.eval(x, t, z).powi(2))) / (x * x);
            if r2.is_finite() {
                g2_c = g2_c.max(r2);
            } else {
                bad[0].get_or_insert(w);
            }
            if i > 0 {
                let y = xs[i - 1];
                let db = b - model.beta.eval(y, t);
                let num = db * db + integrate(&|z| (model.phi.eval(x, t, z) - model.phi.eval(y, t, z)).powi(2));
                let r3 = num / ((x - y) * (x - y));
                if r3.is_finite() {
                    g3_c = g3_c.max(r3);
                } else {
                    bad[1].get_or_insert(w);
                }
            }
            for p in 1..=8 {
                let r5 = integrate(&|z| model.phi.eval(x, t, z).abs().powi(p)) / (S::one() + x.powi(p));
                if r5.is_finite() {
                    g5_c = g5_c.max(r5);
                } else {
                    bad[2].get_or_insert(w);
                }
            }
        }
    }
    let entry = |c: S, bad: Option<Witness<S>>, note: &str| match bad {
        None => ConditionEntry::pass(Some(c), note),
        Some(w) => ConditionEntry::fail(None, w, S::infinity(), "non-finite integral against m"),
    };
    (
        entry(g2_c, bad[0], "beta^2 + ∫phi^2 dm <= C x^2 on samples"),
        entry(g3_c, bad[1], "(Δbeta)^2 + ∫(Δphi)^2 dm <= C (Δx)^2 on adjacent samples"),
        entry(g5_c, bad[2], "max over p=1..8 of ∫|phi|^p dm / (1 + x^p)"),
    )
}
