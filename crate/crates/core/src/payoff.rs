//! Terminal contract functions `g(X(T))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::strictly_increasing;
use crate::scalar::Scalar;

/// A European contract function.
///
/// CLI syntax (see [`FromStr`]): `call:K=1.0`, `put:K=1.0`, `linear:a=1,b=0`,
/// `power:p=2,c=1`, `pwl:0:0,1:1,2:1.5`, `sput:K=1.0,eps=0.01`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "S: Scalar")]
pub enum Payoff<S> {
    Call {
        strike: S,
    },
    Put {
        strike: S,
    },
    /// `slope * x + intercept`
    Linear {
        slope: S,
        intercept: S,
    },
    /// `scale * x^exponent`, `exponent >= 1`
    Power {
        exponent: S,
        scale: S,
    },
    /// Through `(x, value)` knots, continued with `left_slope` / `right_slope`.
    PiecewiseLinear {
        knots: Vec<(S, S)>,
        left_slope: S,
        right_slope: S,
    },
    /// Put with the kink replaced by a quadratic on `[strike - eps, strike + eps]`.
    SmoothedPut {
        strike: S,
        eps: S,
    },
}

impl<S: Scalar> Payoff<S> {
    /// Piecewise-linear payoff extrapolated with its end-segment slopes.
    pub fn piecewise(knots: Vec<(S, S)>) -> Result<Self> {
        let slope = |a: (S, S), b: (S, S)| (b.1 - a.1) / (b.0 - a.0);
        let (left_slope, right_slope) = match knots.len() {
            0 => return Err(Error::InvalidSpec("piecewise payoff needs at least one knot".into())),
            1 => (S::zero(), S::zero()),
            n => (slope(knots[0], knots[1]), slope(knots[n - 2], knots[n - 1])),
        };
        let p = Self::PiecewiseLinear {
            knots,
            left_slope,
            right_slope,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Call { strike } | Self::Put { strike } => strike.is_finite() && *strike >= S::zero(),
            Self::Linear { slope, intercept } => slope.is_finite() && intercept.is_finite(),
            Self::Power { exponent, scale } => *exponent >= S::one() && exponent.is_finite() && scale.is_finite(),
            Self::PiecewiseLinear {
                knots,
                left_slope,
                right_slope,
            } => {
                let xs: Vec<S> = knots.iter().map(|k| k.0).collect();
                !knots.is_empty()
                    && strictly_increasing(&xs)
                    && knots.iter().all(|k| k.1.is_finite())
                    && left_slope.is_finite()
                    && right_slope.is_finite()
            }
            Self::SmoothedPut { strike, eps } => strike.is_finite() && *eps >= S::zero() && eps.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("invalid payoff {self}")))
        }
    }

    /// `g(x)` without the domain check; used on solver grids.
    pub fn value(&self, x: S) -> S {
        match self {
            Self::Call { strike } => (x - *strike).max(S::zero()),
            Self::Put { strike } => (*strike - x).max(S::zero()),
            Self::Linear { slope, intercept } => *slope * x + *intercept,
            Self::Power { exponent, scale } => *scale * x.powf(*exponent),
            Self::PiecewiseLinear {
                knots,
                left_slope,
                right_slope,
            } => {
                let n = knots.len();
                if x <= knots[0].0 {
                    knots[0].1 + *left_slope * (x - knots[0].0)
                } else if x >= knots[n - 1].0 {
                    knots[n - 1].1 + *right_slope * (x - knots[n - 1].0)
                } else {
                    let i = knots.partition_point(|k| k.0 <= x) - 1;
                    let (a, b) = (knots[i], knots[i + 1]);
                    a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0)
                }
            }
            Self::SmoothedPut { strike, eps } => {
                let d = *strike - x;
                if *eps == S::zero() || d.abs() >= *eps {
                    d.max(S::zero())
                } else {
                    let u = d + *eps;
                    u * u / (S::lit(4.0) * *eps)
                }
            }
        }
    }

    /// `g(x)` for `x > 0`.
    pub fn eval(&self, x: S) -> Result<S> {
        if !(x > S::zero()) || !x.is_finite() {
            return Err(Error::Domain(format!("payoff argument must be positive, got {x}")));
        }
        Ok(self.value(x))
    }

    /// Natural price level of the contract (strike or central kink), if any.
    pub fn reference_level(&self) -> Option<S> {
        match self {
            Self::Call { strike } | Self::Put { strike } | Self::SmoothedPut { strike, .. } => Some(*strike),
            Self::PiecewiseLinear { knots, .. } => knots.get(knots.len() / 2).map(|k| k.0),
            Self::Linear { .. } | Self::Power { .. } => None,
        }
    }

    /// Declared polynomial growth degree.
    pub fn growth_degree(&self) -> S {
        match self {
            Self::Put { .. } | Self::SmoothedPut { .. } => S::zero(),
            Self::Call { .. } => S::one(),
            Self::Linear { slope, .. } => {
                if *slope == S::zero() {
                    S::zero()
                } else {
                    S::one()
                }
            }
            Self::Power { exponent, scale } => {
                if *scale == S::zero() {
                    S::zero()
                } else {
                    *exponent
                }
            }
            Self::PiecewiseLinear { right_slope, .. } => {
                if *right_slope == S::zero() {
                    S::zero()
                } else {
                    S::one()
                }
            }
        }
    }

    /// Fits `C` in `|g(x)| <= C (1 + x^degree)` on log-spaced samples of
    /// `[1, 1e6]`. Returns `None` when the ratio still grows over the last
    /// decade, i.e. the declared degree is too small.
    pub fn growth_constant(&self) -> Option<S> {
        let d = self.growth_degree();
        let ratio = |x: S| self.value(x).abs() / (S::one() + x.powf(d));
        let samples: Vec<S> = (0..=120).map(|k| S::lit(10f64.powf(k as f64 / 20.0))).collect();
        let c = samples.iter().map(|&x| ratio(x)).fold(S::zero(), S::max);
        let tail = ratio(S::lit(1e6));
        let prev = ratio(S::lit(1e5));
        if c.is_finite() && tail <= prev * S::lit(1.01) + S::lit(1e-12) {
            Some(c)
        } else {
            None
        }
    }

    /// Convexity of `g`, with a witness knot where the slope decreases.
    pub fn is_convex(&self) -> (bool, Option<S>) {
        match self {
            Self::Call { .. } | Self::Put { .. } | Self::SmoothedPut { .. } => (true, None),
            Self::Linear { .. } => (true, None),
            Self::Power { exponent, scale } => {
                if *scale >= S::zero() || *exponent == S::one() {
                    (true, None)
                } else {
                    (false, Some(S::one()))
                }
            }
            Self::PiecewiseLinear {
                knots,
                left_slope,
                right_slope,
            } => {
                let mut slopes = Vec::with_capacity(knots.len() + 1);
                slopes.push(*left_slope);
                for w in knots.windows(2) {
                    slopes.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
                }
                slopes.push(*right_slope);
                let tol = S::noise_floor();
                for (k, s) in slopes.windows(2).enumerate() {
                    if s[1] < s[0] - tol * (S::one() + s[0].abs()) {
                        return (false, Some(knots[k].0));
                    }
                }
                (true, None)
            }
        }
    }
}

/// `is_convex` as a free function.
pub fn is_convex_payoff<S: Scalar>(g: &Payoff<S>) -> (bool, Option<S>) {
    g.is_convex()
}

impl<S: Scalar> fmt::Display for Payoff<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Call { strike } => write!(f, "call:K={strike}"),
            Self::Put { strike } => write!(f, "put:K={strike}"),
            Self::Linear { slope, intercept } => write!(f, "linear:a={slope},b={intercept}"),
            Self::Power { exponent, scale } => write!(f, "power:p={exponent},c={scale}"),
            Self::PiecewiseLinear { knots, .. } => {
                let parts: Vec<String> = knots.iter().map(|(x, v)| format!("{x}:{v}")).collect();
                write!(f, "pwl:{}", parts.join(","))
            }
            Self::SmoothedPut { strike, eps } => write!(f, "sput:K={strike},eps={eps}"),
        }
    }
}

fn parse_num<S: Scalar>(text: &str) -> Result<S> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: '{text}'")))?;
    S::from_f64(v).ok_or_else(|| Error::Parse(format!("number out of range: '{text}'")))
}

fn parse_fields<S: Scalar>(body: &str, names: &[&str]) -> Result<Vec<S>> {
    let mut out = vec![None; names.len()];
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
        let idx = names
            .iter()
            .position(|n| *n == key.trim())
            .ok_or_else(|| Error::Parse(format!("unknown payoff field '{}'", key.trim())))?;
        out[idx] = Some(parse_num(value)?);
    }
    out.into_iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| Error::Parse(format!("missing payoff field '{n}'"))))
        .collect()
}

impl<S: Scalar> FromStr for Payoff<S> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("payoff '{s}' lacks a kind prefix")))?;
        let payoff = match kind.trim() {
            "call" => {
                let v = parse_fields(body, &["K"])?;
                Self::Call { strike: v[0] }
            }
            "put" => {
                let v = parse_fields(body, &["K"])?;
                Self::Put { strike: v[0] }
            }
            "linear" => {
                let v = parse_fields(body, &["a", "b"])?;
                Self::Linear {
                    slope: v[0],
                    intercept: v[1],
                }
            }
            "power" => {
                let v = parse_fields(body, &["p", "c"])?;
                Self::Power {
                    exponent: v[0],
                    scale: v[1],
                }
            }
            "sput" => {
                let v = parse_fields(body, &["K", "eps"])?;
                Self::SmoothedPut {
                    strike: v[0],
                    eps: v[1],
                }
            }
            "pwl" => {
                let knots = body
                    .split(',')
                    .map(|pair| {
                        let (x, v) = pair
                            .split_once(':')
                            .ok_or_else(|| Error::Parse(format!("pwl knot '{pair}' must be x:value")))?;
                        Ok((parse_num(x)?, parse_num(v)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Self::piecewise(knots);
            }
            other => return Err(Error::Parse(format!("unknown payoff kind '{other}'"))),
        };
        payoff.validate()?;
        Ok(payoff)
    }
}
