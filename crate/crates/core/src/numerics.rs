//! Small numerical kernels: bracketing, interpolation, quadrature rules,
//! nonuniform difference stencils and a tridiagonal solver.

use crate::scalar::Scalar;

/// Index `i` with `xs[i] <= x < xs[i+1]`, clamped to `[0, len-2]`.
/// `xs` must be strictly increasing with at least two entries.
pub fn bracket<S: Scalar>(xs: &[S], x: S) -> usize {
    debug_assert!(xs.len() >= 2);
    let n = xs.len();
    if x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    // partition_point returns the first index with xs[i] > x
    let p = xs.partition_point(|&v| v <= x);
    p.saturating_sub(1).min(n - 2)
}

/// How to continue a piecewise-linear table outside its knot range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    Flat,
    Linear,
}

/// Piecewise-linear interpolation of `(xs, ys)` at `x`.
pub fn interp_linear<S: Scalar>(xs: &[S], ys: &[S], x: S, extrapolation: Extrapolation) -> S {
    debug_assert_eq!(xs.len(), ys.len());
    match xs.len() {
        0 => S::zero(),
        1 => ys[0],
        n => {
            if extrapolation == Extrapolation::Flat {
                if x <= xs[0] {
                    return ys[0];
                }
                if x >= xs[n - 1] {
                    return ys[n - 1];
                }
            }
            let i = bracket(xs, x);
            let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
            ys[i] + w * (ys[i + 1] - ys[i])
        }
    }
}

/// Returns `true` when `xs` is strictly increasing and finite.
pub fn strictly_increasing<S: Scalar>(xs: &[S]) -> bool {
    xs.iter().all(|v| v.is_finite()) && xs.windows(2).all(|w| w[0] < w[1])
}

/// Composite Simpson nodes and weights on `[a, b]`.
///
/// `intervals` is rounded up to the next even number, so the rule has
/// `intervals + 1` (odd) nodes.
pub fn simpson<S: Scalar>(a: S, b: S, intervals: usize) -> Vec<(S, S)> {
    let mut n = intervals.max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / S::from_usize_(n);
    let third = h / S::lit(3.0);
    (0..=n)
        .map(|k| {
            let z = if k == n { b } else { a + h * S::from_usize_(k) };
            let w = if k == 0 || k == n {
                third
            } else if k % 2 == 1 {
                third * S::lit(4.0)
            } else {
                third * S::lit(2.0)
            };
            (z, w)
        })
        .collect()
}

/// Composite Simpson in `s = ln z` on `[a, b] ⊂ (0, ∞)`; weights include the
/// Jacobian `z`, so `Σ w f(z) ≈ ∫ f(z) dz`.
pub fn simpson_log<S: Scalar>(a: S, b: S, intervals: usize) -> Vec<(S, S)> {
    let rule = simpson(a.ln(), b.ln(), intervals);
    let last = rule.len() - 1;
    rule.into_iter()
        .enumerate()
        .map(|(k, (s, w))| {
            // pin the end nodes so window bounds are reproduced exactly
            let z = if k == 0 {
                a
            } else if k == last {
                b
            } else {
                s.exp()
            };
            (z, w * z)
        })
        .collect()
}

/// Three-point weights `(w_minus, w_centre, w_plus)` for the second derivative
/// on a nonuniform stencil with left spacing `hm` and right spacing `hp`.
#[inline]
pub fn second_diff_weights<S: Scalar>(hm: S, hp: S) -> (S, S, S) {
    let two = S::lit(2.0);
    let wm = two / (hm * (hm + hp));
    let wp = two / (hp * (hm + hp));
    (wm, -(wm + wp), wp)
}

/// Three-point weights for the (second-order) central first derivative on a
/// nonuniform stencil.
#[inline]
pub fn first_diff_weights<S: Scalar>(hm: S, hp: S) -> (S, S, S) {
    let wm = -hp / (hm * (hm + hp));
    let wp = hm / (hp * (hm + hp));
    let wc = (hp - hm) / (hm * hp);
    (wm, wc, wp)
}

/// Nonuniform second difference of `u` at interior node `i` of `xs`.
#[inline]
pub fn second_difference<S: Scalar>(xs: &[S], u: &[S], i: usize) -> S {
    let (wm, wc, wp) = second_diff_weights(xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
    wm * u[i - 1] + wc * u[i] + wp * u[i + 1]
}

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[0]` and `upper[n-1]` are ignored. Returns `None` on a zero pivot.
pub fn solve_tridiagonal<S: Scalar>(lower: &[S], diag: &[S], upper: &[S], rhs: &[S]) -> Option<Vec<S>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![S::zero(); n];
    let mut d = vec![S::zero(); n];
    let mut beta = diag[0];
    if beta == S::zero() {
        return None;
    }
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == S::zero() || !beta.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / beta } else { S::zero() };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - c[i] * next;
    }
    Some(x)
}

/// Sum in a fixed pairwise order, independent of how values were produced.
pub fn pairwise_sum<S: Scalar>(values: &[S]) -> S {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().fold(S::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
