//! Piecewise Hermite interpolation helpers.

/// Quintic Hermite interpolant on one interval of width `h` in local
/// coordinate `t` in [0, 1], matching value, slope and curvature at both ends.
///
/// Returns `(value, slope, curvature)` in the original variable.
#[inline]
pub(crate) fn quintic(left: [f64; 3], right: [f64; 3], h: f64, t: f64) -> [f64; 3] {
    let [p0, m0, a0] = left;
    let [p1, m1, a1] = right;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;

    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);

    let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let d3 = -d0;
    let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);

    let e0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    let e1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    let e2 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
    let e3 = -e0;
    let e4 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    let e5 = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);

    let hh = h * h;
    let value = h0 * p0 + h * h1 * m0 + hh * h2 * a0 + h3 * p1 + h * h4 * m1 + hh * h5 * a1;
    let slope = (d0 * p0 + h * d1 * m0 + hh * d2 * a0 + d3 * p1 + h * d4 * m1 + hh * d5 * a1) / h;
    let curv = (e0 * p0 + h * e1 * m0 + hh * e2 * a0 + e3 * p1 + h * e4 * m1 + hh * e5 * a1) / hh;
    [value, slope, curv]
}

/// Index `i` with `xs[i] <= x <= xs[i + 1]`, clamped to the valid range.
#[inline]
pub(crate) fn bracket_index(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let last = xs.len() - 2;
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(last),
        Err(0) => 0,
        Err(i) => (i - 1).min(last),
    }
}

/// Four-point Lagrange interpolation on an increasing (not necessarily
/// uniform) abscissa.
pub(crate) fn local_cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n < 4 {
        let i = bracket_index(xs, x);
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return ys[i] + t * (ys[i + 1] - ys[i]);
    }
    let i = bracket_index(xs, x);
    let start = i.saturating_sub(1).min(n - 4);
    let mut acc = 0.0;
    for j in start..start + 4 {
        let mut w = 1.0;
        for k in start..start + 4 {
            if k != j {
                w *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += w * ys[j];
    }
    acc
}
