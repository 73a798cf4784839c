//! Shared test fixtures and an independent classical vortex solver.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use tcgl_core::model::{CouplingParameters, ProblemSpec};
use tcgl_core::shoot::{fixed_point_solve, ProfileSolution, SolverControls};

/// Single-condensate configuration whose condensate stays empty.
pub fn crit3() -> (CouplingParameters, ProblemSpec) {
    (CouplingParameters::new(2.0, 2.0, 1.5, 1.0), ProblemSpec::one_vev(1).unwrap())
}

/// Single-condensate configuration with a condensate in the core.
pub fn condensing() -> (CouplingParameters, ProblemSpec) {
    (CouplingParameters::new(1.0, 2.0, 1.4, 1.2), ProblemSpec::one_vev(1).unwrap())
}

pub fn decoupled() -> (CouplingParameters, ProblemSpec) {
    (CouplingParameters::new(1.0, 1.0, 0.0, 1.0), ProblemSpec::two_vev(1, 1).unwrap())
}

pub fn generic() -> (CouplingParameters, ProblemSpec) {
    (CouplingParameters::new(2.0, 2.0, 1.0, 1.5), ProblemSpec::two_vev(1, 1).unwrap())
}

pub fn solve(p: (CouplingParameters, ProblemSpec), r_max: Option<f64>) -> ProfileSolution {
    let mut c = SolverControls::default();
    c.r_max = r_max;
    fixed_point_solve(&p.0, &p.1, &c).expect("solve")
}

/// Classical profile `f'' + f'/r - n^2 f / r^2 = beta f (f^2 - 1)` on `[0, r_max]`
/// with spacing `h`.
#[derive(Debug, Clone)]
pub struct ClassicalGl {
    pub h: f64,
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub d0: f64,
}

/// `1 - a/R^2 - c/R^4` from substituting the expansion into the equation.
fn far_value(beta: f64, n: u32, r: f64) -> f64 {
    let n2 = f64::from(n * n);
    let a = n2 / (2.0 * beta);
    let c = (4.0 * a - n2 * a + 3.0 * beta * a * a) / (2.0 * beta);
    1.0 - a / (r * r) - c / r.powi(4)
}

/// Second-order central differences solved by Newton with a tridiagonal Jacobian.
fn fd_solve(beta: f64, n: u32, r_max: f64, intervals: usize) -> Vec<f64> {
    let h = r_max / intervals as f64;
    let n2 = f64::from(n * n);
    let r = |i: usize| i as f64 * h;
    let mut f: Vec<f64> = (0..=intervals).map(|i| r(i).tanh().powi(n as i32)).collect();
    f[0] = 0.0;
    f[intervals] = far_value(beta, n, r_max);
    let m = intervals - 1;
    let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for _ in 0..50 {
        for k in 0..m {
            let i = k + 1;
            let ri = r(i);
            let (fm, f0, fp) = (f[i - 1], f[i], f[i + 1]);
            rhs[k] = -((fp - 2.0 * f0 + fm) / (h * h) + (fp - fm) / (2.0 * h * ri) - n2 * f0 / (ri * ri)
                - beta * f0 * (f0 * f0 - 1.0));
            lo[k] = 1.0 / (h * h) - 1.0 / (2.0 * h * ri);
            up[k] = 1.0 / (h * h) + 1.0 / (2.0 * h * ri);
            di[k] = -2.0 / (h * h) - n2 / (ri * ri) - beta * (3.0 * f0 * f0 - 1.0);
        }
        // Thomas algorithm
        for k in 1..m {
            let w = lo[k] / di[k - 1];
            di[k] -= w * up[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        let mut dx = vec![0.0; m];
        dx[m - 1] = rhs[m - 1] / di[m - 1];
        for k in (0..m - 1).rev() {
            dx[k] = (rhs[k] - up[k] * dx[k + 1]) / di[k];
        }
        let mut step: f64 = 0.0;
        for k in 0..m {
            f[k + 1] += dx[k];
            step = step.max(dx[k].abs());
        }
        if step < 1e-15 {
            break;
        }
    }
    f
}

/// Three-level Richardson extrapolation of [`fd_solve`] at spacings `h`, `h/2`, `h/4`.
pub fn classical_gl(beta: f64, n: u32, r_max: f64, h: f64) -> ClassicalGl {
    let intervals = (r_max / h).round() as usize;
    let f1 = fd_solve(beta, n, r_max, intervals);
    let f2 = fd_solve(beta, n, r_max, 2 * intervals);
    let f4 = fd_solve(beta, n, r_max, 4 * intervals);
    let f: Vec<f64> = (0..=intervals)
        .map(|i| {
            let r1 = (4.0 * f2[2 * i] - f1[i]) / 3.0;
            let r2 = (4.0 * f4[4 * i] - f2[2 * i]) / 3.0;
            (16.0 * r2 - r1) / 15.0
        })
        .collect();
    let hh = r_max / intervals as f64;
    let r: Vec<f64> = (0..=intervals).map(|i| i as f64 * hh).collect();
    let d0 = origin_coefficient(&r, &f, n);
    ClassicalGl { h: hh, r, f, d0 }
}

/// `D` from a fit of `f` by `r^n` times a polynomial in `r^2` near the origin.
pub fn origin_coefficient(r: &[f64], f: &[f64], n: u32) -> f64 {
    origin_fit(r, f, n, 0.5, 6)
}

pub fn origin_fit(r: &[f64], f: &[f64], n: u32, hi: f64, terms: usize) -> f64 {
    let idx: Vec<usize> = (1..r.len()).filter(|&i| r[i] <= hi).collect();
    let a = DMatrix::from_fn(idx.len(), terms, |k, j| r[idx[k]].powi((n + 2 * j as u32) as i32));
    let b = DVector::from_fn(idx.len(), |k, _| f[idx[k]]);
    let x = a.svd(true, true).solve(&b, 1e-15).expect("fit");
    x[0]
}

impl ClassicalGl {
    /// Largest `|f - other(r)|` over samples of `other` at or below `r_hi`,
    /// assuming both live on the same spacing from zero.
    pub fn sup_distance(&self, r: &[f64], f: &[f64], r_hi: f64) -> f64 {
        let mut d: f64 = 0.0;
        for (i, (&ri, &fi)) in r.iter().zip(f).enumerate() {
            if ri > r_hi + 1e-12 {
                break;
            }
            let k = (ri / self.h).round() as usize;
            assert!((self.r[k] - ri).abs() < 1e-9, "sample {i} at r = {ri} is off the oracle grid");
            d = d.max((self.f[k] - fi).abs());
        }
        d
    }
}
