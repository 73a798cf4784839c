//! Checks a solved profile against the equations of motion, the integral
//! identities and the asymptotic structure near the origin and at infinity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{potential, vacuum_mass_matrix, FieldPoint, RadialState, VevCase};
use crate::shoot::{vacuum_rates, ProfileSolution};

/// Samples closer than this to their asymptote carry no tail information.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Exponential tails are fitted only where the field exceeds this multiple of the floor.
const FIT_FLOOR_FACTOR: f64 = 1e3;

/// Composite Simpson rule over `ys[0..=k]` with uniform spacing `h`; an odd
/// interval count finishes with the 3/8 rule.
pub fn simpson(ys: &[f64], h: f64) -> f64 {
    let k = ys.len().saturating_sub(1);
    match k {
        0 => 0.0,
        1 => 0.5 * h * (ys[0] + ys[1]),
        _ => {
            let even = if k % 2 == 0 { k } else { k - 3 };
            let mut s = 0.0;
            let mut i = 0;
            while i < even {
                s += ys[i] + 4.0 * ys[i + 1] + ys[i + 2];
                i += 2;
            }
            let mut total = s * h / 3.0;
            if even < k {
                let j = even;
                total += 3.0 * h / 8.0 * (ys[j] + 3.0 * ys[j + 1] + 3.0 * ys[j + 2] + ys[j + 3]);
            }
            total
        }
    }
}

fn uniform_h(sol: &ProfileSolution) -> Result<f64> {
    sol.profile
        .uniform_spacing()
        .ok_or_else(|| Error::InvalidArgument("verification needs a uniform output grid".into()))
}

/// `V_inf` evaluated as `V(A, B)` so that the vacuum itself gives exactly zero.
fn vacuum_reference(sol: &ProfileSolution) -> f64 {
    let (a, b) = sol.targets();
    potential(FieldPoint::new(a, b), &sol.params)
}

fn weighted_potential(sol: &ProfileSolution, i: usize) -> f64 {
    let p = &sol.profile;
    p.r[i] * (potential(FieldPoint::new(p.f[i], p.g[i]), &sol.params) - vacuum_reference(sol))
}

/// Largest `|f'' - rhs|`, `|g'' - rhs|` over interior samples, with second
/// derivatives from five-point central differences.
pub fn eom_residual_check(sol: &ProfileSolution) -> Result<f64> {
    let p = &sol.profile;
    let n = p.len();
    if n < 9 {
        return Err(Error::GridTooCoarse { points: n });
    }
    let h = uniform_h(sol)?;
    let c = 1.0 / (12.0 * h * h);
    let d2 = |y: &[f64], i: usize| c * (-y[i + 2] + 16.0 * y[i + 1] - 30.0 * y[i] + 16.0 * y[i - 1] - y[i - 2]);
    let mut worst: f64 = 0.0;
    for i in 2..n - 2 {
        let r = p.r[i];
        if r <= 0.0 {
            continue;
        }
        let state: RadialState = [p.f[i], p.df[i], p.g[i], p.dg[i]];
        let (rf, rg) = crate::model::eom_rhs(r, &state, &sol.params, &sol.spec);
        worst = worst.max((d2(&p.f, i) - rf).abs()).max((d2(&p.g, i) - rg).abs());
    }
    Ok(worst)
}

/// Analytic estimate of `int_{r_max}^inf r (V - V_inf) dr` from the fitted far field.
pub fn quantization_tail(sol: &ProfileSolution) -> f64 {
    let p = &sol.profile;
    let rm = p.r_max();
    let (ta, tb) = sol.targets();
    let m = vacuum_mass_matrix(&sol.params, sol.case, &sol.vacuum);
    let af = algebraic_coefficient(&p.r, &p.f, ta);
    match sol.case {
        VevCase::TwoVev => {
            let ag = algebraic_coefficient(&p.r, &p.g, tb);
            let q = m[0][0] * af * af + 2.0 * m[0][1] * af * ag + m[1][1] * ag * ag;
            q / (2.0 * rm * rm)
        }
        VevCase::OneVev => {
            let gl = *p.g.last().unwrap_or(&0.0);
            let kappa = m[1][1].max(0.0).sqrt();
            let g_part = if kappa > 0.0 { m[1][1] * rm * gl * gl / (2.0 * kappa) } else { 0.0 };
            m[0][0] * af * af / (2.0 * rm * rm) + g_part
        }
    }
}

/// Coefficient `a` of `y - target ~ a / r^2 + b / r^4 + c / r^6`, least squares
/// over `[r_max / 2, r_max]`; the lower end of the last decade still carries
/// enough high-order terms to bias `a` at the `1e-5` level.
fn algebraic_coefficient(r: &[f64], y: &[f64], target: f64) -> f64 {
    let rm = *r.last().unwrap_or(&0.0);
    let rows: Vec<(f64, f64)> = r
        .iter()
        .zip(y)
        .filter(|(&ri, _)| ri >= 0.5 * rm && ri > 0.0)
        .map(|(&ri, &yi)| (ri, yi - target))
        .collect();
    if rows.len() < 4 {
        return rows.last().map(|&(ri, d)| d * ri * ri).unwrap_or(0.0);
    }
    let a = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i].0.powi(-2 - 2 * j as i32));
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|&(_, d)| d));
    lstsq(a, b).map(|x| x[0]).unwrap_or(0.0)
}

fn lstsq(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    // column scaling keeps the normal problem well conditioned
    let scales: Vec<f64> = (0..a.ncols())
        .map(|j| a.column(j).norm().max(f64::MIN_POSITIVE))
        .collect();
    let mut a = a;
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let x = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(DVector::from_iterator(x.len(), x.iter().zip(&scales).map(|(v, s)| v / s)))
}

/// `int_0^r_max r (V - V_inf) dr` plus the analytic tail, and the exact value
/// `(n^2 A^2 + m^2 B^2) / 2`.
pub fn quantization_integral(sol: &ProfileSolution) -> Result<(f64, f64)> {
    let h = uniform_h(sol)?;
    let ys: Vec<f64> = (0..sol.profile.len()).map(|i| weighted_potential(sol, i)).collect();
    let value = simpson(&ys, h) + quantization_tail(sol);
    let (a, b) = sol.targets();
    let (n, m) = (f64::from(sol.spec.n), f64::from(sol.spec.m));
    Ok((value, 0.5 * (n * n * a * a + m * m * b * b)))
}

/// `|LHS - RHS|` of the finite-radius virial identity at grid radius `radius`.
pub fn pohozaev_check(sol: &ProfileSolution, radius: f64) -> Result<f64> {
    let h = uniform_h(sol)?;
    let k = sol
        .profile
        .index_of(radius)
        .ok_or_else(|| Error::InvalidArgument(format!("R = {radius} is not a grid radius")))?;
    let ys: Vec<f64> = (0..=k).map(|i| weighted_potential(sol, i)).collect();
    let lhs = simpson(&ys, h);
    let p = &sol.profile;
    let r = p.r[k];
    let (n, m) = (f64::from(sol.spec.n), f64::from(sol.spec.m));
    let v = potential(FieldPoint::new(p.f[k], p.g[k]), &sol.params) - vacuum_reference(sol);
    let rhs = 0.5 * (n * n * p.f[k] * p.f[k] + m * m * p.g[k] * p.g[k])
        - 0.5 * r * r * (p.df[k] * p.df[k] + p.dg[k] * p.dg[k])
        + 0.5 * r * r * v;
    Ok((lhs - rhs).abs())
}

/// Near-origin fit results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginFit {
    /// Fitted slope of `log f` against `log r`.
    pub exponent_f: f64,
    /// Fitted slope of `log g` against `log r` (2VEV).
    pub exponent_g: Option<f64>,
    /// Fitted `r^2` coefficient of `g - b0` (1VEV).
    pub quadratic_g: Option<f64>,
    /// `b0 (beta2 b0^2 - alpha) / 4` (1VEV).
    pub quadratic_target: Option<f64>,
    /// Relative error of the quadratic coefficient, absolute when its target is below `1e-6`.
    pub coeff_error: Option<f64>,
}

/// Core length `1 / sqrt(beta1)`.
pub fn core_scale(sol: &ProfileSolution) -> f64 {
    1.0 / sol.params.beta1.sqrt()
}

fn origin_window(sol: &ProfileSolution, fraction: f64) -> Vec<usize> {
    let hi = fraction * core_scale(sol);
    (0..sol.profile.len())
        .filter(|&i| {
            let r = sol.profile.r[i];
            r >= sol.r_eps && r <= hi * (1.0 + 1e-12)
        })
        .collect()
}

fn log_slope(idx: &[usize], r: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .filter(|&&i| y[i] > 0.0)
        .map(|&i| (r[i].ln(), y[i].ln()))
        .collect();
    linear_fit(&pts).map(|(_, s)| s)
}

/// Least-squares line `y = a + s x`; `None` with fewer than two points.
fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let s = sxy / sxx;
    Some((my - s * mx, s))
}

/// Fits the small-`r` structure on `[r_eps, 0.1 core]`.
///
/// In the 1VEV case `g - b0` is fitted by `c2 r^2 + c4 r^4` using both the
/// value and slope samples.
pub fn origin_series_check(sol: &ProfileSolution) -> Result<OriginFit> {
    origin_series_check_within(sol, 0.1)
}

/// [`origin_series_check`] on `[r_eps, fraction * core]`.
pub fn origin_series_check_within(sol: &ProfileSolution, fraction: f64) -> Result<OriginFit> {
    let idx = origin_window(sol, fraction);
    if idx.len() < 3 {
        return Err(Error::WindowTooNarrow { points: idx.len() });
    }
    let p = &sol.profile;
    let exponent_f = log_slope(&idx, &p.r, &p.f).ok_or(Error::WindowTooNarrow { points: idx.len() })?;
    match sol.case {
        VevCase::TwoVev => {
            let exponent_g = log_slope(&idx, &p.r, &p.g).ok_or(Error::WindowTooNarrow { points: idx.len() })?;
            Ok(OriginFit {
                exponent_f,
                exponent_g: Some(exponent_g),
                quadratic_g: None,
                quadratic_target: None,
                coeff_error: None,
            })
        }
        VevCase::OneVev => {
            let b0 = sol.c0;
            let rows = 2 * idx.len();
            let a = DMatrix::from_fn(rows, 2, |row, j| {
                let r = p.r[idx[row / 2]];
                let k = 2 * (j as i32 + 1);
                if row % 2 == 0 {
                    r.powi(k)
                } else {
                    // r g' = sum k c_k r^k puts slopes on the value scale
                    f64::from(k) * r.powi(k)
                }
            });
            let b = DVector::from_fn(rows, |row, _| {
                let i = idx[row / 2];
                if row % 2 == 0 {
                    p.g[i] - b0
                } else {
                    p.r[i] * p.dg[i]
                }
            });
            let c = lstsq(a, b).ok_or(Error::WindowTooNarrow { points: idx.len() })?[0];
            let target = b0 * (sol.params.beta2 * b0 * b0 - sol.params.alpha) / 4.0;
            let err = if target.abs() < 1e-6 {
                (c - target).abs()
            } else {
                ((c - target) / target).abs()
            };
            Ok(OriginFit {
                exponent_f,
                exponent_g: None,
                quadratic_g: Some(c),
                quadratic_target: Some(target),
                coeff_error: Some(err),
            })
        }
    }
}

/// Far-field decay of one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TailMeasure {
    /// Slope of `log|y - target|` against `log r`.
    Exponent(f64),
    /// Slope of `log(sqrt(r) y)` against `r`.
    Rate(f64),
    /// The field sits within the noise floor of its asymptote on the whole window.
    Degenerate,
}

impl TailMeasure {
    pub fn value(&self) -> Option<f64> {
        match *self {
            TailMeasure::Exponent(v) | TailMeasure::Rate(v) => Some(v),
            TailMeasure::Degenerate => None,
        }
    }
}

/// Tail measurements for `f` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub f: TailMeasure,
    pub g: TailMeasure,
}

fn tail_window(sol: &ProfileSolution) -> Vec<usize> {
    let rm = sol.profile.r_max();
    (0..sol.profile.len()).filter(|&i| sol.profile.r[i] >= 0.1 * rm).collect()
}

fn algebraic_tail(idx: &[usize], r: &[f64], y: &[f64], target: f64) -> Result<TailMeasure> {
    let floor = NOISE_FLOOR * target.abs().max(1.0);
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .filter_map(|&i| {
            let d = (y[i] - target).abs();
            (d > floor).then(|| (r[i].ln(), d.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::TailBelowNoiseFloor);
    }
    linear_fit(&pts)
        .map(|(_, s)| TailMeasure::Exponent(s))
        .ok_or(Error::TailBelowNoiseFloor)
}

fn exponential_tail(idx: &[usize], r: &[f64], y: &[f64], scale: f64) -> Result<TailMeasure> {
    let floor = NOISE_FLOOR * scale.max(1.0);
    if idx.iter().all(|&i| y[i].abs() <= floor) {
        return Err(Error::TailBelowNoiseFloor);
    }
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .filter(|&&i| y[i] > FIT_FLOOR_FACTOR * floor)
        .map(|&i| (r[i], y[i].ln() + 0.5 * r[i].ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::TailBelowNoiseFloor);
    }
    linear_fit(&pts)
        .map(|(_, s)| TailMeasure::Rate(s))
        .ok_or(Error::TailBelowNoiseFloor)
}

fn degenerate_ok(r: Result<TailMeasure>) -> Result<TailMeasure> {
    match r {
        Err(Error::TailBelowNoiseFloor) => Ok(TailMeasure::Degenerate),
        other => other,
    }
}

/// Fits the far field over the last decade `[r_max / 10, r_max]`.
///
/// Algebraic tails report the log-log slope; the 1VEV `g` tail reports its
/// exponential rate after removing the `r^(-1/2)` prefactor. A field within
/// the noise floor on the whole window is reported as degenerate.
pub fn tail_fit(sol: &ProfileSolution) -> Result<TailFit> {
    let (mu_min, _) = vacuum_rates(&sol.params, sol.case, &sol.vacuum);
    let rm = sol.profile.r_max();
    if mu_min <= 0.0 || rm * mu_min < 4.0 {
        return Err(Error::PreconditionViolation(format!(
            "r_max = {rm} is shorter than four decay lengths (slowest rate {mu_min})"
        )));
    }
    let idx = tail_window(sol);
    let p = &sol.profile;
    let (ta, tb) = sol.targets();
    let f = degenerate_ok(algebraic_tail(&idx, &p.r, &p.f, ta))?;
    let g = match sol.case {
        VevCase::TwoVev => degenerate_ok(algebraic_tail(&idx, &p.r, &p.g, tb))?,
        VevCase::OneVev => degenerate_ok(exponential_tail(&idx, &p.r, &p.g, sol.c0))?,
    };
    Ok(TailFit { f, g })
}

/// Expected far-field behavior: `(f exponent, g exponent or decay rate)`.
pub fn expected_tail(sol: &ProfileSolution) -> (f64, f64) {
    match sol.case {
        VevCase::TwoVev => (-2.0, -2.0),
        VevCase::OneVev => (-2.0, -(sol.params.beta_prime - sol.params.alpha).max(0.0).sqrt()),
    }
}

/// Sign and bound conditions on raw samples: `(monotone_ok, bounds_ok)`.
///
/// 1VEV: `0 <= f < 1` increasing, `0 < g <= b0` decreasing (or `g = 0`
/// identically when `b0 = 0`). 2VEV: `0 <= f < A`, `0 <= g < B`, both increasing.
pub fn shape_check(sol: &ProfileSolution) -> (bool, bool) {
    let p = &sol.profile;
    let (ta, tb) = sol.targets();
    let increasing = |y: &[f64]| y.windows(2).all(|w| w[1] > w[0]);
    let decreasing = |y: &[f64]| y.windows(2).all(|w| w[1] < w[0]);
    let f_bounds = p.f.iter().all(|&v| (0.0..ta).contains(&v));
    match sol.case {
        VevCase::TwoVev => {
            let g_bounds = if sol.spec.m == 0 {
                p.g.iter().all(|&v| v > 0.0 && v < tb)
            } else {
                p.g.iter().all(|&v| (0.0..tb).contains(&v))
            };
            (increasing(&p.f) && increasing(&p.g), f_bounds && g_bounds)
        }
        VevCase::OneVev => {
            let b0 = sol.c0;
            let vanishing = b0 == 0.0 && p.g.iter().all(|&v| v == 0.0);
            let g_bounds = vanishing || (b0 > 0.0 && p.g.iter().all(|&v| v > 0.0 && v <= b0));
            let g_mono = vanishing || decreasing(&p.g);
            let b_bound = b0 >= 0.0 && b0 < (sol.params.alpha / sol.params.beta2).sqrt();
            (increasing(&p.f) && g_mono, f_bounds && g_bounds && b_bound)
        }
    }
}

/// Outcome of one check in a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    /// Passed because the quantity is below the noise floor.
    PassedDegenerate,
    Failed,
    /// The check does not apply to this case.
    NotApplicable,
    /// The check could not be evaluated.
    Error,
}

impl CheckStatus {
    pub fn ok(&self) -> bool {
        matches!(self, CheckStatus::Passed | CheckStatus::PassedDegenerate | CheckStatus::NotApplicable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

/// Acceptance thresholds for a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyTolerances {
    /// Multiplied by `max(1, mu_max^2)`.
    pub eom: f64,
    pub quantization_rel: f64,
    pub pohozaev: f64,
    pub origin_coeff: f64,
    pub origin_exponent: f64,
    pub tail_exponent: f64,
    pub tail_rate_rel: f64,
    /// Upper end of the origin fit window in units of the core length.
    pub origin_window: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            eom: 1e-6,
            quantization_rel: 1e-3,
            pohozaev: 1e-6,
            origin_coeff: 1e-3,
            origin_exponent: 0.01,
            tail_exponent: 0.15,
            tail_rate_rel: 0.05,
            origin_window: 0.1,
        }
    }
}

impl VerifyTolerances {
    /// Looser thresholds for second-order finite-difference profiles.
    pub fn oracle() -> Self {
        Self {
            eom: 5e-2,
            quantization_rel: 5e-3,
            pohozaev: 1e-2,
            origin_coeff: 5e-2,
            origin_exponent: 0.05,
            tail_exponent: 0.15,
            tail_rate_rel: 0.05,
            origin_window: 0.5,
        }
    }
}

/// Everything `verify` measures about one solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_eom_residual: Option<f64>,
    pub quantization_value: Option<f64>,
    pub quantization_target: f64,
    /// Largest residual over `pohozaev_radii`.
    pub pohozaev_residual: Option<f64>,
    pub pohozaev_radii: Vec<f64>,
    pub pohozaev_residuals: Vec<f64>,
    pub origin_coeff_error: Option<f64>,
    pub origin_exponent_f: Option<f64>,
    pub origin_exponent_g: Option<f64>,
    pub tail_exponent_f: Option<f64>,
    /// Decay rate (1VEV) or log-log exponent (2VEV) of the `g` tail.
    pub tail_rate_g: Option<f64>,
    pub monotone_ok: bool,
    pub bounds_ok: bool,
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status.ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.status.ok())
    }
}

/// Grid radii from `{5, 10, 20, r_max}` at or below `r_max`.
pub fn default_pohozaev_radii(sol: &ProfileSolution) -> Vec<f64> {
    let rm = sol.profile.r_max();
    let mut out: Vec<f64> = [5.0, 10.0, 20.0]
        .into_iter()
        .filter(|&r| r < rm && sol.profile.index_of(r).is_some())
        .collect();
    out.push(rm);
    out
}

fn outcome(name: &str, value: Option<f64>, tolerance: Option<f64>, pass: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        status: if pass { CheckStatus::Passed } else { CheckStatus::Failed },
        value,
        tolerance,
        detail,
    }
}

fn errored(name: &str, e: &Error) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        status: CheckStatus::Error,
        value: None,
        tolerance: None,
        detail: e.to_string(),
    }
}

/// Runs every check on `sol`.
pub fn verify(sol: &ProfileSolution, tol: &VerifyTolerances) -> VerificationReport {
    let mut checks = Vec::new();
    let (_, mu_max) = vacuum_rates(&sol.params, sol.case, &sol.vacuum);

    let eom = eom_residual_check(sol);
    let eom_tol = tol.eom * mu_max.powi(2).max(1.0);
    checks.push(match &eom {
        Ok(v) => outcome("eom_residual", Some(*v), Some(eom_tol), *v < eom_tol, String::new()),
        Err(e) => errored("eom_residual", e),
    });

    let (n, m) = (f64::from(sol.spec.n), f64::from(sol.spec.m));
    let (a, b) = sol.targets();
    let q_target = 0.5 * (n * n * a * a + m * m * b * b);
    let quant = quantization_integral(sol).map(|(v, _)| v);
    checks.push(match &quant {
        Ok(v) => {
            let err = if q_target == 0.0 { v.abs() } else { ((v - q_target) / q_target).abs() };
            let t = if q_target == 0.0 { 1e-12 } else { tol.quantization_rel };
            outcome("quantization", Some(err), Some(t), err < t, format!("value {v} target {q_target}"))
        }
        Err(e) => errored("quantization", e),
    });

    let radii = default_pohozaev_radii(sol);
    let mut residuals = Vec::new();
    let mut poh_err = None;
    for &r in &radii {
        match pohozaev_check(sol, r) {
            Ok(v) => residuals.push(v),
            Err(e) => {
                poh_err = Some(e);
                break;
            }
        }
    }
    let poh_max = (poh_err.is_none() && !residuals.is_empty()).then(|| residuals.iter().cloned().fold(0.0, f64::max));
    checks.push(match (&poh_err, poh_max) {
        (Some(e), _) => errored("pohozaev", e),
        (None, Some(v)) => outcome("pohozaev", Some(v), Some(tol.pohozaev), v < tol.pohozaev, format!("radii {radii:?}")),
        (None, None) => errored("pohozaev", &Error::EmptyWindow),
    });

    let (mut coeff_error, mut exp_f, mut exp_g) = (None, None, None);
    if sol.spec.is_trivial() {
        checks.push(not_applicable("origin_series", "constant solution"));
    } else {
        match origin_series_check_within(sol, tol.origin_window) {
            Ok(fit) => {
                coeff_error = fit.coeff_error;
                exp_f = Some(fit.exponent_f);
                exp_g = fit.exponent_g;
                let mut dev = (fit.exponent_f - n).abs();
                if let Some(eg) = fit.exponent_g {
                    dev = dev.max((eg - m).abs());
                }
                checks.push(outcome(
                    "origin_exponent",
                    Some(dev),
                    Some(tol.origin_exponent),
                    dev < tol.origin_exponent,
                    format!("f exponent {} g exponent {:?}", fit.exponent_f, fit.exponent_g),
                ));
                match fit.coeff_error {
                    Some(e) if sol.c0 > 0.0 => checks.push(outcome(
                        "origin_coefficient",
                        Some(e),
                        Some(tol.origin_coeff),
                        e < tol.origin_coeff,
                        format!("fitted {:?} target {:?}", fit.quadratic_g, fit.quadratic_target),
                    )),
                    Some(_) => checks.push(degenerate("origin_coefficient", "g vanishes identically")),
                    None => checks.push(not_applicable("origin_coefficient", "2vev checks exponents only")),
                }
            }
            Err(e) => checks.push(errored("origin_series", &e)),
        }
    }

    let (mut tail_f, mut tail_g) = (None, None);
    if sol.spec.is_trivial() {
        checks.push(not_applicable("tail", "constant solution"));
    } else {
        match tail_fit(sol) {
            Ok(fit) => {
                tail_f = fit.f.value();
                tail_g = fit.g.value();
                let (ef, eg) = expected_tail(sol);
                checks.push(tail_check("tail_f", fit.f, ef, tol));
                checks.push(tail_check("tail_g", fit.g, eg, tol));
            }
            Err(e) => checks.push(errored("tail", &e)),
        }
    }

    let (monotone_ok, bounds_ok) = shape_check(sol);
    checks.push(outcome("monotone", None, None, monotone_ok, String::new()));
    checks.push(outcome("bounds", None, None, bounds_ok, String::new()));

    VerificationReport {
        max_eom_residual: eom.ok(),
        quantization_value: quant.ok(),
        quantization_target: q_target,
        pohozaev_residual: poh_max,
        pohozaev_radii: radii,
        pohozaev_residuals: residuals,
        origin_coeff_error: coeff_error,
        origin_exponent_f: exp_f,
        origin_exponent_g: exp_g,
        tail_exponent_f: tail_f,
        tail_rate_g: tail_g,
        monotone_ok,
        bounds_ok,
        checks,
    }
}

fn not_applicable(name: &str, why: &str) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        status: CheckStatus::NotApplicable,
        value: None,
        tolerance: None,
        detail: why.into(),
    }
}

fn degenerate(name: &str, why: &str) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        status: CheckStatus::PassedDegenerate,
        value: None,
        tolerance: None,
        detail: why.into(),
    }
}

fn tail_check(name: &str, m: TailMeasure, expected: f64, tol: &VerifyTolerances) -> CheckOutcome {
    match m {
        TailMeasure::Degenerate => degenerate(name, "within the noise floor of the asymptote"),
        TailMeasure::Exponent(v) => outcome(
            name,
            Some(v),
            Some(tol.tail_exponent),
            (v - expected).abs() <= tol.tail_exponent,
            format!("expected {expected}"),
        ),
        TailMeasure::Rate(v) => {
            let rel = ((v - expected) / expected).abs();
            outcome(name, Some(v), Some(tol.tail_rate_rel), rel <= tol.tail_rate_rel, format!("expected {expected}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let h = 0.1;
        for k in [2usize, 3, 4, 5, 7, 10] {
            let ys: Vec<f64> = (0..=k).map(|i| {
                let x = i as f64 * h;
                1.0 + x - 2.0 * x * x + 0.5 * x * x * x
            }).collect();
            let x = k as f64 * h;
            let exact = x + x * x / 2.0 - 2.0 * x.powi(3) / 3.0 + x.powi(4) / 8.0;
            assert!((simpson(&ys, h) - exact).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn linear_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 0.25 * i as f64)).collect();
        let (a, s) = linear_fit(&pts).unwrap();
        assert!((a - 3.0).abs() < 1e-13 && (s + 0.25).abs() < 1e-13);
        assert!(linear_fit(&pts[..1]).is_none());
    }

    #[test]
    fn algebraic_coefficient_two_terms() {
        let r: Vec<f64> = (0..=400).map(|i| i as f64 * 0.025).collect();
        let y: Vec<f64> = r.iter().map(|&x| if x > 0.0 { 2.0 - 0.3 / (x * x) + 0.7 / x.powi(4) - 2.0 / x.powi(6) } else { 0.0 }).collect();
        assert!((algebraic_coefficient(&r, &y, 2.0) + 0.3).abs() < 1e-10);
    }
}
