//! Potential, radial equations of motion, vacuum algebra and parameter-regime
//! validation for the two-component model.
//!
//! Field 1 winds `n` times and has profile `f`, field 2 winds `m` times with
//! profile `g`. Everything here is a pure function of its inputs.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Inequality, Result};

/// The four real couplings, stored exactly as given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParameters {
    pub beta1: f64,
    pub beta2: f64,
    pub beta_prime: f64,
    pub alpha: f64,
}

impl CouplingParameters {
    pub const fn new(beta1: f64, beta2: f64, beta_prime: f64, alpha: f64) -> Self {
        Self {
            beta1,
            beta2,
            beta_prime,
            alpha,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.beta1.is_finite()
            && self.beta2.is_finite()
            && self.beta_prime.is_finite()
            && self.alpha.is_finite()
    }

    /// Determinant `beta1 beta2 - beta'^2` of the quartic form.
    pub fn quartic_determinant(&self) -> f64 {
        self.beta1 * self.beta2 - self.beta_prime * self.beta_prime
    }

    /// The largest coupling magnitude; sets the shortest length scale.
    pub fn max_coupling(&self) -> f64 {
        self.beta1
            .abs()
            .max(self.beta2.abs())
            .max(self.beta_prime.abs())
            .max(self.alpha.abs())
    }

    /// Basic validity shared by both cases: positivity of the self couplings
    /// and boundedness of the potential from below.
    pub fn check_bounded(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvalidArgument("couplings must be finite".into()));
        }
        if self.beta1 <= 0.0 {
            return Err(Error::RegimeViolation(Inequality::Beta1Positive));
        }
        if self.beta2 <= 0.0 {
            return Err(Error::RegimeViolation(Inequality::Beta2Positive));
        }
        if self.beta_prime <= -(self.beta1 * self.beta2).sqrt() {
            return Err(Error::RegimeViolation(Inequality::BoundedBelow));
        }
        Ok(())
    }
}

/// Which vacuum the far field approaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VevCase {
    /// Only field 1 condenses: `(f, g) -> (1, 0)`.
    OneVev,
    /// Both fields condense: `(f, g) -> (A, B)`.
    TwoVev,
}

impl VevCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            VevCase::OneVev => "1vev",
            VevCase::TwoVev => "2vev",
        }
    }
}

impl std::str::FromStr for VevCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1vev" | "onevev" | "one" => Ok(VevCase::OneVev),
            "2vev" | "twovev" | "two" => Ok(VevCase::TwoVev),
            other => Err(Error::Usage(format!("unknown case `{other}` (expected 1vev or 2vev)"))),
        }
    }
}

/// Winding numbers and case tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: u32,
    pub m: u32,
    pub case: VevCase,
}

impl ProblemSpec {
    pub fn new(n: u32, m: u32, case: VevCase) -> Result<Self> {
        let spec = Self { n, m, case };
        spec.check()?;
        Ok(spec)
    }

    pub fn one_vev(n: u32) -> Result<Self> {
        Self::new(n, 0, VevCase::OneVev)
    }

    pub fn two_vev(n: u32, m: u32) -> Result<Self> {
        Self::new(n, m, VevCase::TwoVev)
    }

    pub fn check(&self) -> Result<()> {
        match self.case {
            VevCase::OneVev => {
                if self.m != 0 {
                    return Err(Error::InvalidSpec(format!(
                        "1vev requires m = 0 (got m = {})",
                        self.m
                    )));
                }
                if self.n == 0 {
                    return Err(Error::InvalidSpec("1vev requires n >= 1".into()));
                }
            }
            VevCase::TwoVev => {
                let trivial = self.n == 0 && self.m == 0;
                if !trivial && (self.n == 0 || self.m == 0) {
                    return Err(Error::InvalidSpec(format!(
                        "2vev requires n, m >= 1 or n = m = 0 (got n = {}, m = {})",
                        self.n, self.m
                    )));
                }
            }
        }
        Ok(())
    }

    /// `n = m = 0` in the two-condensate case: the constant vacuum solves the problem.
    pub fn is_trivial(&self) -> bool {
        self.case == VevCase::TwoVev && self.n == 0 && self.m == 0
    }
}

/// Far-field values of the profiles and the potential there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumState {
    pub a: f64,
    pub b: f64,
    pub v_infinity: f64,
}

/// A pair of profile values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub f: f64,
    pub g: f64,
}

impl FieldPoint {
    pub const fn new(f: f64, g: f64) -> Self {
        Self { f, g }
    }
}

/// Radial state `(f, f', g, g')`.
pub type RadialState = [f64; 4];

/// Checks the regime for `spec.case` and returns the corresponding vacuum.
pub fn validate_parameters(params: &CouplingParameters, spec: &ProblemSpec) -> Result<VacuumState> {
    spec.check()?;
    params.check_bounded()?;
    if params.quartic_determinant() <= 0.0 {
        return Err(Error::RegimeViolation(Inequality::CrossCouplingBound));
    }
    match spec.case {
        VevCase::OneVev => {
            if params.beta_prime <= params.alpha {
                return Err(Error::RegimeViolation(Inequality::CrossExceedsAlpha));
            }
            if params.alpha <= 0.0 {
                return Err(Error::RegimeViolation(Inequality::AlphaPositive));
            }
            Ok(VacuumState {
                a: 1.0,
                b: 0.0,
                v_infinity: 0.0,
            })
        }
        VevCase::TwoVev => {
            if params.alpha <= params.beta_prime {
                return Err(Error::RegimeViolation(Inequality::AlphaExceedsCross));
            }
            if params.beta1 * params.beta2 <= params.beta_prime * params.alpha {
                return Err(Error::RegimeViolation(Inequality::FirstVevPositive));
            }
            let (a, b) = two_vev_values(params);
            Ok(VacuumState {
                a,
                b,
                v_infinity: closed_form_vacuum_potential(params),
            })
        }
    }
}

/// `(A, B)` from the two-condensate vacuum algebra; no regime check.
fn two_vev_values(p: &CouplingParameters) -> (f64, f64) {
    let det = p.quartic_determinant();
    let a2 = (p.beta1 * p.beta2 - p.beta_prime * p.alpha) / det;
    let b2 = p.beta1 * (p.alpha - p.beta_prime) / det;
    (a2.max(0.0).sqrt(), b2.max(0.0).sqrt())
}

fn closed_form_vacuum_potential(p: &CouplingParameters) -> f64 {
    let d = p.alpha - p.beta_prime;
    -0.5 * p.beta1 * d * d / p.quartic_determinant()
}

/// Self-interaction potential evaluated on the radial profiles.
pub fn potential(p: FieldPoint, params: &CouplingParameters) -> f64 {
    let f2 = p.f * p.f;
    let g2 = p.g * p.g;
    let s = f2 - 1.0;
    0.5 * params.beta1 * s * s + 0.5 * params.beta2 * g2 * g2 + params.beta_prime * f2 * g2
        - params.alpha * g2
}

/// Half the gradient of the potential: `(f[beta1(f^2-1)+beta' g^2], g[beta2 g^2 - alpha + beta' f^2])`.
pub fn half_force(p: FieldPoint, params: &CouplingParameters) -> (f64, f64) {
    let f2 = p.f * p.f;
    let g2 = p.g * p.g;
    (
        p.f * (params.beta1 * (f2 - 1.0) + params.beta_prime * g2),
        p.g * (params.beta2 * g2 - params.alpha + params.beta_prime * f2),
    )
}

/// Closed-form potential at the two-condensate vacuum.
///
/// Accepts the closed regime `alpha >= beta'`; at `alpha = beta'` the vacuum
/// degenerates to `(1, 0)` and the value is zero.
pub fn vacuum_potential(params: &CouplingParameters) -> Result<f64> {
    params.check_bounded()?;
    if params.quartic_determinant() <= 0.0 {
        return Err(Error::RegimeViolation(Inequality::CrossCouplingBound));
    }
    if params.alpha < params.beta_prime {
        return Err(Error::RegimeViolation(Inequality::AlphaAtLeastCross));
    }
    Ok(closed_form_vacuum_potential(params))
}

/// `(A, B)` of the closed two-condensate regime `alpha >= beta'`.
pub fn vev_values(params: &CouplingParameters) -> Result<(f64, f64)> {
    vacuum_potential(params)?;
    Ok(two_vev_values(params))
}

/// Second radial derivatives `(f'', g'')` from the equations of motion.
///
/// Total for `r > 0`; the origin is handled by the series start.
pub fn eom_rhs(r: f64, state: &RadialState, params: &CouplingParameters, spec: &ProblemSpec) -> (f64, f64) {
    let [f, df, g, dg] = *state;
    let (hf, hg) = half_force(FieldPoint::new(f, g), params);
    let n2 = f64::from(spec.n * spec.n);
    let m2 = f64::from(spec.m * spec.m);
    let inv_r = 1.0 / r;
    let inv_r2 = inv_r * inv_r;
    (
        -df * inv_r + n2 * inv_r2 * f + hf,
        -dg * inv_r + m2 * inv_r2 * g + hg,
    )
}

/// Linearization of the force about the vacuum, `M = (1/2) Hess V`.
///
/// Small deviations `d` obey `d'' + d'/r - diag(n^2, m^2) d / r^2 = M d`.
pub fn vacuum_mass_matrix(params: &CouplingParameters, case: VevCase, vac: &VacuumState) -> [[f64; 2]; 2] {
    match case {
        VevCase::OneVev => [
            [2.0 * params.beta1, 0.0],
            [0.0, params.beta_prime - params.alpha],
        ],
        VevCase::TwoVev => {
            let off = 2.0 * params.beta_prime * vac.a * vac.b;
            [
                [2.0 * params.beta1 * vac.a * vac.a, off],
                [off, 2.0 * params.beta2 * vac.b * vac.b],
            ]
        }
    }
}

/// Symmetric 2x2 eigen-decomposition; returns eigenvalues and unit column
/// eigenvectors. A diagonal input keeps the coordinate axes as its basis.
pub fn symmetric_eigen(m: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let scale = a.abs().max(d.abs()).max(f64::MIN_POSITIVE);
    if b.abs() <= 1e-15 * scale {
        return ([a, d], [[1.0, 0.0], [0.0, 1.0]]);
    }
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let rad = (half_diff * half_diff + b * b).sqrt();
    let l1 = mean + rad;
    let l2 = mean - rad;
    // eigenvector for l1 is (b, l1 - a), normalised; order so that column 0
    // leans towards the first axis.
    let v1 = normalize([b, l1 - a]);
    let v2 = normalize([b, l2 - a]);
    if v1[0].abs() >= v2[0].abs() {
        ([l1, l2], [[v1[0], v2[0]], [v1[1], v2[1]]])
    } else {
        ([l2, l1], [[v2[0], v1[0]], [v2[1], v1[1]]])
    }
}

fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

/// Order-0 Bessel function of the first kind by its power series.
///
/// Accurate to roundoff for `|x| <= 5`, which covers the first zero.
pub fn bessel_j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// First positive zero of `J0`, found once by bisection on `(2, 3)`.
pub fn bessel_j0_first_zero() -> f64 {
    static P0: OnceLock<f64> = OnceLock::new();
    *P0.get_or_init(|| {
        let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
        debug_assert!(bessel_j0_series(lo) > 0.0 && bessel_j0_series(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if bessel_j0_series(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Sufficient condition for a core-condensed second field in the
/// single-condensate case: `p0 / sqrt(alpha - beta' R^2 eta^(2 lambda)) < eta`.
///
/// `r_bound` is the constant in the assumed bound `f <= R r^lambda` on `[0, 1]`.
pub fn existence_condition_1vev(
    params: &CouplingParameters,
    r_bound: f64,
    eta: f64,
    lambda: f64,
) -> Result<bool> {
    validate_parameters(params, &ProblemSpec::one_vev(1)?)?;
    if !(r_bound > 0.0) {
        return Err(Error::InvalidArgument(format!("R must be positive (got {r_bound})")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1) (got {eta})")));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive (got {lambda})")));
    }
    let radicand = params.alpha - params.beta_prime * r_bound * r_bound * eta.powf(2.0 * lambda);
    if !(radicand > 0.0) {
        return Err(Error::RadicandNonpositive { radicand });
    }
    Ok(bessel_j0_first_zero() / radicand.sqrt() < eta)
}
