//! Shooting for the profile pair.
//!
//! Each single-field problem ("g given f", "f given g") is solved by bisection
//! on a bracket whose endpoints fall in complementary outcome classes. The
//! coupled problem is solved by alternating the two single-field solves until
//! the pair stops changing, or directly by a multiple-shooting Newton solve.

mod bracket;
mod coupled;
mod fixed_point;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{EventKind, EventRecord, FieldId, IntegratorControls, Trajectory};
use crate::model::{
    symmetric_eigen, vacuum_mass_matrix, CouplingParameters, ProblemSpec, VacuumState, VevCase,
};
use crate::profile::RadialProfile;

pub use bracket::{bracket_search, uniqueness_probe, UniquenessProbe};
pub use coupled::{coupled_shoot, coupled_shoot_seeded, CoupledDiagnostics};
pub use fixed_point::{
    check_monotone_regime, constant_solution, fixed_point_solve, fixed_point_solve_traced, shoot_f_given_g, shoot_g_given_f, FixedPointTrace,
};

/// Outcome class of a single shot.
///
/// `S1`/`S2` belong to the 1VEV `g` problem, `S3`/`S4` to the 1VEV `f`
/// problem, `S5`/`S6` and `S7`/`S8` to the 2VEV `g` and `f` problems.
/// Even tags are the classes in which the field crosses its target first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShotClass {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    /// Reached `r_max` without an event.
    Neither,
}

impl ShotClass {
    /// The field crossed its target (or zero, for the 1VEV `g`) first.
    pub fn is_crossing(&self) -> bool {
        matches!(self, ShotClass::S2 | ShotClass::S4 | ShotClass::S6 | ShotClass::S8)
    }
}

/// Which shooting parameter a bracket refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamKind {
    /// Origin slope coefficient of `f`.
    D,
    /// `g(0)` in the 1VEV case.
    B,
    /// Origin coefficient of `g` in the 2VEV case.
    C,
}

impl ParamKind {
    pub fn field(&self) -> FieldId {
        match self {
            ParamKind::D => FieldId::F,
            ParamKind::B | ParamKind::C => FieldId::G,
        }
    }

    pub fn for_field(case: VevCase, field: FieldId) -> Self {
        match (case, field) {
            (_, FieldId::F) => ParamKind::D,
            (VevCase::OneVev, FieldId::G) => ParamKind::B,
            (VevCase::TwoVev, FieldId::G) => ParamKind::C,
        }
    }
}

/// `(low-parameter class, high-parameter class)` of a single-field problem.
pub fn class_pair(case: VevCase, field: FieldId) -> (ShotClass, ShotClass) {
    match (case, field) {
        (VevCase::OneVev, FieldId::G) => (ShotClass::S2, ShotClass::S1),
        (VevCase::OneVev, FieldId::F) => (ShotClass::S3, ShotClass::S4),
        (VevCase::TwoVev, FieldId::G) => (ShotClass::S5, ShotClass::S6),
        (VevCase::TwoVev, FieldId::F) => (ShotClass::S7, ShotClass::S8),
    }
}

/// Maps the terminating event of a shot to its outcome class.
///
/// `ReachedRmax` maps to `Neither`; see [`bracket_search`] for how such shots
/// are assigned to a side.
pub fn classify_shot(traj: &Trajectory, event: &EventRecord, case: VevCase, which: FieldId) -> Result<ShotClass> {
    let span = traj.r_start().min(traj.r_end())..=traj.r_start().max(traj.r_end());
    if !span.contains(&event.r_event) {
        return Err(Error::Unclassifiable(format!(
            "event radius {} outside trajectory span",
            event.r_event
        )));
    }
    use EventKind::*;
    let class = match (case, which, event.kind) {
        (_, _, ReachedRmax) => ShotClass::Neither,
        (VevCase::OneVev, FieldId::G, GPrimeHitsZero) => ShotClass::S1,
        (VevCase::OneVev, FieldId::G, GCrossesZero) => ShotClass::S2,
        (VevCase::OneVev, FieldId::F, FPrimeHitsZero) => ShotClass::S3,
        (VevCase::OneVev, FieldId::F, FCrossesTarget) => ShotClass::S4,
        (VevCase::TwoVev, FieldId::G, GPrimeHitsZero) => ShotClass::S5,
        (VevCase::TwoVev, FieldId::G, GCrossesTarget) => ShotClass::S6,
        (VevCase::TwoVev, FieldId::F, FPrimeHitsZero) => ShotClass::S7,
        (VevCase::TwoVev, FieldId::F, FCrossesTarget) => ShotClass::S8,
        (_, _, Diverged) => {
            return Err(Error::Unclassifiable(format!("shot diverged at r = {}", event.r_event)))
        }
        (c, w, k) => {
            return Err(Error::Unclassifiable(format!(
                "event {k:?} does not belong to the {} {w:?} problem",
                c.as_str()
            )))
        }
    };
    Ok(class)
}

/// Parameter interval whose endpoints shoot into complementary classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingBracket {
    pub lo: f64,
    pub hi: f64,
    pub lo_class: ShotClass,
    pub hi_class: ShotClass,
    pub param_kind: ParamKind,
}

impl ShootingBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Numerical controls shared by all solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverControls {
    /// Far-field cutoff; `None` selects [`default_r_max`].
    pub r_max: Option<f64>,
    /// Series start radius; `None` selects [`crate::integrate::default_r_eps`].
    pub r_eps: Option<f64>,
    /// Relative bracket width at which parameter bisection stops.
    pub shoot_tol: f64,
    /// Sup-norm change between outer iterations at which the pair is accepted.
    pub fp_tol: f64,
    pub max_outer: usize,
    pub max_expansions: usize,
    /// Relative disagreement at which two bracketing shots count as separated.
    pub sep_tol: f64,
    pub max_stages: usize,
    /// Sample spacing of frozen fields.
    pub field_spacing: f64,
    /// Output grid intervals; `None` selects `r_max / output_spacing`.
    pub grid: Option<usize>,
    pub output_spacing: f64,
    pub integrator: IntegratorControls,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for SolverControls {
    fn default() -> Self {
        Self {
            r_max: None,
            r_eps: None,
            shoot_tol: 1e-12,
            fp_tol: 1e-8,
            max_outer: 100,
            max_expansions: 200,
            sep_tol: 1e-7,
            max_stages: 64,
            field_spacing: 0.01,
            grid: None,
            output_spacing: 0.02,
            integrator: IntegratorControls::default(),
            newton_tol: 1e-11,
            max_newton: 30,
        }
    }
}

impl SolverControls {
    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = Some(r_max);
        self
    }

    pub fn resolved_r_max(&self, params: &CouplingParameters, case: VevCase, vac: &VacuumState) -> f64 {
        self.r_max.unwrap_or_else(|| default_r_max(params, case, vac))
    }

    pub fn resolved_r_eps(&self, params: &CouplingParameters) -> f64 {
        self.r_eps.unwrap_or_else(|| crate::integrate::default_r_eps(params))
    }

    pub fn grid_intervals(&self, r_max: f64) -> usize {
        self.grid
            .unwrap_or_else(|| (r_max / self.output_spacing).round().max(8.0) as usize)
    }

    pub fn field_intervals(&self, r_max: f64) -> usize {
        (r_max / self.field_spacing).ceil().max(8.0) as usize
    }

    pub fn check(&self) -> Result<()> {
        let positive = [
            ("shoot_tol", self.shoot_tol),
            ("fp_tol", self.fp_tol),
            ("sep_tol", self.sep_tol),
            ("field_spacing", self.field_spacing),
            ("output_spacing", self.output_spacing),
            ("newton_tol", self.newton_tol),
            ("rtol", self.integrator.rtol),
            ("atol", self.integrator.atol),
            ("h_max", self.integrator.h_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive (got {v})")));
            }
        }
        if let Some(r) = self.r_max {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidArgument(format!("r_max must be positive (got {r})")));
            }
        }
        if let Some(g) = self.grid {
            if g < 8 {
                return Err(Error::GridTooCoarse { points: g + 1 });
            }
        }
        Ok(())
    }
}

/// Smallest and largest linearized decay rates about the vacuum.
pub fn vacuum_rates(params: &CouplingParameters, case: VevCase, vac: &VacuumState) -> (f64, f64) {
    let (lam, _) = symmetric_eigen(vacuum_mass_matrix(params, case, vac));
    let lo = lam[0].min(lam[1]).max(0.0).sqrt();
    let hi = lam[0].max(lam[1]).max(0.0).sqrt();
    (lo, hi)
}

/// `40 max(1, 1 / mu_min)` rounded up to a whole number, with `mu_min` the
/// slowest linearized decay rate; whole radii then fall on the output grid.
pub fn default_r_max(params: &CouplingParameters, case: VevCase, vac: &VacuumState) -> f64 {
    let (mu_min, _) = vacuum_rates(params, case, vac);
    if mu_min > 0.0 {
        (40.0 * (1.0 / mu_min).max(1.0)).ceil()
    } else {
        40.0
    }
}

/// How a [`ProfileSolution`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    FixedPoint,
    Coupled,
    /// The constant vacuum of the `n = m = 0` two-condensate problem.
    Constant,
    /// Energy relaxation on a finite-difference grid.
    GradientFlow,
}

impl SolveMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveMethod::FixedPoint => "fixed_point",
            SolveMethod::Coupled => "coupled",
            SolveMethod::Constant => "constant",
            SolveMethod::GradientFlow => "gradient_flow",
        }
    }
}

impl std::str::FromStr for SolveMethod {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_point" => Ok(SolveMethod::FixedPoint),
            "coupled" => Ok(SolveMethod::Coupled),
            "constant" => Ok(SolveMethod::Constant),
            "gradient_flow" => Ok(SolveMethod::GradientFlow),
            other => Err(crate::error::Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// A solved profile pair on a uniform output grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub profile: RadialProfile,
    /// Origin coefficient of `f`.
    pub d0: f64,
    /// `b0 = g(0)` (1VEV) or the origin coefficient `C0` of `g` (2VEV).
    pub c0: f64,
    pub case: VevCase,
    pub params: CouplingParameters,
    pub spec: ProblemSpec,
    pub vacuum: VacuumState,
    pub r_max: f64,
    pub r_eps: f64,
    /// Outer fixed-point iterations (Newton iterations for the coupled solve).
    pub iterations: usize,
    pub method: SolveMethod,
}

impl ProfileSolution {
    /// `(target for f, target for g)` at infinity.
    pub fn targets(&self) -> (f64, f64) {
        (self.vacuum.a, self.vacuum.b)
    }

    /// Output grid spacing.
    pub fn spacing(&self) -> f64 {
        self.profile.uniform_spacing().unwrap_or(0.0)
    }
}

/// Far-field targets for single-field shots. The 1VEV targets need only a
/// bounded potential, so the `g = 0` branch can be shot outside the strict
/// 1VEV regime.
pub(crate) fn shot_vacuum(params: &CouplingParameters, spec: &ProblemSpec) -> Result<VacuumState> {
    spec.check()?;
    match spec.case {
        VevCase::OneVev => {
            params.check_bounded()?;
            Ok(VacuumState {
                a: 1.0,
                b: 0.0,
                v_infinity: 0.0,
            })
        }
        VevCase::TwoVev => crate::model::validate_parameters(params, spec),
    }
}
