//! Single-field solves and the alternating outer iteration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::FieldId;
use crate::model::{validate_parameters, CouplingParameters, ProblemSpec, VevCase};
use crate::profile::{FrozenField, RadialProfile};

use super::bracket::{prepared_shooter, Side};
use super::{ProfileSolution, SolveMethod, SolverControls};

/// Result of one single-field solve.
#[derive(Debug, Clone)]
pub(crate) struct FieldOutcome {
    pub param: f64,
    pub field: FrozenField,
    pub stages: usize,
}

pub(crate) fn solve_field(
    field: FieldId,
    frozen: &FrozenField,
    params: &CouplingParameters,
    spec: &ProblemSpec,
    controls: &SolverControls,
    warm: Option<f64>,
) -> Result<FieldOutcome> {
    let shooter = prepared_shooter(field, frozen, params, spec, controls)?;
    let r_max = shooter.r_max;
    let target = shooter.target();
    let winding = match field {
        FieldId::F => spec.n,
        FieldId::G => spec.m,
    };
    if spec.case == VevCase::TwoVev && winding == 0 {
        // zero winding only occurs in the n = m = 0 problem, solved by the constant vacuum
        return Ok(FieldOutcome {
            param: target,
            field: FrozenField::constant(target, r_max),
            stages: 0,
        });
    }
    if field == FieldId::G && spec.case == VevCase::OneVev {
        // With no turning-back shot even for a vanishing core value only g = 0 solves.
        let tiny = 1e-10 * shooter.b_limit();
        if shooter.shoot(tiny)?.side == Side::High {
            return Ok(FieldOutcome {
                param: 0.0,
                field: FrozenField::zero(r_max),
                stages: 0,
            });
        }
    }
    let (bracket, lo, hi) = match warm {
        Some(p) if p > 0.0 => shooter.bracket_near(p, 1e-6)?,
        _ => shooter.bracket_from(shooter.seed(), 2.0)?,
    };
    let sol = shooter.solve(bracket, lo, hi)?;
    if field == FieldId::F && spec.case == VevCase::TwoVev {
        check_core_ratio(&sol.field, spec.n, shooter.r_eps, r_max.min(1.0))?;
    }
    Ok(FieldOutcome {
        param: sol.param,
        field: sol.field,
        stages: sol.stages,
    })
}

/// In the 2VEV case the far field is `f - A ~ -2AB^2(beta2 n^2 - beta' m^2) / (det r^2)`
/// and symmetrically for `g`; when either numerator is negative the profile
/// overshoots its limit and no monotone solution exists to shoot for.
pub fn check_monotone_regime(params: &CouplingParameters, spec: &ProblemSpec) -> Result<()> {
    if spec.case != VevCase::TwoVev || spec.is_trivial() {
        return Ok(());
    }
    let n2 = f64::from(spec.n * spec.n);
    let m2 = f64::from(spec.m * spec.m);
    if params.beta_prime * m2 > params.beta2 * n2 {
        return Err(Error::PreconditionViolation(format!(
            "beta' m^2 = {} exceeds beta2 n^2 = {}: f approaches A from above",
            params.beta_prime * m2,
            params.beta2 * n2
        )));
    }
    if params.beta_prime * n2 > params.beta1 * m2 {
        return Err(Error::PreconditionViolation(format!(
            "beta' n^2 = {} exceeds beta1 m^2 = {}: g approaches B from above",
            params.beta_prime * n2,
            params.beta1 * m2
        )));
    }
    Ok(())
}

/// `r^-n f` must not increase on `[r_eps, r1]`.
fn check_core_ratio(f: &FrozenField, n: u32, r_eps: f64, r1: f64) -> Result<()> {
    let k = 200;
    let mut prev = f64::INFINITY;
    let mut peak: f64 = 0.0;
    for i in 0..=k {
        let r = r_eps + (r1 - r_eps) * i as f64 / k as f64;
        let q = f.value(r) / r.powi(n as i32);
        peak = peak.max(q.abs());
        if q > prev + 1e-9 * peak {
            return Err(Error::PreconditionViolation(format!(
                "r^-n f increases near r = {r:.4}"
            )));
        }
        prev = q;
    }
    Ok(())
}

/// Solves the `g` equation with `f` held fixed; returns `b0` (1VEV) or `C0` (2VEV) and the profile.
///
/// In the 1VEV case a vanishing `b0` with `g = 0` is returned when no
/// core-condensed solution exists for this `f`.
pub fn shoot_g_given_f(
    frozen_f: &FrozenField,
    params: &CouplingParameters,
    spec: &ProblemSpec,
    controls: &SolverControls,
) -> Result<(f64, FrozenField)> {
    let out = solve_field(FieldId::G, frozen_f, params, spec, controls, None)?;
    Ok((out.param, out.field))
}

/// Solves the `f` equation with `g` held fixed; returns `D0` and the profile.
pub fn shoot_f_given_g(
    frozen_g: &FrozenField,
    params: &CouplingParameters,
    spec: &ProblemSpec,
    controls: &SolverControls,
) -> Result<(f64, FrozenField)> {
    let out = solve_field(FieldId::F, frozen_g, params, spec, controls, None)?;
    Ok((out.param, out.field))
}

/// Per-iteration record of the outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointTrace {
    /// `max(|f_k - f_(k-1)|, |g_k - g_(k-1)|)` in sup norm.
    pub residuals: Vec<f64>,
    pub d_values: Vec<f64>,
    pub c_values: Vec<f64>,
    /// Iteration at which half-step damping was switched on.
    pub damped_from: Option<usize>,
    /// Restart stages used by the last `f` and `g` solves.
    pub stages: (usize, usize),
}

/// The constant `(A, B)` solution of the `n = m = 0` two-condensate problem.
pub fn constant_solution(params: &CouplingParameters, spec: &ProblemSpec, controls: &SolverControls) -> Result<ProfileSolution> {
    let vac = validate_parameters(params, spec)?;
    if !spec.is_trivial() {
        return Err(Error::InvalidSpec("constant solution requires 2vev with n = m = 0".into()));
    }
    let r_max = controls.resolved_r_max(params, spec.case, &vac);
    let grid = controls.grid_intervals(r_max);
    let profile = RadialProfile::sample_uniform(r_max, grid, |_| [vac.a, 0.0, vac.b, 0.0]);
    Ok(ProfileSolution {
        profile,
        d0: vac.a,
        c0: vac.b,
        case: spec.case,
        params: *params,
        spec: *spec,
        vacuum: vac,
        r_max,
        r_eps: controls.resolved_r_eps(params),
        iterations: 0,
        method: SolveMethod::Constant,
    })
}

/// Alternates `g` given `f` and `f` given `g` until neither profile changes by more than `fp_tol`.
///
/// The 1VEV iteration starts from `f0 = r^n / (1 + r^n)`, the 2VEV one from `f0 = A tanh^n(r)`.
pub fn fixed_point_solve(params: &CouplingParameters, spec: &ProblemSpec, controls: &SolverControls) -> Result<ProfileSolution> {
    fixed_point_solve_traced(params, spec, controls).map(|(s, _)| s)
}

/// [`fixed_point_solve`] that also returns the iteration record.
pub fn fixed_point_solve_traced(
    params: &CouplingParameters,
    spec: &ProblemSpec,
    controls: &SolverControls,
) -> Result<(ProfileSolution, FixedPointTrace)> {
    controls.check()?;
    let vac = validate_parameters(params, spec)?;
    if spec.is_trivial() {
        let sol = constant_solution(params, spec, controls)?;
        return Ok((
            sol,
            FixedPointTrace {
                residuals: Vec::new(),
                d_values: Vec::new(),
                c_values: Vec::new(),
                damped_from: None,
                stages: (0, 0),
            },
        ));
    }
    check_monotone_regime(params, spec)?;
    let r_max = controls.resolved_r_max(params, spec.case, &vac);
    let local = SolverControls {
        r_max: Some(r_max),
        ..controls.clone()
    };
    let intervals = local.field_intervals(r_max);
    let mut f = match spec.case {
        VevCase::OneVev => FrozenField::rational_seed(vac.a, spec.n, r_max, intervals),
        // the linearized far-field deficit of f; a purely exponential approach
        // leaves the first g so far below B that f then overshoots A
        VevCase::TwoVev => {
            let n2 = f64::from(spec.n * spec.n);
            let m2 = f64::from(spec.m * spec.m);
            let tail = (params.beta2 * n2 - params.beta_prime * m2) / (2.0 * vac.a * vac.a * params.quartic_determinant());
            FrozenField::tanh_tail_seed(vac.a, spec.n, tail, r_max, intervals)
        }
    };
    let mut g_prev = FrozenField::zero(r_max);
    let (mut warm_f, mut warm_g) = (None, None);
    let mut trace = FixedPointTrace {
        residuals: Vec::new(),
        d_values: Vec::new(),
        c_values: Vec::new(),
        damped_from: None,
        stages: (0, 0),
    };
    let mut rises = 0;

    for it in 1..=local.max_outer {
        let gs = solve_field(FieldId::G, &f, params, spec, &local, warm_g)?;
        let fs = solve_field(FieldId::F, &gs.field, params, spec, &local, warm_f)?;
        let res = fs.field.sup_distance(&f).max(gs.field.sup_distance(&g_prev));
        if let Some(&last) = trace.residuals.last() {
            if res > last {
                rises += 1;
                if rises >= 2 && trace.damped_from.is_none() {
                    trace.damped_from = Some(it);
                }
            }
        }
        trace.residuals.push(res);
        trace.d_values.push(fs.param);
        trace.c_values.push(gs.param);
        trace.stages = (fs.stages, gs.stages);
        warm_f = Some(fs.param);
        warm_g = Some(gs.param);

        if res < local.fp_tol {
            let profile = RadialProfile::sample_uniform(r_max, local.grid_intervals(r_max), |r| {
                let jf = fs.field.jet(r);
                let jg = gs.field.jet(r);
                [jf[0], jf[1], jg[0], jg[1]]
            });
            let sol = ProfileSolution {
                profile,
                d0: fs.param,
                c0: gs.param,
                case: spec.case,
                params: *params,
                spec: *spec,
                vacuum: vac,
                r_max,
                r_eps: local.resolved_r_eps(params),
                iterations: it,
                method: SolveMethod::FixedPoint,
            };
            return Ok((sol, trace));
        }
        f = if trace.damped_from.is_some() {
            f.blend(&fs.field, 0.5)
        } else {
            fs.field
        };
        g_prev = gs.field;
    }
    Err(Error::NoConvergence {
        iterations: local.max_outer,
        residual: *trace.residuals.last().unwrap_or(&f64::NAN),
    })
}
