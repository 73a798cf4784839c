//! Single-field shooting: bracket construction and restarted bisection.
//!
//! Near the true parameter the shots follow the solution for a while and
//! then peel off exponentially. Bisection in the parameter alone therefore
//! only reaches the radius where the bracket's shots separate at machine
//! resolution. From there the problem is restarted: the two bracketing
//! states are interpolated and the interpolation weight is bisected, which
//! carries the solution on by another stretch. Stages repeat out to `r_max`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{
    f_correction, g_correction, integrate_from, EventSet, FieldId, Mode, RadialOde,
    Sample, SeriesStart, SeriesTerm, Trajectory,
};
use crate::model::{CouplingParameters, ProblemSpec, RadialState, VacuumState, VevCase};
use crate::profile::FrozenField;

use super::{class_pair, classify_shot, shot_vacuum, ParamKind, ShootingBracket, ShotClass, SolverControls};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Low,
    High,
}

#[derive(Debug, Clone)]
pub(crate) struct Shot {
    pub traj: Trajectory,
    pub class: ShotClass,
    pub side: Side,
}

/// One single-field problem: the other field frozen.
pub(crate) struct Shooter<'a> {
    pub params: CouplingParameters,
    pub spec: ProblemSpec,
    pub vac: VacuumState,
    pub field: FieldId,
    pub frozen: &'a FrozenField,
    pub r_eps: f64,
    pub r_max: f64,
    pub controls: &'a SolverControls,
    events: EventSet,
    low: ShotClass,
    high: ShotClass,
}

/// Single-field solution: parameter, stitched trajectory and sampled field.
#[derive(Debug, Clone)]
pub(crate) struct SingleSolution {
    pub param: f64,
    pub field: FrozenField,
    pub stages: usize,
}

impl<'a> Shooter<'a> {
    pub fn new(
        params: CouplingParameters,
        spec: ProblemSpec,
        field: FieldId,
        frozen: &'a FrozenField,
        r_max: f64,
        controls: &'a SolverControls,
    ) -> Result<Self> {
        let vac = shot_vacuum(&params, &spec)?;
        if field == FieldId::G && spec.case == VevCase::OneVev && !(params.alpha > 0.0) {
            return Err(Error::RegimeViolation(crate::error::Inequality::AlphaPositive));
        }
        let (low, high) = class_pair(spec.case, field);
        Ok(Self {
            params,
            spec,
            vac,
            field,
            frozen,
            r_eps: controls.resolved_r_eps(&params),
            r_max,
            controls,
            events: EventSet::for_shot(spec.case, field, &vac),
            low,
            high,
        })
    }

    pub fn kind(&self) -> ParamKind {
        ParamKind::for_field(self.spec.case, self.field)
    }

    fn ode(&self) -> RadialOde<'a> {
        let mode = match self.field {
            FieldId::F => Mode::GivenG(self.frozen),
            FieldId::G => Mode::GivenF(self.frozen),
        };
        RadialOde::new(self.params, self.spec, mode)
    }

    /// Far-field value of the shot field.
    pub fn target(&self) -> f64 {
        match self.field {
            FieldId::F => self.vac.a,
            FieldId::G => self.vac.b,
        }
    }

    fn idx(&self) -> usize {
        match self.field {
            FieldId::F => 0,
            FieldId::G => 2,
        }
    }

    /// Upper limit of the 1VEV `g(0)` range.
    pub fn b_limit(&self) -> f64 {
        (self.params.alpha / self.params.beta2).sqrt()
    }

    /// Scale-heuristic starting guess for the bracket search.
    pub fn seed(&self) -> f64 {
        match self.kind() {
            ParamKind::D => self.vac.a * self.params.beta1.powf(0.5 * f64::from(self.spec.n)),
            ParamKind::B => 0.5 * self.b_limit(),
            ParamKind::C => {
                let b = self.vac.b;
                b * (self.params.beta2 * b * b).powf(0.5 * f64::from(self.spec.m))
            }
        }
    }

    /// Decay rate of the shot field about its target, used to compare slopes with values.
    fn kappa_ref(&self) -> f64 {
        let k = match (self.spec.case, self.field) {
            (_, FieldId::F) => (2.0 * self.params.beta1).sqrt() * self.vac.a,
            (VevCase::TwoVev, FieldId::G) => (2.0 * self.params.beta2).sqrt() * self.vac.b,
            (VevCase::OneVev, FieldId::G) => (self.params.beta_prime - self.params.alpha).abs().sqrt(),
        };
        k.max(1e-3)
    }

    pub fn start(&self, p: f64) -> Result<SeriesStart> {
        let frozen_term = |power| SeriesTerm {
            lead: 0.0,
            power,
            corr: 0.0,
        };
        match self.kind() {
            ParamKind::D => {
                if !(p > 0.0) {
                    return Err(Error::InvalidShoot {
                        param: p,
                        reason: "D must be positive".into(),
                    });
                }
                let g0 = self.frozen.value(0.0);
                SeriesStart::new(
                    self.r_eps,
                    SeriesTerm {
                        lead: p,
                        power: self.spec.n,
                        corr: f_correction(&self.params, self.spec.n, g0),
                    },
                    frozen_term(self.spec.m),
                )
            }
            ParamKind::B => {
                if !(p > 0.0 && p * p < self.params.alpha / self.params.beta2) {
                    return Err(Error::InvalidShoot {
                        param: p,
                        reason: format!("b must satisfy 0 < b^2 < alpha/beta2 = {}", self.params.alpha / self.params.beta2),
                    });
                }
                SeriesStart::new(
                    self.r_eps,
                    frozen_term(self.spec.n),
                    SeriesTerm {
                        lead: p,
                        power: 0,
                        corr: g_correction(&self.params, 0, p),
                    },
                )
            }
            ParamKind::C => {
                if !(p > 0.0) {
                    return Err(Error::InvalidShoot {
                        param: p,
                        reason: "C must be positive".into(),
                    });
                }
                SeriesStart::new(
                    self.r_eps,
                    frozen_term(self.spec.n),
                    SeriesTerm {
                        lead: p,
                        power: self.spec.m,
                        corr: g_correction(&self.params, self.spec.m, 0.0),
                    },
                )
            }
        }
    }

    fn side_of(&self, class: ShotClass) -> Result<Side> {
        if class == self.low {
            Ok(Side::Low)
        } else if class == self.high {
            Ok(Side::High)
        } else {
            Err(Error::Unclassifiable(format!("class {class:?} outside the {:?} problem", self.kind())))
        }
    }

    /// Local quasi-static equilibrium of the shot field, its slope, and the
    /// local linear growth rate.
    ///
    /// The algebraic balance `s = y^2` is corrected by `(y'' + y'/r) / kappa^2`,
    /// which removes the `O(r^-4)` mismatch with the true far field.
    fn local_equilibrium(&self, r: f64) -> (f64, f64, f64) {
        let p = &self.params;
        let [o, od, odd] = self.frozen.jet(r);
        let cross = 2.0 * p.beta_prime * (od * od + o * odd);
        let (s, ds, dds, k2_per_s) = match (self.spec.case, self.field) {
            (_, FieldId::F) => {
                let n2 = f64::from(self.spec.n * self.spec.n);
                (
                    1.0 - (p.beta_prime * o * o + n2 / (r * r)) / p.beta1,
                    -(2.0 * p.beta_prime * o * od - 2.0 * n2 / r.powi(3)) / p.beta1,
                    -(cross + 6.0 * n2 / r.powi(4)) / p.beta1,
                    2.0 * p.beta1,
                )
            }
            (VevCase::TwoVev, FieldId::G) => {
                let m2 = f64::from(self.spec.m * self.spec.m);
                (
                    (p.alpha - p.beta_prime * o * o - m2 / (r * r)) / p.beta2,
                    (-2.0 * p.beta_prime * o * od + 2.0 * m2 / r.powi(3)) / p.beta2,
                    (-cross - 6.0 * m2 / r.powi(4)) / p.beta2,
                    2.0 * p.beta2,
                )
            }
            (VevCase::OneVev, FieldId::G) => {
                let k2 = p.beta_prime * o * o - p.alpha;
                return (0.0, 0.0, k2.max(1e-6).sqrt());
            }
        };
        if s <= 0.0 {
            return (0.0, 0.0, k2_per_s.sqrt() * 0.5);
        }
        let y = s.sqrt();
        let dy = ds / (2.0 * y);
        let ddy = (dds - 2.0 * dy * dy) / (2.0 * y);
        let k2 = k2_per_s * s;
        let corr = (ddy + dy / r) / k2;
        // the correction falls off like r^-4
        (y + corr, dy - 4.0 * corr / r, k2.sqrt())
    }

    /// Assigns a shot that reached `r_max` to a side by the sign of its
    /// growing-mode component about the local equilibrium.
    fn resolve(&self, traj: &Trajectory) -> Side {
        let s = traj.last();
        let r = s.r;
        let (y_eq, dy_eq, kappa) = self.local_equilibrium(r);
        let i = self.idx();
        let dev = s.y[i] - y_eq;
        let ddev = s.y[i + 1] - dy_eq;
        let proj = ddev + (kappa + 0.5 / r) * dev;
        // the 1VEV g approaches its target from above, every other field from below
        let orient = if self.spec.case == VevCase::OneVev && self.field == FieldId::G {
            -1.0
        } else {
            1.0
        };
        let crossing = proj * orient > 0.0;
        let crossing_side = if self.low.is_crossing() { Side::Low } else { Side::High };
        if crossing {
            crossing_side
        } else if crossing_side == Side::Low {
            Side::High
        } else {
            Side::Low
        }
    }

    pub fn shoot_from(&self, r0: f64, y0: RadialState) -> Result<Shot> {
        let ode = self.ode();
        let (traj, event) = integrate_from(r0, y0, &ode, self.r_max, &self.events, &self.controls.integrator)?;
        let class = classify_shot(&traj, &event, self.spec.case, self.field)?;
        let side = if class == ShotClass::Neither {
            self.resolve(&traj)
        } else {
            self.side_of(class)?
        };
        Ok(Shot {
            traj,
            class,
            side,
        })
    }

    pub fn shoot(&self, p: f64) -> Result<Shot> {
        let start = self.start(p)?;
        self.shoot_from(start.r_eps, start.state)
    }

    fn class_of(&self, side: Side) -> ShotClass {
        match side {
            Side::Low => self.low,
            Side::High => self.high,
        }
    }

    fn make_bracket(&self, lo: f64, hi: f64) -> ShootingBracket {
        ShootingBracket {
            lo,
            hi,
            lo_class: self.low,
            hi_class: self.high,
            param_kind: self.kind(),
        }
    }

    /// Geometric bracket expansion from `seed` by `factor`.
    pub fn bracket_from(&self, seed: f64, factor: f64) -> Result<(ShootingBracket, Shot, Shot)> {
        let not_found = |reason: String| Error::BracketNotFound {
            kind: format!("{:?}", self.kind()),
            reason,
        };
        let is_b = self.kind() == ParamKind::B;
        let b_top = self.b_limit() * (1.0 - 1e-6);
        let mut p = if is_b { seed.min(b_top) } else { seed };
        let mut shot = self.shoot(p)?;
        for _ in 0..self.controls.max_expansions {
            let q = match shot.side {
                Side::Low => {
                    if is_b {
                        if p >= b_top {
                            return Err(not_found(format!(
                                "g(0) = {p} just below sqrt(alpha/beta2) still shoots into {:?}",
                                self.low
                            )));
                        }
                        (p * factor).min(b_top)
                    } else {
                        p * factor
                    }
                }
                Side::High => {
                    if is_b && p < 1e-12 * self.b_limit() {
                        return Err(not_found(format!(
                            "no g(0) down to {p:e} shoots into {:?}: only g = 0 exists",
                            self.low
                        )));
                    }
                    p / factor
                }
            };
            if !q.is_finite() || q <= 0.0 {
                break;
            }
            let next = self.shoot(q)?;
            if next.side != shot.side {
                let (lo, hi, slo, shi) = if next.side == Side::High {
                    (p, q, shot, next)
                } else {
                    (q, p, next, shot)
                };
                return Ok((self.make_bracket(lo, hi), slo, shi));
            }
            p = q;
            shot = next;
        }
        Err(not_found(format!(
            "{} expansions from {seed} by {factor} saw only {:?}",
            self.controls.max_expansions,
            self.class_of(shot.side)
        )))
    }

    /// Bracket around a previous solution `p0`, widening by 4 from relative `delta`.
    pub fn bracket_near(&self, p0: f64, delta: f64) -> Result<(ShootingBracket, Shot, Shot)> {
        let is_b = self.kind() == ParamKind::B;
        let b_top = self.b_limit() * (1.0 - 1e-6);
        let mut lo: Option<(f64, Shot)> = None;
        let mut hi: Option<(f64, Shot)> = None;
        let mut d = delta;
        for _ in 0..24 {
            let cands = [p0 / (1.0 + d), if is_b { (p0 * (1.0 + d)).min(b_top) } else { p0 * (1.0 + d) }];
            for (k, &c) in cands.iter().enumerate() {
                let need = if k == 0 { lo.is_none() } else { hi.is_none() };
                if !need {
                    continue;
                }
                let s = match self.shoot(c) {
                    Ok(s) => s,
                    Err(Error::InvalidShoot { .. }) => continue,
                    Err(e) => return Err(e),
                };
                match s.side {
                    Side::Low if lo.as_ref().map_or(true, |(p, _)| c > *p) => lo = Some((c, s)),
                    Side::High if hi.as_ref().map_or(true, |(p, _)| c < *p) => hi = Some((c, s)),
                    _ => {}
                }
            }
            if let (Some((a, _)), Some((b, _))) = (&lo, &hi) {
                if a < b {
                    let (a, sa) = lo.take().unwrap();
                    let (b, sb) = hi.take().unwrap();
                    return Ok((self.make_bracket(a, b), sa, sb));
                }
                // classes out of order: fall back to the seeded search
                break;
            }
            d *= 4.0;
        }
        self.bracket_from(self.seed(), 2.0)
    }

    /// Relative disagreement between two shots at the samples of `a` after
    /// `from`; returns the last radius where they agree to `tol`.
    fn separation(&self, a: &Trajectory, b: &Trajectory, from: f64, tol: f64) -> f64 {
        let end = a.r_end().min(b.r_end());
        let i = self.idx();
        let kappa = self.kappa_ref();
        let target = self.target();
        let mut last = from;
        for s in a.samples() {
            if s.r <= from {
                continue;
            }
            if s.r > end {
                break;
            }
            let yb = b.at(s.r);
            let diff = (s.y[i] - yb[i]).abs().max((s.y[i + 1] - yb[i + 1]).abs() / kappa);
            let scale = (s.y[i] - target).abs() + s.y[i + 1].abs() / kappa;
            if !(diff <= tol * scale) {
                break;
            }
            last = s.r;
        }
        last
    }

    /// Bisects the bracket to `shoot_tol`, then restarts until the stitched
    /// trajectory reaches `r_max`.
    pub fn solve(&self, bracket: ShootingBracket, mut slo: Shot, mut shi: Shot) -> Result<SingleSolution> {
        let (mut lo, mut hi) = (bracket.lo, bracket.hi);
        while hi - lo > self.controls.shoot_tol * hi.abs() {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let s = self.shoot(mid)?;
            match s.side {
                Side::Low => {
                    lo = mid;
                    slo = s;
                }
                Side::High => {
                    hi = mid;
                    shi = s;
                }
            }
        }
        let param = 0.5 * (lo + hi);
        let start = self.start(param)?;

        let mut samples: Vec<Sample> = Vec::new();
        let mut stage_start = self.r_eps;
        let mut stages = 1;
        loop {
            let r_sep = self.separation(&slo.traj, &shi.traj, stage_start, self.controls.sep_tol);
            let done = r_sep >= self.r_max * (1.0 - 1e-12);
            let cut = if done { self.r_max } else { r_sep };
            if !done && r_sep <= stage_start {
                return Err(Error::ToleranceNotReached {
                    what: format!("{:?} shooting", self.kind()),
                    detail: format!(
                        "bracketing shots separate immediately at r = {stage_start:.6} (stage {stages}); r_max = {} may be too large",
                        self.r_max
                    ),
                });
            }
            append_average(&mut samples, &slo.traj, &shi.traj, stage_start, cut);
            if done {
                break;
            }
            stages += 1;
            if stages > self.controls.max_stages {
                return Err(Error::ToleranceNotReached {
                    what: format!("{:?} shooting", self.kind()),
                    detail: format!("{} restart stages reached only r = {r_sep:.6}", self.controls.max_stages),
                });
            }
            let (a, b) = self.restart(&slo.traj, &shi.traj, r_sep)?;
            slo = a;
            shi = b;
            stage_start = r_sep;
        }

        let traj = Trajectory::from_samples(samples);
        let i = self.idx();
        let series = start;
        let r_eps = self.r_eps;
        let field = FrozenField::from_fn(
            self.r_max,
            self.controls.field_intervals(self.r_max),
            self.target(),
            |r| {
                if r <= r_eps {
                    let (jf, jg) = series.jets(r);
                    if i == 0 {
                        jf
                    } else {
                        jg
                    }
                } else {
                    let (jf, jg) = traj.jets(r);
                    if i == 0 {
                        jf
                    } else {
                        jg
                    }
                }
            },
        );
        Ok(SingleSolution {
            param,
            field,
            stages,
        })
    }

    /// Bisects the interpolation weight between the two bracketing states at `r0`.
    fn restart(&self, lo: &Trajectory, hi: &Trajectory, r0: f64) -> Result<(Shot, Shot)> {
        let ya = lo.at(r0);
        let yb = hi.at(r0);
        let blend = |t: f64| -> RadialState {
            let mut y = ya;
            for k in 0..4 {
                y[k] = ya[k] + t * (yb[k] - ya[k]);
            }
            y
        };
        let mut sa = self.shoot_from(r0, ya)?;
        let mut sb = self.shoot_from(r0, yb)?;
        if sa.side != Side::Low || sb.side != Side::High {
            return Err(Error::ToleranceNotReached {
                what: format!("{:?} shooting", self.kind()),
                detail: format!("restart at r = {r0:.6} lost the bracket ({:?}, {:?})", sa.class, sb.class),
            });
        }
        let (mut ta, mut tb) = (0.0_f64, 1.0_f64);
        for _ in 0..64 {
            let tm = 0.5 * (ta + tb);
            let ym = blend(tm);
            if ym == blend(ta) || ym == blend(tb) {
                break;
            }
            let s = self.shoot_from(r0, ym)?;
            match s.side {
                Side::Low => {
                    ta = tm;
                    sa = s;
                }
                Side::High => {
                    tb = tm;
                    sb = s;
                }
            }
        }
        Ok((sa, sb))
    }
}

/// Appends the average of two nearly equal trajectories on `(from, to]`
/// (or `[from, to]` for the first piece), evaluated at the samples of `a`.
fn append_average(out: &mut Vec<Sample>, a: &Trajectory, b: &Trajectory, from: f64, to: f64) {
    let avg = |s: &Sample| -> Sample {
        let (jf, jg) = b.jets(s.r);
        let yb = [jf[0], jf[1], jg[0], jg[1]];
        let mut y = s.y;
        for k in 0..4 {
            y[k] = 0.5 * (s.y[k] + yb[k]);
        }
        Sample {
            r: s.r,
            y,
            acc: [0.5 * (s.acc[0] + jf[2]), 0.5 * (s.acc[1] + jg[2])],
        }
    };
    let first = out.is_empty();
    for s in a.samples() {
        if s.r < from || (!first && s.r <= from) || s.r >= to {
            continue;
        }
        out.push(avg(s));
    }
    let (jf, jg) = a.jets(to);
    let end = Sample {
        r: to,
        y: [jf[0], jf[1], jg[0], jg[1]],
        acc: [jf[2], jg[2]],
    };
    out.push(avg(&end));
}

/// Finds a bracket for `kind` with the other field held at `frozen`.
pub fn bracket_search(
    kind: ParamKind,
    case: VevCase,
    frozen: &FrozenField,
    params: &CouplingParameters,
    spec: &ProblemSpec,
    controls: &SolverControls,
) -> Result<ShootingBracket> {
    if spec.case != case {
        return Err(Error::InvalidArgument(format!(
            "case {} does not match problem spec {}",
            case.as_str(),
            spec.case.as_str()
        )));
    }
    if ParamKind::for_field(case, kind.field()) != kind {
        return Err(Error::InvalidArgument(format!("{kind:?} is not a {} parameter", case.as_str())));
    }
    let shooter = prepared_shooter(kind.field(), frozen, params, spec, controls)?;
    let (b, _, _) = shooter.bracket_from(shooter.seed(), 2.0)?;
    Ok(b)
}

/// Validates the frozen field and builds a shooter for `field`.
pub(crate) fn prepared_shooter<'a>(
    field: FieldId,
    frozen: &'a FrozenField,
    params: &CouplingParameters,
    spec: &ProblemSpec,
    controls: &'a SolverControls,
) -> Result<Shooter<'a>> {
    controls.check()?;
    use crate::profile::Monotone;
    let dir = match (spec.case, field) {
        (_, FieldId::G) => Monotone::Increasing,
        (VevCase::OneVev, FieldId::F) => Monotone::Decreasing,
        (VevCase::TwoVev, FieldId::F) => Monotone::Increasing,
    };
    frozen.check_monotone(dir, 1e-9)?;
    let vac = shot_vacuum(params, spec)?;
    let r_max = controls.resolved_r_max(params, spec.case, &vac).min(frozen.r_max());
    Shooter::new(*params, *spec, field, frozen, r_max, controls)
}

/// Outcome of solving the same `D` problem from two independently built brackets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessProbe {
    pub first: ShootingBracket,
    pub second: ShootingBracket,
    pub d_first: f64,
    pub d_second: f64,
    /// Class changes seen along a logarithmic scan of `D` over four decades.
    pub transitions: usize,
}

impl UniquenessProbe {
    pub fn spread(&self) -> f64 {
        (self.d_first - self.d_second).abs()
    }
}

/// Solves the `f` problem from a bracket grown upward (by 2) from well below
/// the seed and one grown downward (by 3) from well above it, and counts
/// class transitions on a log grid of `D`.
pub fn uniqueness_probe(
    frozen_g: &FrozenField,
    params: &CouplingParameters,
    spec: &ProblemSpec,
    controls: &SolverControls,
) -> Result<UniquenessProbe> {
    let shooter = prepared_shooter(FieldId::F, frozen_g, params, spec, controls)?;
    let seed = shooter.seed();
    let (b1, l1, h1) = shooter.bracket_from(seed / 64.0, 2.0)?;
    let (b2, l2, h2) = shooter.bracket_from(seed * 81.0, 3.0)?;
    let s1 = shooter.solve(b1, l1, h1)?;
    let s2 = shooter.solve(b2, l2, h2)?;

    let mut transitions = 0;
    let mut prev: Option<Side> = None;
    let steps = 80;
    for k in 0..=steps {
        let d = seed * 10f64.powf(-2.0 + 4.0 * k as f64 / steps as f64);
        let side = shooter.shoot(d)?.side;
        if let Some(p) = prev {
            if p != side {
                transitions += 1;
            }
        }
        prev = Some(side);
    }
    Ok(UniquenessProbe {
        first: b1,
        second: b2,
        d_first: s1.param,
        d_second: s2.param,
        transitions,
    })
}
