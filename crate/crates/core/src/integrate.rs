//! Radial ODE integration: regular series start near the origin, an adaptive
//! Dormand-Prince 5(4) pair with continuous extension, and event location for
//! shot classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::quintic;
use crate::model::{eom_rhs, CouplingParameters, FieldPoint, ProblemSpec, RadialState, VacuumState, VevCase};
use crate::profile::FrozenField;

/// One field's truncated origin expansion `lead r^power (1 + corr r^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub lead: f64,
    pub power: u32,
    pub corr: f64,
}

impl SeriesTerm {
    /// `[v, v', v'']` of the truncated series at `r >= 0`.
    pub fn jet(&self, r: f64) -> [f64; 3] {
        let p = self.power as i32;
        let c = self.corr;
        let pf = f64::from(self.power);
        // v = lead (r^p + c r^(p+2))
        let val = |k: i32| if k < 0 { 0.0 } else if k == 0 { 1.0 } else { r.powi(k) };
        let v = self.lead * (val(p) + c * val(p + 2));
        let dv = self.lead * (pf * val(p - 1) + c * (pf + 2.0) * val(p + 1));
        let ddv = self.lead * (pf * (pf - 1.0) * val(p - 2) + c * (pf + 2.0) * (pf + 1.0) * val(p));
        [v, dv, ddv]
    }
}

/// Regular starting data at a small radius `r_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStart {
    pub r_eps: f64,
    pub state: RadialState,
    /// Expansion order: leading term plus first correction.
    pub order: u32,
    pub f: SeriesTerm,
    pub g: SeriesTerm,
}

impl SeriesStart {
    pub fn new(r_eps: f64, f: SeriesTerm, g: SeriesTerm) -> Result<Self> {
        if !(r_eps > 0.0) {
            return Err(Error::InvalidArgument(format!("r_eps must be positive (got {r_eps})")));
        }
        let jf = f.jet(r_eps);
        let jg = g.jet(r_eps);
        Ok(Self {
            r_eps,
            state: [jf[0], jf[1], jg[0], jg[1]],
            order: 2,
            f,
            g,
        })
    }

    pub fn jets(&self, r: f64) -> ([f64; 3], [f64; 3]) {
        (self.f.jet(r), self.g.jet(r))
    }
}

/// `1e-4 min(1, 1 / max coupling)`.
pub fn default_r_eps(params: &CouplingParameters) -> f64 {
    1e-4 * (1.0 / params.max_coupling().max(f64::MIN_POSITIVE)).min(1.0)
}

/// Origin expansion coefficient of `f = D r^n (1 + a r^2)` when the second
/// field starts at `g(0) = g0`.
pub fn f_correction(params: &CouplingParameters, n: u32, g0: f64) -> f64 {
    (params.beta_prime * g0 * g0 - params.beta1) / f64::from(4 * n + 4)
}

/// Origin expansion coefficient of `g = c r^m (1 + a r^2)`; `f(0) = 0` since `n >= 1`.
pub fn g_correction(params: &CouplingParameters, m: u32, g0: f64) -> f64 {
    (params.beta2 * g0 * g0 - params.alpha) / f64::from(4 * m + 4)
}

/// Single-condensate start: `f ~ D r^n`, `g ~ b` with `0 <= b^2 < alpha / beta2`.
pub fn series_start_1vev(d: f64, b: f64, r_eps: f64, params: &CouplingParameters, n: u32) -> Result<SeriesStart> {
    if !(d > 0.0) {
        return Err(Error::InvalidShoot {
            param: d,
            reason: "D must be positive".into(),
        });
    }
    // b = 0 is the invariant g = 0 branch
    if !(b >= 0.0 && b * b < params.alpha / params.beta2) {
        return Err(Error::InvalidShoot {
            param: b,
            reason: format!("b must satisfy 0 <= b^2 < alpha/beta2 = {}", params.alpha / params.beta2),
        });
    }
    SeriesStart::new(
        r_eps,
        SeriesTerm {
            lead: d,
            power: n,
            corr: f_correction(params, n, b),
        },
        SeriesTerm {
            lead: b,
            power: 0,
            corr: g_correction(params, 0, b),
        },
    )
}

/// Two-condensate start: `f ~ D r^n`, `g ~ C r^m`.
///
/// Both fields vanish at the origin, so neither feeds the other's first
/// correction: the cross terms enter at relative order `r^(2m)` and `r^(2n)`.
pub fn series_start_2vev(d: f64, c: f64, r_eps: f64, params: &CouplingParameters, spec: &ProblemSpec) -> Result<SeriesStart> {
    if !(d > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidShoot {
            param: if d > 0.0 { c } else { d },
            reason: "D and C must be positive".into(),
        });
    }
    SeriesStart::new(
        r_eps,
        SeriesTerm {
            lead: d,
            power: spec.n,
            corr: f_correction(params, spec.n, 0.0),
        },
        SeriesTerm {
            lead: c,
            power: spec.m,
            corr: g_correction(params, spec.m, 0.0),
        },
    )
}

/// Which profile a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldId {
    F,
    G,
}

/// Which fields are integrated and which are taken from a frozen profile.
#[derive(Debug, Clone, Copy)]
pub enum Mode<'a> {
    Coupled,
    /// `f` frozen, `g` integrated.
    GivenF(&'a FrozenField),
    /// `g` frozen, `f` integrated.
    GivenG(&'a FrozenField),
}

/// The radial system together with its winding numbers and integration mode.
#[derive(Debug, Clone, Copy)]
pub struct RadialOde<'a> {
    pub params: CouplingParameters,
    pub spec: ProblemSpec,
    pub mode: Mode<'a>,
}

impl<'a> RadialOde<'a> {
    pub fn new(params: CouplingParameters, spec: ProblemSpec, mode: Mode<'a>) -> Self {
        Self { params, spec, mode }
    }

    fn active(&self) -> [bool; 4] {
        match self.mode {
            Mode::Coupled => [true; 4],
            Mode::GivenF(_) => [false, false, true, true],
            Mode::GivenG(_) => [true, true, false, false],
        }
    }

    /// State with the frozen components replaced by the frozen profile.
    #[inline]
    pub fn fill(&self, r: f64, y: &RadialState) -> RadialState {
        match self.mode {
            Mode::Coupled => *y,
            Mode::GivenF(ff) => {
                let j = ff.jet(r);
                [j[0], j[1], y[2], y[3]]
            }
            Mode::GivenG(gg) => {
                let j = gg.jet(r);
                [y[0], y[1], j[0], j[1]]
            }
        }
    }

    /// Right-hand side of the first-order system; frozen components have zero rate.
    #[inline]
    pub fn rhs(&self, r: f64, y: &RadialState) -> RadialState {
        let full = self.fill(r, y);
        let (a_f, a_g) = eom_rhs(r, &full, &self.params, &self.spec);
        match self.mode {
            Mode::Coupled => [y[1], a_f, y[3], a_g],
            Mode::GivenF(_) => [0.0, 0.0, y[3], a_g],
            Mode::GivenG(_) => [y[1], a_f, 0.0, 0.0],
        }
    }

    /// Full sample at `r`: state with frozen components and both curvatures.
    pub fn sample(&self, r: f64, y: &RadialState) -> Sample {
        let full = self.fill(r, y);
        let (mut a_f, mut a_g) = eom_rhs(r, &full, &self.params, &self.spec);
        match self.mode {
            Mode::Coupled => {}
            Mode::GivenF(ff) => a_f = ff.jet(r)[2],
            Mode::GivenG(gg) => a_g = gg.jet(r)[2],
        }
        Sample {
            r,
            y: full,
            acc: [a_f, a_g],
        }
    }
}

/// Terminating events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    FCrossesTarget,
    FPrimeHitsZero,
    GCrossesZero,
    GPrimeHitsZero,
    GCrossesTarget,
    ReachedRmax,
    Diverged,
}

impl EventKind {
    pub fn field(&self) -> Option<FieldId> {
        match self {
            EventKind::FCrossesTarget | EventKind::FPrimeHitsZero => Some(FieldId::F),
            EventKind::GCrossesZero | EventKind::GPrimeHitsZero | EventKind::GCrossesTarget => Some(FieldId::G),
            EventKind::ReachedRmax | EventKind::Diverged => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub r_event: f64,
    pub by: Option<FieldId>,
}

/// Events watched during one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSet {
    pub kinds: Vec<EventKind>,
    pub f_target: f64,
    pub g_target: f64,
    /// Divergence guard on `|f|` and `|g|`.
    pub guard: f64,
}

impl EventSet {
    /// Only the divergence guard.
    pub fn guard_only(vac: &VacuumState) -> Self {
        Self {
            kinds: Vec::new(),
            f_target: vac.a,
            g_target: vac.b,
            guard: divergence_guard(vac),
        }
    }

    /// The complementary pair of events distinguishing the shooting sets for
    /// the field being shot.
    pub fn for_shot(case: VevCase, field: FieldId, vac: &VacuumState) -> Self {
        let kinds = match (case, field) {
            (_, FieldId::F) => vec![EventKind::FPrimeHitsZero, EventKind::FCrossesTarget],
            (VevCase::OneVev, FieldId::G) => vec![EventKind::GPrimeHitsZero, EventKind::GCrossesZero],
            (VevCase::TwoVev, FieldId::G) => vec![EventKind::GPrimeHitsZero, EventKind::GCrossesTarget],
        };
        Self {
            kinds,
            f_target: vac.a,
            g_target: vac.b,
            guard: divergence_guard(vac),
        }
    }

    fn value(&self, kind: EventKind, y: &RadialState) -> f64 {
        match kind {
            EventKind::FCrossesTarget => y[0] - self.f_target,
            EventKind::FPrimeHitsZero => y[1],
            EventKind::GCrossesZero => y[2],
            EventKind::GPrimeHitsZero => y[3],
            EventKind::GCrossesTarget => y[2] - self.g_target,
            EventKind::ReachedRmax | EventKind::Diverged => 1.0,
        }
    }
}

/// `10 max(A, B, 1)`.
pub fn divergence_guard(vac: &VacuumState) -> f64 {
    10.0 * vac.a.max(vac.b).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorControls {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    /// Minimum step relative to `max(1, |r|)`.
    pub h_min_rel: f64,
    /// Event location tolerance in field value.
    pub event_tol: f64,
    /// Event location tolerance in `r` relative to `max(1, |r|)`.
    pub event_r_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-20,
            h_max: 0.05,
            h_min_rel: 1e-14,
            event_tol: 1e-10,
            event_r_tol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorControls {
    /// Tolerances scaled by `factor` (event tolerances unchanged).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rtol: self.rtol * factor,
            atol: self.atol * factor,
            ..*self
        }
    }
}

/// One accepted point: full state and both curvatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub r: f64,
    pub y: RadialState,
    pub acc: [f64; 2],
}

impl Sample {
    fn jets(&self) -> ([f64; 3], [f64; 3]) {
        ([self.y[0], self.y[1], self.acc[0]], [self.y[2], self.y[3], self.acc[1]])
    }
}

/// Accepted samples in increasing `r`; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
}

impl Trajectory {
    pub(crate) fn from_samples(mut samples: Vec<Sample>) -> Self {
        if samples.len() >= 2 && samples[0].r > samples[samples.len() - 1].r {
            samples.reverse();
        }
        Self { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn r_start(&self) -> f64 {
        self.samples[0].r
    }

    pub fn r_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].r
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    fn locate(&self, r: f64) -> usize {
        let n = self.samples.len();
        if n < 2 {
            return 0;
        }
        let idx = self.samples.partition_point(|s| s.r <= r);
        idx.saturating_sub(1).min(n - 2)
    }

    /// `(f jet, g jet)` at `r` by quintic Hermite interpolation between samples.
    pub fn jets(&self, r: f64) -> ([f64; 3], [f64; 3]) {
        if self.samples.len() == 1 {
            return self.samples[0].jets();
        }
        let i = self.locate(r);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.r - a.r;
        let t = ((r - a.r) / h).clamp(0.0, 1.0);
        let (af, ag) = a.jets();
        let (bf, bg) = b.jets();
        (quintic(af, bf, h, t), quintic(ag, bg, h, t))
    }

    /// `(f, f', g, g')` at `r`.
    pub fn at(&self, r: f64) -> RadialState {
        let (jf, jg) = self.jets(r);
        [jf[0], jf[1], jg[0], jg[1]]
    }

    /// Copy restricted to `[r_start, r_cut]`, ending with an interpolated sample at `r_cut`.
    pub fn truncated(&self, r_cut: f64) -> Trajectory {
        let mut out: Vec<Sample> = self.samples.iter().filter(|s| s.r < r_cut).copied().collect();
        if out.last().map_or(true, |s| s.r < r_cut) {
            let (jf, jg) = self.jets(r_cut);
            out.push(Sample {
                r: r_cut,
                y: [jf[0], jf[1], jg[0], jg[1]],
                acc: [jf[2], jg[2]],
            });
        }
        Trajectory { samples: out }
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn axpy(y: &RadialState, terms: &[(f64, &RadialState)], h: f64) -> RadialState {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Continuous extension of one accepted step.
struct Dense {
    r0: f64,
    h: f64,
    c: [RadialState; 5],
}

impl Dense {
    fn eval(&self, r: f64) -> RadialState {
        let th = (r - self.r0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = self.c[0][i]
                + th * (self.c[1][i] + th1 * (self.c[2][i] + th * (self.c[3][i] + th1 * self.c[4][i])));
        }
        out
    }
}

/// Integrates from the series start out to `r_max`, stopping at the first
/// watched event.
pub fn integrate_profile(
    start: &SeriesStart,
    ode: &RadialOde<'_>,
    r_max: f64,
    events: &EventSet,
    controls: &IntegratorControls,
) -> Result<(Trajectory, EventRecord)> {
    if !(r_max > start.r_eps) {
        return Err(Error::InvalidArgument(format!(
            "r_max ({r_max}) must exceed r_eps ({})",
            start.r_eps
        )));
    }
    integrate_from(start.r_eps, start.state, ode, r_max, events, controls)
}

/// Integrates from `(r0, y0)` to `r_end` in either direction.
pub fn integrate_from(
    r0: f64,
    y0: RadialState,
    ode: &RadialOde<'_>,
    r_end: f64,
    events: &EventSet,
    controls: &IntegratorControls,
) -> Result<(Trajectory, EventRecord)> {
    let dir = if r_end >= r0 { 1.0 } else { -1.0 };
    let active = ode.active();
    let n_active = active.iter().filter(|a| **a).count() as f64;

    let mut r = r0;
    let mut y = y0;
    let mut samples = vec![ode.sample(r, &y)];

    // Initial signs; a zero start arms the event only once it leaves zero.
    let mut signs: Vec<f64> = events
        .kinds
        .iter()
        .map(|k| sign_of(events.value(*k, &samples[0].y)))
        .collect();

    let mut k1 = ode.rhs(r, &y);
    let span = (r_end - r0).abs();
    let mut h = dir * controls.h_max.min(0.1 * r0.abs().max(1e-3)).min(span);
    let mut steps = 0usize;

    loop {
        if (r_end - r) * dir <= 0.0 {
            return Ok((
                Trajectory::from_samples(samples),
                EventRecord {
                    kind: EventKind::ReachedRmax,
                    r_event: r,
                    by: None,
                },
            ));
        }
        steps += 1;
        if steps > controls.max_steps {
            return Err(Error::ToleranceNotReached {
                what: "integration".into(),
                detail: format!("step budget {} exhausted at r = {r}", controls.max_steps),
            });
        }
        let h_min = controls.h_min_rel * r.abs().max(1.0);
        if h.abs() < h_min {
            return Err(Error::StepUnderflow { r, h: h.abs(), state: ode.fill(r, &y) });
        }
        if (r + h - r_end) * dir > 0.0 {
            h = r_end - r;
        }

        let k2 = ode.rhs(r + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = ode.rhs(r + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = ode.rhs(r + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = ode.rhs(
            r + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = ode.rhs(
            r + h,
            &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
        );
        let y_new = axpy(
            &y,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            h,
        );
        let r_new = if (r_end - (r + h)).abs() <= 1e-15 * r_end.abs().max(1.0) { r_end } else { r + h };
        let k7 = ode.rhs(r_new, &y_new);

        let mut err2 = 0.0;
        for i in 0..4 {
            if !active[i] {
                continue;
            }
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = controls.atol + controls.rtol * y[i].abs().max(y_new[i].abs());
            err2 += (e / sc) * (e / sc);
        }
        let err = (err2 / n_active).sqrt();
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }

        let mut c = [[0.0; 4]; 5];
        for i in 0..4 {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            c[0][i] = y[i];
            c[1][i] = ydiff;
            c[2][i] = bspl;
            c[3][i] = ydiff - h * k7[i] - bspl;
            c[4][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let dense = Dense { r0: r, h, c };

        // earliest watched event inside the step
        let full_new = ode.fill(r_new, &y_new);
        let mut hit: Option<(f64, EventKind)> = None;
        for (j, kind) in events.kinds.iter().enumerate() {
            let v_new = events.value(*kind, &full_new);
            if signs[j] == 0.0 {
                continue;
            }
            if sign_of(v_new) != signs[j] {
                let r_ev = locate_event(&dense, ode, events, *kind, signs[j], r, r_new, controls);
                if hit.map_or(true, |(rh, _)| (r_ev - rh) * dir < 0.0) {
                    hit = Some((r_ev, *kind));
                }
            }
        }
        if let Some((r_ev, kind)) = hit {
            let y_ev = dense.eval(r_ev);
            samples.push(ode.sample(r_ev, &y_ev));
            return Ok((
                Trajectory::from_samples(samples),
                EventRecord {
                    kind,
                    r_event: r_ev,
                    by: kind.field(),
                },
            ));
        }
        for (j, kind) in events.kinds.iter().enumerate() {
            if signs[j] == 0.0 {
                signs[j] = sign_of(events.value(*kind, &full_new));
            }
        }

        r = r_new;
        y = y_new;
        k1 = k7;
        samples.push(ode.sample(r, &y));

        if full_new[0].abs() > events.guard || full_new[2].abs() > events.guard {
            return Ok((
                Trajectory::from_samples(samples),
                EventRecord {
                    kind: EventKind::Diverged,
                    r_event: r,
                    by: None,
                },
            ));
        }

        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = dir * (h.abs() * fac).min(controls.h_max);
    }
}

#[inline]
fn sign_of(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[allow(clippy::too_many_arguments)]
fn locate_event(
    dense: &Dense,
    ode: &RadialOde<'_>,
    events: &EventSet,
    kind: EventKind,
    start_sign: f64,
    r_lo: f64,
    r_hi: f64,
    controls: &IntegratorControls,
) -> f64 {
    let value = |r: f64| events.value(kind, &ode.fill(r, &dense.eval(r)));
    let (mut a, mut b) = (r_lo, r_hi);
    let tol = controls.event_r_tol * r_hi.abs().max(1.0);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let v = value(mid);
        if sign_of(v) == start_sign {
            a = mid;
        } else {
            b = mid;
            if v.abs() < controls.event_tol * 1e-6 {
                break;
            }
        }
    }
    b
}

/// Radial state of the field pair near the origin reconstructed from a
/// series start, valid on `[0, r_eps]`.
pub fn series_state(start: &SeriesStart, r: f64) -> RadialState {
    let (jf, jg) = start.jets(r);
    [jf[0], jf[1], jg[0], jg[1]]
}

/// `V(f(r), g(r))` helper kept next to the integrator for residual checks.
pub fn state_potential(state: &RadialState, params: &CouplingParameters) -> f64 {
    crate::model::potential(FieldPoint::new(state[0], state[2]), params)
}
