//! Energy relaxation on a truncated radial grid, independent of the shooting path.
//!
//! The static energy `int r [f'^2 + g'^2 + n^2 f^2 / r^2 + m^2 g^2 / r^2 + V - V_inf] dr`
//! is discretized with cell-midpoint gradients and dual-cell node weights
//! `W_i = int r dr` over the node's dual cell, and minimized by explicit
//! steepest descent `du_i/dt = -(1/W_i) dE/du_i`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::local_cubic;
use crate::model::{half_force, potential, validate_parameters, CouplingParameters, FieldPoint, ProblemSpec, VacuumState, VevCase};
use crate::profile::RadialProfile;

/// Strictly increasing node radii starting at `r_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r: Vec<f64>,
}

impl RadialGrid {
    pub fn uniform(r_max: f64, intervals: usize) -> Result<Self> {
        if !(r_max > 0.0) || intervals < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid needs r_max > 0 and at least 4 intervals (got {r_max}, {intervals})"
            )));
        }
        let h = r_max / intervals as f64;
        let mut r: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
        r[intervals] = r_max;
        Ok(Self { r })
    }

    /// Geometric cells growing by `ratio` from `h0` at the origin, the last cell trimmed to end at `r_max`.
    pub fn geometric(r_max: f64, h0: f64, ratio: f64) -> Result<Self> {
        if !(r_max > 0.0 && h0 > 0.0 && ratio >= 1.0 && h0 < r_max) {
            return Err(Error::InvalidArgument("geometric grid needs 0 < h0 < r_max and ratio >= 1".into()));
        }
        let mut r = vec![0.0];
        let mut h = h0;
        while *r.last().unwrap() + h < r_max * (1.0 - 1e-12) {
            let next = r.last().unwrap() + h;
            r.push(next);
            h *= ratio;
        }
        r.push(r_max);
        Self::from_nodes(r)
    }

    pub fn from_nodes(r: Vec<f64>) -> Result<Self> {
        if r.len() < 5 || r[0] != 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("grid nodes must start at 0 and strictly increase".into()));
        }
        Ok(Self { r })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Dual-cell weights `int r dr` between neighbouring midpoints.
    fn weights(&self) -> Vec<f64> {
        let n = self.r.len();
        let mid = |i: usize| 0.5 * (self.r[i] + self.r[i + 1]);
        (0..n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { mid(i - 1) };
                let hi = if i + 1 == n { self.r[n - 1] } else { mid(i) };
                0.5 * (hi * hi - lo * lo)
            })
            .collect()
    }
}

/// Nodal values of both fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFields {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteEnergy {
    pub total: f64,
    pub gradient_part: f64,
    pub centrifugal_part: f64,
    pub potential_part: f64,
}

/// How the outermost `g` node is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Outer {
    Pinned(f64),
    /// `g_N = rho g_(N-1)`: the decaying exponential carried across the last cell.
    Decay(f64),
}

/// Boundary data of one problem on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Boundary {
    f_origin: Option<f64>,
    g_origin: Option<f64>,
    f_outer: f64,
    g_outer: Outer,
}

fn far_values(params: &CouplingParameters, spec: &ProblemSpec, vac: &VacuumState, r: f64) -> (f64, f64) {
    let n2 = f64::from(spec.n * spec.n);
    let m2 = f64::from(spec.m * spec.m);
    match spec.case {
        VevCase::OneVev => (1.0 - n2 / (2.0 * params.beta1 * r * r), 0.0),
        VevCase::TwoVev => {
            let (a, b) = (vac.a, vac.b);
            let m = [
                [2.0 * params.beta1 * a * a, 2.0 * params.beta_prime * a * b],
                [2.0 * params.beta_prime * a * b, 2.0 * params.beta2 * b * b],
            ];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let s = [n2 * a / (r * r), m2 * b / (r * r)];
            let df = -(m[1][1] * s[0] - m[0][1] * s[1]) / det;
            let dg = -(-m[1][0] * s[0] + m[0][0] * s[1]) / det;
            (a + df, b + dg)
        }
    }
}

fn boundary(params: &CouplingParameters, spec: &ProblemSpec, vac: &VacuumState, grid: &RadialGrid) -> Boundary {
    let n = grid.len();
    let r_n = grid.r[n - 1];
    let r_p = grid.r[n - 2];
    let (fo, go) = far_values(params, spec, vac, r_n);
    let g_outer = match spec.case {
        VevCase::TwoVev => Outer::Pinned(go),
        VevCase::OneVev => {
            let kappa = (params.beta_prime - params.alpha).max(0.0).sqrt();
            Outer::Decay((r_p / r_n).sqrt() * (-kappa * (r_n - r_p)).exp())
        }
    };
    Boundary {
        f_origin: (spec.n > 0).then_some(0.0),
        g_origin: (spec.m > 0).then_some(0.0),
        f_outer: fo,
        g_outer,
    }
}

fn apply_boundary(b: &Boundary, u: &mut GridFields) {
    let n = u.f.len();
    if let Some(v) = b.f_origin {
        u.f[0] = v;
    }
    if let Some(v) = b.g_origin {
        u.g[0] = v;
    }
    u.f[n - 1] = b.f_outer;
    u.g[n - 1] = match b.g_outer {
        Outer::Pinned(v) => v,
        Outer::Decay(rho) => rho * u.g[n - 2],
    };
}

fn check_boundary(b: &Boundary, u: &GridFields) -> Result<()> {
    let n = u.f.len();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + y.abs());
    let mut bad = Vec::new();
    if let Some(v) = b.f_origin {
        if !close(u.f[0], v) {
            bad.push(format!("f(0) = {} (expected {v})", u.f[0]));
        }
    }
    if let Some(v) = b.g_origin {
        if !close(u.g[0], v) {
            bad.push(format!("g(0) = {} (expected {v})", u.g[0]));
        }
    }
    if !close(u.f[n - 1], b.f_outer) {
        bad.push(format!("f(r_max) = {} (expected {})", u.f[n - 1], b.f_outer));
    }
    let g_expect = match b.g_outer {
        Outer::Pinned(v) => v,
        Outer::Decay(rho) => rho * u.g[n - 2],
    };
    if !close(u.g[n - 1], g_expect) {
        bad.push(format!("g(r_max) = {} (expected {g_expect})", u.g[n - 1]));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::BoundaryViolation(bad.join("; ")))
    }
}

/// Precomputed geometry and boundary data for one relaxation.
struct Discretization {
    r: Vec<f64>,
    w: Vec<f64>,
    /// `r_(i+1/2) / (r_(i+1) - r_i)` per cell.
    cell: Vec<f64>,
    n2: f64,
    m2: f64,
    params: CouplingParameters,
    v_inf: f64,
    bc: Boundary,
}

impl Discretization {
    fn new(params: &CouplingParameters, spec: &ProblemSpec, grid: &RadialGrid) -> Result<Self> {
        let vac = validate_parameters(params, spec)?;
        let r = grid.r.clone();
        let cell = r.windows(2).map(|w| 0.5 * (w[0] + w[1]) / (w[1] - w[0])).collect();
        Ok(Self {
            w: grid.weights(),
            cell,
            n2: f64::from(spec.n * spec.n),
            m2: f64::from(spec.m * spec.m),
            params: *params,
            // V(A, B) rather than the closed form so the vacuum has exactly zero energy
            v_inf: potential(FieldPoint::new(vac.a, vac.b), params),
            bc: boundary(params, spec, &vac, grid),
            r,
        })
    }

    fn energy(&self, u: &GridFields) -> DiscreteEnergy {
        let mut grad = 0.0;
        for (i, c) in self.cell.iter().enumerate() {
            let df = u.f[i + 1] - u.f[i];
            let dg = u.g[i + 1] - u.g[i];
            grad += c * (df * df + dg * dg);
        }
        let mut cent = 0.0;
        let mut pot = 0.0;
        for i in 0..self.r.len() {
            let r = self.r[i];
            if r > 0.0 {
                cent += self.w[i] * (self.n2 * u.f[i] * u.f[i] + self.m2 * u.g[i] * u.g[i]) / (r * r);
            }
            pot += self.w[i] * (potential(FieldPoint::new(u.f[i], u.g[i]), &self.params) - self.v_inf);
        }
        DiscreteEnergy {
            total: grad + cent + pot,
            gradient_part: grad,
            centrifugal_part: cent,
            potential_part: pot,
        }
    }

    /// `dE/du_i` for every node, free or not.
    fn gradient(&self, u: &GridFields, gf: &mut [f64], gg: &mut [f64]) {
        let n = self.r.len();
        for i in 0..n {
            let r = self.r[i];
            let (hf, hg) = half_force(FieldPoint::new(u.f[i], u.g[i]), &self.params);
            let (cf, cg) = if r > 0.0 {
                (self.n2 * u.f[i] / (r * r), self.m2 * u.g[i] / (r * r))
            } else {
                (0.0, 0.0)
            };
            gf[i] = 2.0 * self.w[i] * (hf + cf);
            gg[i] = 2.0 * self.w[i] * (hg + cg);
        }
        for (i, c) in self.cell.iter().enumerate() {
            let df = 2.0 * c * (u.f[i + 1] - u.f[i]);
            let dg = 2.0 * c * (u.g[i + 1] - u.g[i]);
            gf[i] -= df;
            gf[i + 1] += df;
            gg[i] -= dg;
            gg[i + 1] += dg;
        }
    }

    /// Largest diagonal entry of `W^-1 Hess E` over free nodes, bounded using `|f|, |g| <= cap`.
    fn max_diagonal(&self, cap: f64) -> f64 {
        let p = &self.params;
        let c2 = cap * cap;
        let pot = 2.0 * (3.0 * p.beta1 * c2 + p.beta1 + p.beta_prime.abs() * c2)
            .max(3.0 * p.beta2 * c2 + p.alpha.abs() + p.beta_prime.abs() * c2);
        let nm = self.n2.max(self.m2);
        let mut worst: f64 = 0.0;
        for i in 0..self.r.len() {
            let left = if i > 0 { self.cell[i - 1] } else { 0.0 };
            let right = if i < self.cell.len() { self.cell[i] } else { 0.0 };
            let cent = if self.r[i] > 0.0 { 2.0 * nm / (self.r[i] * self.r[i]) } else { 0.0 };
            worst = worst.max(2.0 * (left + right) / self.w[i] + cent + pot);
        }
        worst
    }
}

/// Discrete energy of `fields` on `grid`; the fields must satisfy the boundary values.
pub fn discrete_energy(grid: &RadialGrid, fields: &GridFields, params: &CouplingParameters, spec: &ProblemSpec) -> Result<DiscreteEnergy> {
    if fields.f.len() != grid.len() || fields.g.len() != grid.len() {
        return Err(Error::InvalidArgument("field length differs from grid".into()));
    }
    let d = Discretization::new(params, spec, grid)?;
    check_boundary(&d.bc, fields)?;
    Ok(d.energy(fields))
}

/// The boundary values the relaxation pins, written into `fields`.
pub fn impose_boundary(grid: &RadialGrid, fields: &mut GridFields, params: &CouplingParameters, spec: &ProblemSpec) -> Result<()> {
    let d = Discretization::new(params, spec, grid)?;
    apply_boundary(&d.bc, fields);
    Ok(())
}

/// `target tanh^n(r / r_char)` seeds; the 1VEV `g` seed is `b exp(-r^2)`.
pub fn seed_fields(grid: &RadialGrid, params: &CouplingParameters, spec: &ProblemSpec) -> Result<GridFields> {
    let vac = validate_parameters(params, spec)?;
    let rf = 1.0 / params.beta1.sqrt();
    let f: Vec<f64> = grid.r.iter().map(|&r| vac.a * (r / rf).tanh().powi(spec.n as i32)).collect();
    let g: Vec<f64> = match spec.case {
        VevCase::TwoVev => {
            let rg = 1.0 / (params.beta2 * vac.b * vac.b).sqrt();
            grid.r.iter().map(|&r| vac.b * (r / rg).tanh().powi(spec.m as i32)).collect()
        }
        VevCase::OneVev => {
            let b = 0.5 * (params.alpha / params.beta2).sqrt();
            grid.r.iter().map(|&r| b * (-r * r).exp()).collect()
        }
    };
    let mut u = GridFields { f, g };
    impose_boundary(grid, &mut u, params, spec)?;
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowControls {
    /// `None` picks `0.9 / max diagonal` of the linearization.
    pub dt: Option<f64>,
    pub max_steps: usize,
    /// Stop once `max |du/dt|` over free nodes falls below this.
    pub stop_tol: f64,
    /// Halvings of `dt` allowed by [`relax`] after a stability failure.
    pub retries: usize,
}

impl Default for FlowControls {
    fn default() -> Self {
        Self {
            dt: None,
            max_steps: 20_000_000,
            stop_tol: 1e-9,
            retries: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relaxed {
    pub fields: GridFields,
    pub energy: DiscreteEnergy,
    pub steps: usize,
    pub dt: f64,
    /// Final `max |du/dt|`.
    pub velocity: f64,
}

/// Explicit descent from `init` with the boundary values held fixed.
///
/// Fails with `StabilityViolation` when the energy rises on two consecutive steps.
pub fn gradient_flow_relax(
    params: &CouplingParameters,
    spec: &ProblemSpec,
    grid: &RadialGrid,
    init: &GridFields,
    controls: &FlowControls,
) -> Result<Relaxed> {
    let d = Discretization::new(params, spec, grid)?;
    if init.f.len() != grid.len() || init.g.len() != grid.len() {
        return Err(Error::InvalidArgument("initial fields differ in length from grid".into()));
    }
    let mut u = init.clone();
    check_boundary(&d.bc, &u)?;
    let n = grid.len();
    let cap = u.f.iter().chain(&u.g).fold(1.0f64, |m, v| m.max(v.abs()));
    let dt = controls.dt.unwrap_or_else(|| 0.9 / d.max_diagonal(cap));
    let free_f: Vec<bool> = (0..n).map(|i| i < n - 1 && !(i == 0 && d.bc.f_origin.is_some())).collect();
    let free_g: Vec<bool> = (0..n).map(|i| i < n - 1 && !(i == 0 && d.bc.g_origin.is_some())).collect();
    let (rho, mut wg) = match d.bc.g_outer {
        Outer::Decay(rho) => (Some(rho), d.w.clone()),
        Outer::Pinned(_) => (None, d.w.clone()),
    };
    if let Some(rho) = rho {
        wg[n - 2] += rho * rho * d.w[n - 1];
    }

    let mut gf = vec![0.0; n];
    let mut gg = vec![0.0; n];
    let noise = 8.0 * n as f64 * f64::EPSILON;
    let mut energy = d.energy(&u);
    let mut rises = 0;
    for step in 0..=controls.max_steps {
        d.gradient(&u, &mut gf, &mut gg);
        if let Some(rho) = rho {
            gg[n - 2] += rho * gg[n - 1];
        }
        let mut vel: f64 = 0.0;
        for i in 0..n {
            if free_f[i] {
                gf[i] /= d.w[i];
                vel = vel.max(gf[i].abs());
            }
            if free_g[i] {
                gg[i] /= wg[i];
                vel = vel.max(gg[i].abs());
            }
        }
        if !vel.is_finite() {
            return Err(Error::StabilityViolation { step, dt });
        }
        if vel < controls.stop_tol {
            return Ok(Relaxed {
                fields: u,
                energy,
                steps: step,
                dt,
                velocity: vel,
            });
        }
        if step == controls.max_steps {
            return Err(Error::NoConvergence {
                iterations: step,
                residual: vel,
            });
        }
        for i in 0..n {
            if free_f[i] {
                u.f[i] -= dt * gf[i];
            }
            if free_g[i] {
                u.g[i] -= dt * gg[i];
            }
        }
        apply_boundary(&d.bc, &mut u);
        let e = d.energy(&u);
        // rises below the summation roundoff of the parts are not instability
        let scale = e.gradient_part.abs() + e.centrifugal_part.abs() + e.potential_part.abs() + 1.0;
        if e.total > energy.total + noise * scale {
            rises += 1;
            if rises >= 2 {
                return Err(Error::StabilityViolation { step, dt });
            }
        } else {
            rises = 0;
        }
        energy = e;
    }
    unreachable!("loop returns on its last step")
}

/// [`gradient_flow_relax`] that halves `dt` after each stability failure.
pub fn relax(
    params: &CouplingParameters,
    spec: &ProblemSpec,
    grid: &RadialGrid,
    init: &GridFields,
    controls: &FlowControls,
) -> Result<Relaxed> {
    let mut c = *controls;
    let mut last = None;
    for _ in 0..=controls.retries {
        match gradient_flow_relax(params, spec, grid, init, &c) {
            Err(e @ Error::StabilityViolation { dt, .. }) => {
                last = Some(e);
                c.dt = Some(0.5 * dt);
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Relaxed profile with second-order difference slopes, for comparison and export.
pub fn to_profile(grid: &RadialGrid, u: &GridFields) -> RadialProfile {
    let r = &grid.r;
    let n = r.len();
    let slope = |y: &[f64], i: usize| {
        if i == 0 {
            let (h1, h2) = (r[1] - r[0], r[2] - r[0]);
            // quadratic through the first three nodes
            (y[1] * h2 * h2 - y[2] * h1 * h1 - y[0] * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h2 - h1))
        } else if i == n - 1 {
            let (h1, h2) = (r[n - 1] - r[n - 2], r[n - 1] - r[n - 3]);
            -(y[n - 2] * h2 * h2 - y[n - 3] * h1 * h1 - y[n - 1] * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h2 - h1))
        } else {
            let (hl, hr) = (r[i] - r[i - 1], r[i + 1] - r[i]);
            (y[i + 1] * hl * hl - y[i - 1] * hr * hr + y[i] * (hr * hr - hl * hl)) / (hl * hr * (hl + hr))
        }
    };
    let mut p = RadialProfile::with_capacity(n);
    for i in 0..n {
        p.push(r[i], [u.f[i], slope(&u.f, i), u.g[i], slope(&u.g, i)]);
    }
    p
}

/// Largest component-wise `|a - b|` on `[lo, hi]`, evaluated at the samples of
/// both profiles inside the window with local cubic interpolation of the other.
pub fn compare_profiles(a: &RadialProfile, b: &RadialProfile, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let domain = |p: &RadialProfile| (p.r.first().copied().unwrap_or(0.0), p.r_max());
    let (a0, a1) = domain(a);
    let (b0, b1) = domain(b);
    let lo_c = lo.max(a0).max(b0);
    let hi_c = hi.min(a1).min(b1);
    if a.len() < 4 || b.len() < 4 || !(hi_c >= lo_c) || lo < a0.max(b0) - 1e-12 || hi > a1.min(b1) + 1e-12 {
        return Err(Error::EmptyWindow);
    }
    let mut d: f64 = 0.0;
    let mut seen = 0;
    for (p, q) in [(a, b), (b, a)] {
        for (i, &r) in p.r.iter().enumerate() {
            if r < lo_c || r > hi_c {
                continue;
            }
            seen += 1;
            let f = local_cubic(&q.r, &q.f, r);
            let g = local_cubic(&q.r, &q.g, r);
            d = d.max((p.f[i] - f).abs()).max((p.g[i] - g).abs());
        }
    }
    if seen == 0 {
        return Err(Error::EmptyWindow);
    }
    Ok(d)
}
