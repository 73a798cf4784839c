//! Two-parameter solve of the coupled system by multiple shooting.
//!
//! The interval `[r_eps, r_max]` is cut at nodes a few decay lengths apart.
//! Unknowns are `(D, c)` plus the full state at every interior node; the
//! residual collects state continuity at the nodes and the vanishing of both
//! growing far-field modes at `r_max`. A damped Newton iteration with a
//! finite-difference Jacobian drives the residual to zero.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{
    integrate_from, series_start_1vev, series_start_2vev, EventKind, EventSet, Mode, RadialOde, Sample,
    SeriesStart, Trajectory,
};
use crate::model::{
    half_force, symmetric_eigen, FieldPoint, vacuum_mass_matrix, validate_parameters, CouplingParameters, ProblemSpec, RadialState,
    VacuumState, VevCase,
};
use crate::profile::RadialProfile;

use super::fixed_point::{constant_solution, fixed_point_solve};
use super::{vacuum_rates, ProfileSolution, SolveMethod, SolverControls};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledDiagnostics {
    pub newton_steps: usize,
    /// Scaled residual norm before each Newton step and at the end.
    pub residual_trail: Vec<f64>,
    /// Largest ratio of a cross-field Jacobian entry to the same row's
    /// own-field entries; zero when the fields decouple.
    pub coupling_ratio: f64,
    pub nodes: Vec<f64>,
}

struct System<'a> {
    params: CouplingParameters,
    spec: ProblemSpec,
    vac: VacuumState,
    r_eps: f64,
    r_max: f64,
    nodes: Vec<f64>,
    ode: RadialOde<'a>,
    events: EventSet,
    controls: &'a SolverControls,
    eig: ([f64; 2], [[f64; 2]; 2]),
    far_field: FarField,
}

/// Far-field values, slopes, and the local linearization's eigensystem.
type FarField = ([f64; 2], [f64; 2], ([f64; 2], [[f64; 2]; 2]));

/// Jacobian of `(n^2 f / r^2 + F_f, m^2 g / r^2 + F_g)` in `(f, g)`.
fn local_jacobian(params: &CouplingParameters, spec: &ProblemSpec, r: f64, y: [f64; 2]) -> [[f64; 2]; 2] {
    let [f, g] = y;
    let n2 = f64::from(spec.n * spec.n) / (r * r);
    let m2 = f64::from(spec.m * spec.m) / (r * r);
    let fg = 2.0 * params.beta_prime * f * g;
    [
        [n2 + params.beta1 * (3.0 * f * f - 1.0) + params.beta_prime * g * g, fg],
        [fg, m2 + 3.0 * params.beta2 * g * g - params.alpha + params.beta_prime * f * f],
    ]
}

/// Root of the algebraic balance at radius `r`, by Newton from the vacuum.
fn quasi_static(params: &CouplingParameters, spec: &ProblemSpec, vac: &VacuumState, r: f64) -> [f64; 2] {
    let n2 = f64::from(spec.n * spec.n) / (r * r);
    let m2 = f64::from(spec.m * spec.m) / (r * r);
    let mut y = [vac.a, vac.b];
    for _ in 0..50 {
        let (hf, hg) = half_force(FieldPoint::new(y[0], y[1]), params);
        let res = [n2 * y[0] + hf, m2 * y[1] + hg];
        let j = invert2(local_jacobian(params, spec, r, y));
        let step = [j[0][0] * res[0] + j[0][1] * res[1], j[1][0] * res[0] + j[1][1] * res[1]];
        y = [y[0] - step[0], y[1] - step[1]];
        if step[0].abs().max(step[1].abs()) < 1e-16 {
            break;
        }
    }
    y
}

/// Quasi-static far field with the `(y'' + y'/r)` correction that removes its `O(r^-4)` error.
fn far_field(params: &CouplingParameters, spec: &ProblemSpec, vac: &VacuumState, r: f64) -> FarField {
    let h = 0.01 * r;
    let y0 = quasi_static(params, spec, vac, r);
    let yp = quasi_static(params, spec, vac, r + h);
    let ym = quasi_static(params, spec, vac, r - h);
    let mut lap = [0.0; 2];
    let mut dy = [0.0; 2];
    for i in 0..2 {
        dy[i] = (yp[i] - ym[i]) / (2.0 * h);
        lap[i] = (yp[i] - 2.0 * y0[i] + ym[i]) / (h * h) + dy[i] / r;
    }
    let jac = local_jacobian(params, spec, r, y0);
    let ji = invert2(jac);
    let corr = [ji[0][0] * lap[0] + ji[0][1] * lap[1], ji[1][0] * lap[0] + ji[1][1] * lap[1]];
    (
        [y0[0] + corr[0], y0[1] + corr[1]],
        [dy[0] - 4.0 * corr[0] / r, dy[1] - 4.0 * corr[1] / r],
        symmetric_eigen(jac),
    )
}

/// Segment end states, or `None` if a segment could not be integrated.
type Ends = Option<Vec<RadialState>>;

impl<'a> System<'a> {
    fn segments(&self) -> usize {
        self.nodes.len() + 1
    }

    fn seg_range(&self, k: usize) -> (f64, f64) {
        let a = if k == 0 { self.r_eps } else { self.nodes[k - 1] };
        let b = if k == self.nodes.len() { self.r_max } else { self.nodes[k] };
        (a, b)
    }

    fn series(&self, d: f64, c: f64) -> Result<SeriesStart> {
        match self.spec.case {
            VevCase::OneVev => series_start_1vev(d, c, self.r_eps, &self.params, self.spec.n),
            VevCase::TwoVev => series_start_2vev(d, c, self.r_eps, &self.params, &self.spec),
        }
    }

    fn segment(&self, k: usize, x: &[f64]) -> Result<Option<Trajectory>> {
        let (a, b) = self.seg_range(k);
        let y0 = if k == 0 {
            match self.series(x[0], x[1]) {
                Ok(s) => s.state,
                Err(Error::InvalidShoot { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
        } else {
            node_state(x, k)
        };
        let (traj, ev) = match integrate_from(a, y0, &self.ode, b, &self.events, &self.controls.integrator) {
            Ok(t) => t,
            Err(Error::StepUnderflow { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok((ev.kind == EventKind::ReachedRmax).then_some(traj))
    }

    fn segment_end(&self, k: usize, x: &[f64]) -> Result<Option<RadialState>> {
        Ok(self.segment(k, x)?.map(|t| t.last().y))
    }

    fn ends(&self, x: &[f64]) -> Result<Ends> {
        let mut out = Vec::with_capacity(self.segments());
        for k in 0..self.segments() {
            match self.segment_end(k, x)? {
                Some(y) => out.push(y),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    /// Growing-mode amplitudes at `r_max` about the corrected quasi-static far field.
    fn terminal(&self, y: &RadialState) -> [f64; 2] {
        let r = self.r_max;
        let (eq, deq, (lam, q)) = self.far_field;
        let d = [y[0] - eq[0], y[2] - eq[1]];
        let dd = [y[1] - deq[0], y[3] - deq[1]];
        let mut p = [0.0; 2];
        for i in 0..2 {
            let mu = lam[i].max(0.0).sqrt();
            let qd = q[0][i] * d[0] + q[1][i] * d[1];
            let qdd = q[0][i] * dd[0] + q[1][i] * dd[1];
            p[i] = qdd + (mu + 0.5 / r) * qd;
        }
        p
    }

    fn residual(&self, x: &[f64], ends: &[RadialState]) -> Vec<f64> {
        let k_n = self.nodes.len();
        let mut res = Vec::with_capacity(4 * k_n + 2);
        for k in 1..=k_n {
            let xk = node_state(x, k);
            for c in 0..4 {
                res.push(ends[k - 1][c] - xk[c]);
            }
        }
        res.extend_from_slice(&self.terminal(&ends[k_n]));
        res
    }

    fn weights(&self, x: &[f64], ends: &[RadialState]) -> Vec<f64> {
        let k_n = self.nodes.len();
        let mut w = Vec::with_capacity(4 * k_n + 2);
        for k in 1..=k_n {
            let xk = node_state(x, k);
            for c in 0..4 {
                w.push(xk[c].abs() + 1e-16);
            }
        }
        let y = &ends[k_n];
        let (lam, _) = self.eig;
        for i in 0..2 {
            let mu = lam[i].max(0.0).sqrt();
            let (v, dv) = if self.eig.1[0][i].abs() >= self.eig.1[1][i].abs() {
                ((y[0] - self.vac.a).abs(), y[1].abs())
            } else {
                ((y[2] - self.vac.b).abs(), y[3].abs())
            };
            w.push(dv + mu * v + 1e-16);
        }
        w
    }

    fn jacobian(&self, x: &[f64], ends: &[RadialState]) -> Result<Option<DMatrix<f64>>> {
        let k_n = self.nodes.len();
        let n = x.len();
        let mut j = DMatrix::<f64>::zeros(n, n);
        let rows_of = |seg: usize| -> std::ops::Range<usize> {
            if seg < k_n {
                4 * seg..4 * seg + 4
            } else {
                4 * k_n..4 * k_n + 2
            }
        };
        let out_vec = |seg: usize, y: &RadialState| -> Vec<f64> {
            if seg < k_n {
                y.to_vec()
            } else {
                self.terminal(y).to_vec()
            }
        };
        for col in 0..n {
            let seg = if col < 2 { 0 } else { (col - 2) / 4 + 1 };
            let mut xp = x.to_vec();
            let h = 1e-7 * x[col].abs().max(1e-14);
            xp[col] += h;
            let h = xp[col] - x[col];
            let Some(yp) = self.segment_end(seg, &xp)? else {
                return Ok(None);
            };
            let base = out_vec(seg, &ends[seg]);
            let pert = out_vec(seg, &yp);
            for (r, row) in rows_of(seg).enumerate() {
                j[(row, col)] += (pert[r] - base[r]) / h;
            }
            if col >= 2 {
                // -x_k in the continuity residual of node k
                let k = (col - 2) / 4;
                let c = (col - 2) % 4;
                j[(4 * k + c, col)] -= 1.0;
            }
        }
        Ok(Some(j))
    }
}

fn node_state(x: &[f64], k: usize) -> RadialState {
    let o = 2 + 4 * (k - 1);
    [x[o], x[o + 1], x[o + 2], x[o + 3]]
}

fn invert2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn scaled_norm(res: &[f64], w: &[f64]) -> f64 {
    res.iter().zip(w).map(|(r, w)| (r / w).abs()).fold(0.0, f64::max)
}

/// Coupled solve seeded from [`fixed_point_solve`].
pub fn coupled_shoot(params: &CouplingParameters, spec: &ProblemSpec, controls: &SolverControls) -> Result<ProfileSolution> {
    let seed = fixed_point_solve(params, spec, controls)?;
    coupled_shoot_seeded(&seed, controls).map(|(s, _)| s)
}

/// Damped Newton multiple shooting started from an existing solution's
/// parameters and node states.
pub fn coupled_shoot_seeded(seed: &ProfileSolution, controls: &SolverControls) -> Result<(ProfileSolution, CoupledDiagnostics)> {
    controls.check()?;
    let params = seed.params;
    let spec = seed.spec;
    let vac = validate_parameters(&params, &spec)?;
    if spec.is_trivial() {
        let sol = constant_solution(&params, &spec, controls)?;
        return Ok((
            sol,
            CoupledDiagnostics {
                newton_steps: 0,
                residual_trail: vec![0.0],
                coupling_ratio: 0.0,
                nodes: Vec::new(),
            },
        ));
    }
    let r_max = seed.r_max;
    let r_eps = seed.r_eps;
    let h_grid = seed.spacing();
    if !(h_grid > 0.0) {
        return Err(Error::InvalidArgument("seed profile must be on a uniform grid".into()));
    }
    let (_, mu_max) = vacuum_rates(&params, spec.case, &vac);
    let spacing = 7.0 / mu_max.max(1e-3);
    let segs = (r_max / spacing).ceil().max(1.0) as usize;
    let mut nodes = Vec::new();
    let mut idx = Vec::new();
    let last = seed.profile.len() - 1;
    for k in 1..segs {
        let i = ((k as f64 * r_max / segs as f64) / h_grid).round() as usize;
        if i > 0 && i < last && idx.last().map_or(true, |&p| i > p) {
            idx.push(i);
            nodes.push(seed.profile.r[i]);
        }
    }
    let mass = vacuum_mass_matrix(&params, spec.case, &vac);
    let sys = System {
        params,
        spec,
        vac,
        r_eps,
        r_max,
        nodes: nodes.clone(),
        ode: RadialOde::new(params, spec, Mode::Coupled),
        events: EventSet::guard_only(&vac),
        controls,
        eig: symmetric_eigen(mass),
        far_field: far_field(&params, &spec, &vac, r_max),
    };

    let mut x = vec![seed.d0, seed.c0];
    for &i in &idx {
        x.extend_from_slice(&seed.profile.state_at(i));
    }
    let diverged = |trail: &[f64]| Error::NewtonDiverged { trail: trail.to_vec() };

    let mut trail = Vec::new();
    let mut coupling_ratio = f64::NAN;
    let mut ends = sys.ends(&x)?.ok_or_else(|| diverged(&[f64::INFINITY]))?;
    let mut steps = 0;
    loop {
        let res = sys.residual(&x, &ends);
        let w = sys.weights(&x, &ends);
        let norm = scaled_norm(&res, &w);
        trail.push(norm);
        if norm < controls.newton_tol {
            break;
        }
        if steps >= controls.max_newton {
            return Err(diverged(&trail));
        }
        let jac = sys.jacobian(&x, &ends)?.ok_or_else(|| diverged(&trail))?;
        if steps == 0 {
            coupling_ratio = cross_ratio(&jac, &sys);
        }
        let n = x.len();
        let mut js = jac.clone();
        let mut rhs = DVector::<f64>::zeros(n);
        for r in 0..n {
            for c in 0..n {
                js[(r, c)] /= w[r];
            }
            rhs[r] = -res[r] / w[r];
        }
        let dx = js.lu().solve(&rhs).ok_or_else(|| diverged(&trail))?;
        steps += 1;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let xt: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Some(et) = sys.ends(&xt)? {
                let nt = scaled_norm(&sys.residual(&xt, &et), &w);
                if nt < norm * (1.0 - 1e-4 * lambda) || nt < controls.newton_tol {
                    accepted = Some((xt, et));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let small_step = dx[0].abs() <= 1e-13 * x[0].abs() && dx[1].abs() <= 1e-13 * x[1].abs().max(1e-300);
        match accepted {
            Some((xt, et)) => {
                x = xt;
                ends = et;
                if small_step {
                    let res = sys.residual(&x, &ends);
                    trail.push(scaled_norm(&res, &sys.weights(&x, &ends)));
                    break;
                }
            }
            // at the integration noise floor no descent is possible
            None if small_step || norm < 1e3 * controls.newton_tol => break,
            None => return Err(diverged(&trail)),
        }
    }

    // stitch the segments into one trajectory
    let mut samples: Vec<Sample> = Vec::new();
    for k in 0..sys.segments() {
        let t = sys.segment(k, &x)?.ok_or_else(|| diverged(&trail))?;
        for s in t.samples() {
            if samples.last().map_or(true, |p| s.r > p.r) {
                samples.push(*s);
            }
        }
    }
    let traj = Trajectory::from_samples(samples);
    let series = sys.series(x[0], x[1])?;
    let profile = RadialProfile::sample_uniform(r_max, seed.profile.len() - 1, |r| {
        if r <= r_eps {
            let (jf, jg) = series.jets(r);
            [jf[0], jf[1], jg[0], jg[1]]
        } else {
            traj.at(r)
        }
    });
    let sol = ProfileSolution {
        profile,
        d0: x[0],
        c0: x[1],
        case: spec.case,
        params,
        spec,
        vacuum: vac,
        r_max,
        r_eps,
        iterations: steps,
        method: SolveMethod::Coupled,
    };
    Ok((
        sol,
        CoupledDiagnostics {
            newton_steps: steps,
            residual_trail: trail,
            coupling_ratio,
            nodes,
        },
    ))
}

/// Largest `|cross-field entry| / max |own-field entry|` over the rows of `jac`.
fn cross_ratio(jac: &DMatrix<f64>, sys: &System<'_>) -> f64 {
    let n = jac.ncols();
    let k_n = sys.nodes.len();
    let col_is_f = |c: usize| if c < 2 { c == 0 } else { (c - 2) % 4 < 2 };
    let row_is_f = |r: usize| {
        if r < 4 * k_n {
            r % 4 < 2
        } else {
            let i = r - 4 * k_n;
            sys.eig.1[0][i].abs() >= sys.eig.1[1][i].abs()
        }
    };
    let mut worst: f64 = 0.0;
    for r in 0..jac.nrows() {
        let (mut own, mut cross): (f64, f64) = (0.0, 0.0);
        for c in 0..n {
            let v = jac[(r, c)].abs();
            if col_is_f(c) == row_is_f(r) {
                own = own.max(v);
            } else {
                cross = cross.max(v);
            }
        }
        if own > 0.0 {
            worst = worst.max(cross / own);
        }
    }
    worst
}
