//! The `tcgl` command-line tool: `solve`, `verify`, `oracle` and `sweep`.
//!
//! Exit codes: 0 success, 2 usage, 3 parameters outside the solvable regime,
//! 4 solver failure, 5 verification failure. Failures print a one-line JSON
//! error object on stderr.

mod config;
pub mod files;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::{parse_config, Command, RunConfig, SweepParam, TolerancePreset};

use crate::batch::run;
use crate::error::{Error, Result};
use crate::model::{validate_parameters, CouplingParameters, ProblemSpec, VacuumState};
use crate::oracle::{discrete_energy, impose_boundary, relax, seed_fields, to_profile, compare_profiles, FlowControls, GridFields, RadialGrid};
use crate::shoot::{check_monotone_regime, coupled_shoot_seeded, fixed_point_solve, ProfileSolution, SolveMethod, SolverControls};
use crate::verify::{verify, VerificationReport, VerifyTolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REGIME: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// Oracle grid spacing when `--grid` is not given.
pub const ORACLE_SPACING: f64 = 0.05;
/// Largest accepted sup-norm distance between shooting and oracle profiles.
pub const ORACLE_AGREEMENT: f64 = 1e-3;
pub const PROBE_SAMPLES: usize = 100;
pub const PROBE_SIZE: f64 = 1e-3;

/// A failed command, tagged with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

impl Failure {
    fn new(code: i32, error: Error) -> Self {
        Self { code, error }
    }

    /// `{"error": {...}}` as one line of JSON.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.error.kind(),
                "message": self.error.to_string(),
                "exit_code": self.code,
            }
        })
        .to_string()
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::InvalidSpec(_) | Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io(_) => EXIT_USAGE,
        Error::RegimeViolation(_) | Error::RadicandNonpositive { .. } => EXIT_REGIME,
        _ => EXIT_SOLVER,
    }
}

fn fail(e: Error) -> Failure {
    Failure::new(exit_code_for(&e), e)
}

/// Parameter checks that put a problem outside the solvable regime all map to exit 3.
fn admissible(params: &CouplingParameters, spec: &ProblemSpec) -> std::result::Result<VacuumState, Failure> {
    let vac = validate_parameters(params, spec).map_err(fail)?;
    check_monotone_regime(params, spec).map_err(|e| Failure::new(EXIT_REGIME, e))?;
    Ok(vac)
}

fn problem(cfg: &RunConfig) -> std::result::Result<(CouplingParameters, ProblemSpec), Failure> {
    match (cfg.params, cfg.spec) {
        (Some(p), Some(s)) => Ok((p, s)),
        _ => Err(fail(Error::Usage("missing problem parameters".into()))),
    }
}

fn tolerances(preset: Option<TolerancePreset>, method: SolveMethod) -> VerifyTolerances {
    match (preset, method) {
        (Some(TolerancePreset::Oracle), _) | (None, SolveMethod::GradientFlow) => VerifyTolerances::oracle(),
        _ => VerifyTolerances::default(),
    }
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub d0: f64,
    /// `b0` for 1VEV, `C0` for 2VEV.
    pub c0: f64,
    pub r_max: f64,
    pub r_eps: f64,
    pub iterations: usize,
    pub method: SolveMethod,
    pub vacuum: VacuumState,
    pub samples: usize,
}

impl SolutionSummary {
    fn of(sol: &ProfileSolution) -> Self {
        Self {
            d0: sol.d0,
            c0: sol.c0,
            r_max: sol.r_max,
            r_eps: sol.r_eps,
            iterations: sol.iterations,
            method: sol.method,
            vacuum: sol.vacuum,
            samples: sol.profile.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub d0: f64,
    pub c0: f64,
    pub d0_difference: f64,
    pub c0_difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub spacing: f64,
    pub steps: usize,
    pub energy: f64,
    pub window: (f64, f64),
    pub distance: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalityProbe {
    pub seed: u64,
    pub samples: usize,
    pub size: f64,
    pub raised: usize,
    /// Smallest energy increase seen.
    pub min_increase: f64,
    pub passed: bool,
}

/// Contents of `report.json`; `timestamp` is the only run-dependent field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub timestamp: u64,
    pub params: CouplingParameters,
    pub spec: ProblemSpec,
    pub solution: SolutionSummary,
    pub tolerances: VerifyTolerances,
    pub verification: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crosscheck: Option<CrossCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimality: Option<MinimalityProbe>,
    pub passed: bool,
}

impl Report {
    fn new(command: &'static str, sol: &ProfileSolution, tol: VerifyTolerances) -> Self {
        let verification = verify(sol, &tol);
        Self {
            tool: "tcgl",
            version: files::VERSION,
            command,
            timestamp: timestamp(),
            params: sol.params,
            spec: sol.spec,
            solution: SolutionSummary::of(sol),
            tolerances: tol,
            passed: verification.passed(),
            verification,
            crosscheck: None,
            oracle: None,
            minimality: None,
        }
    }

    fn settle(&mut self) {
        self.passed = self.verification.passed()
            && self.crosscheck.as_ref().map_or(true, |c| c.passed)
            && self.oracle.as_ref().map_or(true, |c| c.passed)
            && self.minimality.as_ref().map_or(true, |c| c.passed);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Names of everything that failed.
    pub fn failing_checks(&self) -> Vec<String> {
        let mut out: Vec<String> = self.verification.failures().map(|c| c.name.clone()).collect();
        if self.crosscheck.as_ref().is_some_and(|c| !c.passed) {
            out.push("crosscheck".into());
        }
        if self.oracle.as_ref().is_some_and(|c| !c.passed) {
            out.push("oracle_agreement".into());
        }
        if self.minimality.as_ref().is_some_and(|c| !c.passed) {
            out.push("minimality".into());
        }
        out
    }
}

/// Result of a successful or verification-failed command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Report>,
    pub out_dir: Option<PathBuf>,
}

fn outcome_of(report: Report, out_dir: Option<PathBuf>) -> Outcome {
    Outcome {
        code: if report.passed { EXIT_OK } else { EXIT_VERIFY },
        report: Some(report),
        out_dir,
    }
}

fn write_outputs(dir: &Path, sol: &ProfileSolution, report: &Report) -> std::result::Result<(), Failure> {
    let io = |e: std::io::Error| fail(Error::Io(format!("{}: {e}", dir.display())));
    std::fs::create_dir_all(dir.join("plots")).map_err(io)?;
    files::write_profile(&dir.join("profile.dat"), sol).map_err(fail)?;
    std::fs::write(dir.join("report.json"), report.to_json() + "\n").map_err(io)?;
    files::write_plot_data(&dir.join("plots"), sol).map_err(fail)?;
    Ok(())
}

fn oracle_grid(cfg_grid: Option<usize>, r_max: f64) -> std::result::Result<RadialGrid, Failure> {
    let intervals = cfg_grid.unwrap_or_else(|| (r_max / ORACLE_SPACING).round() as usize);
    RadialGrid::uniform(r_max, intervals).map_err(fail)
}

fn cross_check(sol: &ProfileSolution, controls: &SolverControls) -> std::result::Result<CrossCheck, Failure> {
    let (c, _) = coupled_shoot_seeded(sol, controls).map_err(fail)?;
    let tol = 10.0 * controls.fp_tol;
    let (dd, dc) = ((c.d0 - sol.d0).abs(), (c.c0 - sol.c0).abs());
    Ok(CrossCheck {
        d0: c.d0,
        c0: c.c0,
        d0_difference: dd,
        c0_difference: dc,
        tolerance: tol,
        passed: dd <= tol && dc <= tol,
    })
}

fn oracle_comparison(sol: &ProfileSolution) -> std::result::Result<OracleComparison, Failure> {
    let grid = oracle_grid(None, sol.r_max)?;
    let init = seed_fields(&grid, &sol.params, &sol.spec).map_err(fail)?;
    let relaxed = relax(&sol.params, &sol.spec, &grid, &init, &FlowControls::default()).map_err(fail)?;
    let window = (0.0, sol.r_max / 2.0);
    let distance = compare_profiles(&sol.profile, &to_profile(&grid, &relaxed.fields), window).map_err(fail)?;
    Ok(OracleComparison {
        spacing: ORACLE_SPACING,
        steps: relaxed.steps,
        energy: relaxed.energy.total,
        window,
        distance,
        tolerance: ORACLE_AGREEMENT,
        passed: distance < ORACLE_AGREEMENT,
    })
}

/// All controls of a run, with the configured `r_max` resolved.
fn controls(cfg: &RunConfig) -> std::result::Result<SolverControls, Failure> {
    let c = cfg.controls.clone();
    c.check().map_err(fail)?;
    Ok(c)
}

/// Solves, verifies and writes `profile.dat`, `report.json` and `plots/`.
pub fn run_solve(cfg: &RunConfig) -> std::result::Result<Outcome, Failure> {
    let (params, spec) = problem(cfg)?;
    admissible(&params, &spec)?;
    let controls = controls(cfg)?;
    let sol = fixed_point_solve(&params, &spec, &controls).map_err(fail)?;
    let mut report = Report::new("solve", &sol, tolerances(cfg.tolerances, sol.method));
    if cfg.crosscheck && !spec.is_trivial() {
        report.crosscheck = Some(cross_check(&sol, &controls)?);
    }
    if cfg.oracle {
        report.oracle = Some(oracle_comparison(&sol)?);
    }
    report.settle();
    write_outputs(&cfg.out, &sol, &report)?;
    Ok(outcome_of(report, Some(cfg.out.clone())))
}

/// Re-verifies a stored profile; the couplings come from its header.
/// Thresholds follow the stored method unless `--tolerances` is given.
pub fn run_verify(path: &Path, cfg: &RunConfig) -> std::result::Result<Outcome, Failure> {
    let sol = files::read_profile(path).map_err(fail)?;
    let mut report = Report::new("verify", &sol, tolerances(cfg.tolerances, sol.method));
    report.settle();
    Ok(outcome_of(report, None))
}

/// `f(h) / h^n` style estimates of the origin data of a grid solution.
fn origin_estimates(grid: &RadialGrid, u: &GridFields, spec: &ProblemSpec) -> (f64, f64) {
    let h = grid.nodes()[1];
    let lead = |y: &[f64], k: u32| if k == 0 { y[0] } else { y[1] / h.powi(k as i32) };
    (lead(&u.f, spec.n), lead(&u.g, spec.m))
}

/// Draws `samples` admissible perturbations of nodal size `size` and counts
/// those that raise the discrete energy.
pub fn minimality_probe(
    grid: &RadialGrid,
    u: &GridFields,
    params: &CouplingParameters,
    spec: &ProblemSpec,
    seed: u64,
    samples: usize,
    size: f64,
) -> Result<MinimalityProbe> {
    let e0 = discrete_energy(grid, u, params, spec)?.total;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raised = 0;
    let mut min_increase = f64::INFINITY;
    for _ in 0..samples {
        let mut v = u.clone();
        for x in v.f.iter_mut().chain(v.g.iter_mut()) {
            *x += size * rng.gen_range(-1.0..=1.0);
        }
        impose_boundary(grid, &mut v, params, spec)?;
        let de = discrete_energy(grid, &v, params, spec)?.total - e0;
        if de > 0.0 {
            raised += 1;
        }
        min_increase = min_increase.min(de);
    }
    Ok(MinimalityProbe {
        seed,
        samples,
        size,
        raised,
        min_increase,
        passed: raised == samples,
    })
}

/// Seed for randomized probes: `TCGL_SEED` when set, else a fixed value.
pub fn probe_seed() -> u64 {
    std::env::var("TCGL_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0x7c91)
}

/// Relaxes on a finite-difference grid, probes minimality and writes the
/// result in profile-file form next to its report.
pub fn run_oracle(cfg: &RunConfig) -> std::result::Result<Outcome, Failure> {
    let (params, spec) = problem(cfg)?;
    let vac = admissible(&params, &spec)?;
    let r_max = cfg.controls.resolved_r_max(&params, spec.case, &vac);
    let grid = oracle_grid(cfg.grid, r_max)?;
    let init = seed_fields(&grid, &params, &spec).map_err(fail)?;
    let relaxed = relax(&params, &spec, &grid, &init, &FlowControls::default()).map_err(fail)?;
    let (d0, c0) = origin_estimates(&grid, &relaxed.fields, &spec);
    let sol = ProfileSolution {
        profile: to_profile(&grid, &relaxed.fields),
        d0,
        c0,
        case: spec.case,
        params,
        spec,
        vacuum: vac,
        r_max,
        r_eps: grid.nodes()[1],
        iterations: relaxed.steps,
        method: SolveMethod::GradientFlow,
    };
    let mut report = Report::new("oracle", &sol, tolerances(cfg.tolerances, sol.method));
    report.minimality = Some(
        minimality_probe(&grid, &relaxed.fields, &params, &spec, probe_seed(), PROBE_SAMPLES, PROBE_SIZE).map_err(fail)?,
    );
    report.settle();
    write_outputs(&cfg.out, &sol, &report)?;
    Ok(outcome_of(report, Some(cfg.out.clone())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct IndexEntry {
    index: usize,
    value: f64,
    params: CouplingParameters,
    dir: String,
    exit_code: i32,
    passed: bool,
    d0: Option<f64>,
    c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SweepIndex {
    tool: &'static str,
    version: &'static str,
    timestamp: u64,
    param: SweepParam,
    spec: ProblemSpec,
    points: Vec<IndexEntry>,
}

/// Runs `solve` at every value of the swept coupling, each point in its own
/// `point-NNN` directory, and writes `index.json`. Points run `--jobs` at a time.
pub fn run_sweep(cfg: &RunConfig, param: SweepParam, values: &[f64]) -> std::result::Result<Outcome, Failure> {
    let (base, spec) = problem(cfg)?;
    let jobs: Vec<(usize, f64, CouplingParameters)> =
        values.iter().enumerate().map(|(i, &v)| (i, v, param.apply(&base, v))).collect();
    let results = run(&jobs, cfg.jobs, |(i, _, params)| {
        let point = RunConfig {
            command: Command::Solve,
            params: Some(*params),
            spec: Some(spec),
            out: cfg.out.join(format!("point-{i:03}")),
            ..cfg.clone()
        };
        run_solve(&point)
    });

    let mut points = Vec::with_capacity(jobs.len());
    let mut worst = EXIT_OK;
    for ((i, v, params), res) in jobs.iter().zip(results) {
        let dir = format!("point-{i:03}");
        let entry = match res {
            Ok(o) => {
                let r = o.report.as_ref().expect("solve reports");
                IndexEntry {
                    index: *i,
                    value: *v,
                    params: *params,
                    dir,
                    exit_code: o.code,
                    passed: r.passed,
                    d0: Some(r.solution.d0),
                    c0: Some(r.solution.c0),
                    error: None,
                }
            }
            Err(f) => IndexEntry {
                index: *i,
                value: *v,
                params: *params,
                dir,
                exit_code: f.code,
                passed: false,
                d0: None,
                c0: None,
                error: serde_json::from_str(&f.to_json()).ok(),
            },
        };
        worst = worst.max(entry.exit_code);
        points.push(entry);
    }
    let index = SweepIndex {
        tool: "tcgl",
        version: files::VERSION,
        timestamp: timestamp(),
        param,
        spec,
        points,
    };
    std::fs::create_dir_all(&cfg.out).map_err(|e| fail(e.into()))?;
    let text = serde_json::to_string_pretty(&index).expect("index serializes");
    std::fs::write(cfg.out.join("index.json"), text + "\n").map_err(|e| fail(e.into()))?;
    Ok(Outcome {
        code: worst,
        report: None,
        out_dir: Some(cfg.out.clone()),
    })
}

/// Dispatches a parsed configuration.
pub fn execute(cfg: &RunConfig) -> std::result::Result<Outcome, Failure> {
    match &cfg.command {
        Command::Solve => run_solve(cfg),
        Command::Verify { profile } => run_verify(profile, cfg),
        Command::Oracle => run_oracle(cfg),
        Command::Sweep { param, values } => run_sweep(cfg, *param, values),
    }
}

/// Full CLI behaviour for `argv`; returns the process exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = match config::parse_or_help(argv) {
        Ok(Ok(c)) => c,
        Ok(Err(help)) => {
            print!("{help}");
            return EXIT_OK;
        }
        Err(e) => {
            eprintln!("{}", Failure::new(EXIT_USAGE, e).to_json());
            return EXIT_USAGE;
        }
    };
    match execute(&cfg) {
        Ok(o) => {
            if let Some(r) = &o.report {
                if matches!(cfg.command, Command::Verify { .. }) {
                    println!("{}", r.to_json());
                }
                if !r.passed {
                    eprintln!(
                        "{}",
                        serde_json::json!({"error": {
                            "kind": "VerificationFailed",
                            "failing_checks": r.failing_checks(),
                            "exit_code": o.code,
                        }})
                    );
                }
            }
            if let Some(d) = &o.out_dir {
                if o.code == EXIT_OK {
                    eprintln!("wrote {}", d.display());
                }
            }
            o.code
        }
        Err(f) => {
            eprintln!("{}", f.to_json());
            f.code
        }
    }
}
