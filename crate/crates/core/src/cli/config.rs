//! Command-line flags and `key=value` config files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CouplingParameters, ProblemSpec, VevCase};
use crate::shoot::SolverControls;

#[derive(Debug, Parser)]
#[command(name = "tcgl", version, about = "Radial vortex profiles of the two-component Ginzburg-Landau model")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Solve one configuration, verify it and write profile, report and plot data.
    Solve(Flags),
    /// Re-verify a stored profile file.
    Verify {
        /// Profile file written by `solve` or `oracle`.
        profile: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Relax the energy on a finite-difference grid.
    Oracle(Flags),
    /// Solve a grid of values of one coupling.
    Sweep(Flags),
}

#[derive(Debug, Default, Clone, clap::Args)]
struct Flags {
    #[arg(long)]
    case: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    beta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    betap: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long = "fp-tol")]
    fp_tol: Option<f64>,
    #[arg(long = "shoot-tol")]
    shoot_tol: Option<f64>,
    /// Output grid intervals.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the coupled Newton solve and compare.
    #[arg(long)]
    crosscheck: bool,
    /// Also relax with the gradient-flow oracle and compare.
    #[arg(long)]
    oracle: bool,
    /// Concurrent sweep points (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coupling varied by `sweep`: beta1, beta2, betap or alpha.
    #[arg(long = "sweep-param")]
    sweep_param: Option<String>,
    /// Comma-separated values for `sweep`.
    #[arg(long = "sweep-values", allow_hyphen_values = true)]
    sweep_values: Option<String>,
    /// Verification thresholds: solver or oracle.
    #[arg(long)]
    tolerances: Option<String>,
}

const FILE_KEYS: &[&str] = &[
    "case",
    "beta1",
    "beta2",
    "betap",
    "alpha",
    "n",
    "m",
    "rmax",
    "fp-tol",
    "shoot-tol",
    "grid",
    "out",
    "crosscheck",
    "oracle",
    "jobs",
    "sweep-param",
    "sweep-values",
    "tolerances",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Beta1,
    Beta2,
    BetaPrime,
    Alpha,
}

impl SweepParam {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "beta1" => Ok(SweepParam::Beta1),
            "beta2" => Ok(SweepParam::Beta2),
            "betap" => Ok(SweepParam::BetaPrime),
            "alpha" => Ok(SweepParam::Alpha),
            other => Err(Error::Usage(format!("unknown sweep parameter `{other}`"))),
        }
    }

    pub fn apply(&self, p: &CouplingParameters, v: f64) -> CouplingParameters {
        let mut q = *p;
        match self {
            SweepParam::Beta1 => q.beta1 = v,
            SweepParam::Beta2 => q.beta2 = v,
            SweepParam::BetaPrime => q.beta_prime = v,
            SweepParam::Alpha => q.alpha = v,
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TolerancePreset {
    Solver,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    Solve,
    Verify { profile: PathBuf },
    Oracle,
    Sweep { param: SweepParam, values: Vec<f64> },
}

/// A fully parsed invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Absent only for `verify`, which reads them from the profile header.
    pub params: Option<CouplingParameters>,
    pub spec: Option<ProblemSpec>,
    #[serde(skip)]
    pub controls: SolverControls,
    pub r_max: Option<f64>,
    pub fp_tol: f64,
    pub shoot_tol: f64,
    pub grid: Option<usize>,
    pub out: PathBuf,
    pub crosscheck: bool,
    pub oracle: bool,
    pub jobs: usize,
    /// `None` lets `verify` choose from the profile's solve method.
    pub tolerances: Option<TolerancePreset>,
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, (usize, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key=value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if !FILE_KEYS.contains(&key.as_str()) {
            return Err(Error::Usage(format!("config line {}: unknown key `{key}`", k + 1)));
        }
        out.insert(key, (k + 1, value.trim().to_string()));
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, line: usize, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Usage(format!("config line {line}: bad value `{v}` for `{key}`")))
}

fn parse_bool(key: &str, line: usize, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Usage(format!("config line {line}: bad value `{v}` for `{key}`"))),
    }
}

/// Fills every flag left unset on the command line from the file.
fn merge_file(flags: &mut Flags, file: &BTreeMap<String, (usize, String)>) -> Result<()> {
    for (key, (line, v)) in file {
        let (k, l) = (key.as_str(), *line);
        match k {
            "case" => flags.case = flags.case.take().or_else(|| Some(v.clone())),
            "beta1" => flags.beta1 = flags.beta1.or(Some(parse_value(k, l, v)?)),
            "beta2" => flags.beta2 = flags.beta2.or(Some(parse_value(k, l, v)?)),
            "betap" => flags.betap = flags.betap.or(Some(parse_value(k, l, v)?)),
            "alpha" => flags.alpha = flags.alpha.or(Some(parse_value(k, l, v)?)),
            "n" => flags.n = flags.n.or(Some(parse_value(k, l, v)?)),
            "m" => flags.m = flags.m.or(Some(parse_value(k, l, v)?)),
            "rmax" => flags.rmax = flags.rmax.or(Some(parse_value(k, l, v)?)),
            "fp-tol" => flags.fp_tol = flags.fp_tol.or(Some(parse_value(k, l, v)?)),
            "shoot-tol" => flags.shoot_tol = flags.shoot_tol.or(Some(parse_value(k, l, v)?)),
            "grid" => flags.grid = flags.grid.or(Some(parse_value(k, l, v)?)),
            "out" => flags.out = flags.out.take().or_else(|| Some(PathBuf::from(v))),
            "crosscheck" => flags.crosscheck = flags.crosscheck || parse_bool(k, l, v)?,
            "oracle" => flags.oracle = flags.oracle || parse_bool(k, l, v)?,
            "jobs" => flags.jobs = flags.jobs.or(Some(parse_value(k, l, v)?)),
            "sweep-param" => flags.sweep_param = flags.sweep_param.take().or_else(|| Some(v.clone())),
            "sweep-values" => flags.sweep_values = flags.sweep_values.take().or_else(|| Some(v.clone())),
            "tolerances" => flags.tolerances = flags.tolerances.take().or_else(|| Some(v.clone())),
            _ => unreachable!("keys are validated on read"),
        }
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Usage(format!("--{name} must be positive (got {v})")))
    }
}

fn problem(flags: &Flags) -> Result<(CouplingParameters, ProblemSpec)> {
    let need = |name: &str, v: Option<f64>| v.ok_or_else(|| Error::Usage(format!("missing required parameter --{name}")));
    let case: VevCase = flags
        .case
        .as_deref()
        .ok_or_else(|| Error::Usage("missing required parameter --case".into()))?
        .parse()?;
    let params = CouplingParameters::new(
        need("beta1", flags.beta1)?,
        need("beta2", flags.beta2)?,
        need("betap", flags.betap)?,
        need("alpha", flags.alpha)?,
    );
    if !params.is_finite() {
        return Err(Error::Usage("couplings must be finite".into()));
    }
    let n = flags.n.ok_or_else(|| Error::Usage("missing required parameter --n".into()))?;
    let m = match (case, flags.m) {
        (VevCase::OneVev, None) => 0,
        (VevCase::TwoVev, None) => return Err(Error::Usage("missing required parameter --m".into())),
        (_, Some(m)) => m,
    };
    let spec = ProblemSpec::new(n, m, case).map_err(|e| Error::Usage(e.to_string()))?;
    Ok((params, spec))
}

/// Parses `argv` (program name first), merging `--config FILE` underneath the flags.
pub fn parse_config<I, S>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    parse_or_help(argv)?.map_err(Error::Usage)
}

/// Like [`parse_config`], but `--help` and `--version` give `Ok(Err(text))`.
pub(crate) fn parse_or_help<I, S>(argv: I) -> Result<std::result::Result<RunConfig, String>>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    use clap::error::ErrorKind;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => return Ok(Err(e.to_string())),
        Err(e) => return Err(Error::Usage(e.to_string().trim_end().to_string())),
    };
    let (kind, mut flags, profile) = match cli.command {
        CommandArgs::Solve(f) => ("solve", f, None),
        CommandArgs::Verify { profile, flags } => ("verify", flags, Some(profile)),
        CommandArgs::Oracle(f) => ("oracle", f, None),
        CommandArgs::Sweep(f) => ("sweep", f, None),
    };
    if let Some(path) = flags.config.clone() {
        let file = read_config_file(&path)?;
        merge_file(&mut flags, &file)?;
    }

    let (params, spec) = if kind == "verify" && flags.case.is_none() && flags.beta1.is_none() {
        (None, None)
    } else {
        let (p, s) = problem(&flags)?;
        (Some(p), Some(s))
    };

    let defaults = SolverControls::default();
    let fp_tol = positive("fp-tol", flags.fp_tol.unwrap_or(defaults.fp_tol))?;
    let shoot_tol = positive("shoot-tol", flags.shoot_tol.unwrap_or(defaults.shoot_tol))?;
    let r_max = flags.rmax.map(|v| positive("rmax", v)).transpose()?;
    if let Some(g) = flags.grid {
        if g < 8 {
            return Err(Error::Usage(format!("--grid must be at least 8 intervals (got {g})")));
        }
    }
    let controls = SolverControls {
        r_max,
        fp_tol,
        shoot_tol,
        grid: flags.grid,
        ..defaults
    };
    let tolerances = match flags.tolerances.as_deref() {
        None => None,
        Some("solver") => Some(TolerancePreset::Solver),
        Some("oracle") => Some(TolerancePreset::Oracle),
        Some(other) => return Err(Error::Usage(format!("unknown tolerance preset `{other}`"))),
    };

    let command = match kind {
        "solve" => Command::Solve,
        "oracle" => Command::Oracle,
        "verify" => Command::Verify {
            profile: profile.expect("verify carries a path"),
        },
        _ => {
            let param = SweepParam::parse(flags.sweep_param.as_deref().unwrap_or("betap"))?;
            let list = flags
                .sweep_values
                .as_deref()
                .ok_or_else(|| Error::Usage("sweep needs --sweep-values".into()))?;
            let values = list
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Usage(format!("bad sweep value `{s}`"))))
                .collect::<Result<Vec<_>>>()?;
            if values.is_empty() {
                return Err(Error::Usage("sweep needs at least one value".into()));
            }
            Command::Sweep { param, values }
        }
    };

    Ok(Ok(RunConfig {
        command,
        params,
        spec,
        controls,
        r_max,
        fp_tol,
        shoot_tol,
        grid: flags.grid,
        out: flags.out.unwrap_or_else(|| PathBuf::from("tcgl-out")),
        crosscheck: flags.crosscheck,
        oracle: flags.oracle,
        jobs: flags.jobs.unwrap_or(0),
        tolerances,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("tcgl".to_string())
            .chain(s.split_whitespace().map(String::from))
            .collect()
    }

    #[test]
    fn solve_flags_parse() {
        let cfg = parse_config(args("solve --case 2vev --beta1 1 --beta2 1 --betap 0 --alpha 1 --n 1 --m 1")).unwrap();
        assert_eq!(cfg.command, Command::Solve);
        assert_eq!(cfg.params, Some(CouplingParameters::new(1.0, 1.0, 0.0, 1.0)));
        assert_eq!(cfg.spec.unwrap().m, 1);
    }

    #[test]
    fn one_vev_rejects_second_winding() {
        let e = parse_config(args("solve --case 1vev --beta1 2 --beta2 2 --betap 1.5 --alpha 1 --n 1 --m 2")).unwrap_err();
        assert!(matches!(e, Error::Usage(_)));
    }

    #[test]
    fn missing_coupling_is_named() {
        let e = parse_config(args("solve --case 1vev --beta1 2 --beta2 2 --alpha 1 --n 1")).unwrap_err();
        assert!(e.to_string().contains("betap"), "{e}");
    }

    #[test]
    fn flags_override_file_and_unknown_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# demo\ncase = 1vev\nbeta1 = 2\nbeta2 = 2\nbetap = 1.5\nalpha = 1\nn = 1\nfp_tol = 1e-9\n").unwrap();
        let cfg = parse_config(args(&format!("solve --config {} --beta1 3", path.display()))).unwrap();
        assert_eq!(cfg.params.unwrap().beta1, 3.0);
        assert_eq!(cfg.fp_tol, 1e-9);
        std::fs::write(&path, "case = 1vev\nbogus = 1\n").unwrap();
        let e = parse_config(args(&format!("solve --config {}", path.display()))).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn sweep_values_parse() {
        let cfg = parse_config(args(
            "sweep --case 1vev --beta1 1 --beta2 1 --betap 0 --alpha 1 --n 1 --sweep-values 0,0.5,1",
        ))
        .unwrap();
        assert_eq!(
            cfg.command,
            Command::Sweep {
                param: SweepParam::BetaPrime,
                values: vec![0.0, 0.5, 1.0]
            }
        );
    }
}
