//! Profile files, JSON reports and plot data.
//!
//! A profile file is a `#`-prefixed `key=value` header followed by one line
//! per sample with the columns `r f df g dg`. Samples are written with 17
//! significant digits so that reading gives back the same bits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{validate_parameters, CouplingParameters, ProblemSpec, VevCase};
use crate::profile::RadialProfile;
use crate::shoot::{ProfileSolution, SolveMethod};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Renders `sol` as profile-file text.
pub fn format_profile(sol: &ProfileSolution) -> String {
    let p = &sol.params;
    let mut s = String::new();
    let c_key = match sol.case {
        VevCase::OneVev => "b0",
        VevCase::TwoVev => "c0",
    };
    let header = [
        ("version", VERSION.to_string()),
        ("case", sol.case.as_str().to_string()),
        ("n", sol.spec.n.to_string()),
        ("m", sol.spec.m.to_string()),
        ("beta1", p.beta1.to_string()),
        ("beta2", p.beta2.to_string()),
        ("betap", p.beta_prime.to_string()),
        ("alpha", p.alpha.to_string()),
        ("d0", format!("{:.16e}", sol.d0)),
        (c_key, format!("{:.16e}", sol.c0)),
        ("r_max", sol.r_max.to_string()),
        ("r_eps", format!("{:.16e}", sol.r_eps)),
        ("iterations", sol.iterations.to_string()),
        ("method", sol.method.as_str().to_string()),
    ];
    for (k, v) in header {
        let _ = writeln!(s, "# {k}={v}");
    }
    let pr = &sol.profile;
    for i in 0..pr.len() {
        let _ = writeln!(
            s,
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            pr.r[i], pr.f[i], pr.df[i], pr.g[i], pr.dg[i]
        );
    }
    s
}

pub fn write_profile(path: &Path, sol: &ProfileSolution) -> Result<()> {
    std::fs::write(path, format_profile(sol))?;
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses profile-file text back into a solution. The vacuum is recomputed
/// from the stored couplings.
pub fn parse_profile(text: &str) -> Result<ProfileSolution> {
    let mut header = std::collections::BTreeMap::new();
    let mut profile = RadialProfile::with_capacity(text.lines().count());
    let mut saw_header = false;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if !profile.is_empty() {
                return Err(parse_err(line_no, "header line after data"));
            }
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, "header line is not key=value"))?;
            header.insert(key.trim().to_string(), (line_no, value.trim().to_string()));
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(parse_err(line_no, format!("expected 5 columns, found {}", cols.len())));
        }
        let mut v = [0.0f64; 5];
        for (slot, c) in v.iter_mut().zip(&cols) {
            *slot = c.parse().map_err(|_| parse_err(line_no, format!("bad number `{c}`")))?;
            if !slot.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value `{c}`")));
            }
        }
        if let Some(&last) = profile.r.last() {
            if !(v[0] > last) {
                return Err(parse_err(line_no, "r is not strictly increasing"));
            }
        }
        profile.push(v[0], [v[1], v[2], v[3], v[4]]);
    }
    if !saw_header {
        return Err(parse_err(1, "missing header"));
    }
    if profile.len() < 2 {
        return Err(parse_err(text.lines().count().max(1), "fewer than two samples"));
    }

    let get = |key: &str| -> Result<&(usize, String)> {
        header.get(key).ok_or_else(|| parse_err(1, format!("header lacks `{key}`")))
    };
    fn num<T: std::str::FromStr>(entry: &(usize, String), key: &str) -> Result<T> {
        entry
            .1
            .parse()
            .map_err(|_| parse_err(entry.0, format!("bad value `{}` for `{key}`", entry.1)))
    }
    let case: VevCase = {
        let e = get("case")?;
        e.1.parse().map_err(|_| parse_err(e.0, format!("bad case `{}`", e.1)))?
    };
    let n: u32 = num(get("n")?, "n")?;
    let m: u32 = num(get("m")?, "m")?;
    let spec = ProblemSpec::new(n, m, case).map_err(|e| parse_err(get("m").map(|e| e.0).unwrap_or(1), e.to_string()))?;
    let params = CouplingParameters::new(
        num(get("beta1")?, "beta1")?,
        num(get("beta2")?, "beta2")?,
        num(get("betap")?, "betap")?,
        num(get("alpha")?, "alpha")?,
    );
    let c_key = match case {
        VevCase::OneVev => "b0",
        VevCase::TwoVev => "c0",
    };
    let method: SolveMethod = {
        let e = get("method")?;
        e.1.parse().map_err(|_| parse_err(e.0, format!("bad method `{}`", e.1)))?
    };
    let vacuum = validate_parameters(&params, &spec)?;
    let r_max: f64 = num(get("r_max")?, "r_max")?;
    if (profile.r_max() - r_max).abs() > 1e-9 * r_max.max(1.0) {
        return Err(parse_err(get("r_max")?.0, "r_max disagrees with the last sample"));
    }
    Ok(ProfileSolution {
        profile,
        d0: num(get("d0")?, "d0")?,
        c0: num(get(c_key)?, c_key)?,
        case,
        params,
        spec,
        vacuum,
        r_max,
        r_eps: num(get("r_eps")?, "r_eps")?,
        iterations: header.get("iterations").map(|e| num(e, "iterations")).transpose()?.unwrap_or(0),
        method,
    })
}

pub fn read_profile(path: &Path) -> Result<ProfileSolution> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_profile(&text)
}

/// Two-column `r value` data for `f`, `g`, `df`, `dg` and `r (V - V_inf)`,
/// one file per curve under `dir`.
pub fn write_plot_data(dir: &Path, sol: &ProfileSolution) -> Result<()> {
    let p = &sol.profile;
    let density: Vec<f64> = (0..p.len())
        .map(|i| {
            let v = crate::model::potential(crate::model::FieldPoint { f: p.f[i], g: p.g[i] }, &sol.params);
            p.r[i] * (v - sol.vacuum.v_infinity)
        })
        .collect();
    let curves: [(&str, &[f64]); 5] = [
        ("f", &p.f),
        ("g", &p.g),
        ("df", &p.df),
        ("dg", &p.dg),
        ("potential_density", &density),
    ];
    for (name, ys) in curves {
        let mut s = format!("# r {name}\n");
        for (r, y) in p.r.iter().zip(ys) {
            let _ = writeln!(s, "{r:.10e} {y:.10e}");
        }
        std::fs::write(dir.join(format!("{name}.dat")), s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VacuumState;

    fn sample() -> ProfileSolution {
        let profile = RadialProfile::sample_uniform(2.0, 20, |r| [r.tanh(), 1.0 / r.cosh().powi(2), 0.1 / 3.0, 0.0]);
        ProfileSolution {
            profile,
            d0: 1.0 / 3.0,
            c0: 0.1,
            case: VevCase::OneVev,
            params: CouplingParameters::new(2.0, 2.0, 1.5, 1.0),
            spec: ProblemSpec::one_vev(1).unwrap(),
            vacuum: VacuumState {
                a: 1.0,
                b: 0.0,
                v_infinity: 0.0,
            },
            r_max: 2.0,
            r_eps: 1e-3,
            iterations: 3,
            method: SolveMethod::FixedPoint,
        }
    }

    #[test]
    fn profile_text_round_trips() {
        let s = sample();
        let back = parse_profile(&format_profile(&s)).unwrap();
        assert_eq!(back.profile, s.profile);
        assert_eq!(back.d0.to_bits(), s.d0.to_bits());
        assert_eq!(back.c0.to_bits(), s.c0.to_bits());
        assert_eq!(back.params, s.params);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = format_profile(&sample());
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let k = lines.iter().position(|l| !l.starts_with('#')).unwrap() + 3;
        lines[k] = "1.0 2.0 3.0".into();
        match parse_profile(&lines.join("\n")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, k + 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_profile("0 1 2 3 4\n0.1 1 2 3 4\n"), Err(Error::Parse { .. })));
    }
}
