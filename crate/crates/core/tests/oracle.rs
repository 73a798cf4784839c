mod common;

use common::*;
use tcgl_core::cli::{minimality_probe, probe_seed};
use tcgl_core::model::{CouplingParameters, ProblemSpec};
use tcgl_core::oracle::{
    compare_profiles, discrete_energy, impose_boundary, relax, seed_fields, to_profile, FlowControls, GridFields,
    RadialGrid, Relaxed,
};

fn relaxed(p: &(CouplingParameters, ProblemSpec), r_max: f64, h: f64) -> (RadialGrid, Relaxed) {
    let grid = RadialGrid::uniform(r_max, (r_max / h).round() as usize).unwrap();
    let init = seed_fields(&grid, &p.0, &p.1).unwrap();
    let out = relax(&p.0, &p.1, &grid, &init, &FlowControls::default()).unwrap();
    (grid, out)
}

#[test]
fn classical_reference_converges() {
    let coarse = classical_gl(1.0, 1, 20.0, 0.1);
    let fine = classical_gl(1.0, 1, 20.0, 0.05);
    let mut d: f64 = 0.0;
    for (i, &f) in coarse.f.iter().enumerate() {
        d = d.max((f - fine.f[2 * i]).abs());
    }
    assert!(d < 1e-7, "extrapolated profiles differ by {d:e}");
    assert!((fine.d0 - 0.583189495859883).abs() < 1e-7, "D = {}", fine.d0);
}

#[test]
fn vacuum_has_zero_energy() {
    let (p, spec) = decoupled();
    let spec0 = ProblemSpec::two_vev(0, 0).unwrap();
    let grid = RadialGrid::uniform(5.0, 50).unwrap();
    let u = GridFields {
        f: vec![1.0; 51],
        g: vec![1.0; 51],
    };
    assert_eq!(discrete_energy(&grid, &u, &p, &spec0).unwrap().total, 0.0);
    // with winding the constant state violates the origin values
    assert!(discrete_energy(&grid, &u, &p, &spec).is_err());
}

#[test]
fn energy_matches_hand_evaluation() {
    let (p, spec) = decoupled();
    let c = classical_gl(1.0, 1, 10.0, 0.05);
    let grid = RadialGrid::uniform(10.0, c.r.len() - 1).unwrap();
    let mut u = GridFields {
        f: c.f.clone(),
        g: c.f.clone(),
    };
    impose_boundary(&grid, &mut u, &p, &spec).unwrap();
    let e = discrete_energy(&grid, &u, &p, &spec).unwrap();

    // each decoupled field carries (f')^2 + f^2/r^2 + (f^2 - 1)^2 / 2 against r dr
    let h = c.h;
    let last = c.r.len() - 1;
    let one = |y: &[f64]| {
        let mut s = 0.0;
        for i in 0..last {
            let rm = (i as f64 + 0.5) * h;
            s += rm * (y[i + 1] - y[i]).powi(2) / h;
        }
        for (i, &v) in y.iter().enumerate() {
            let r = i as f64 * h;
            let w = if i == 0 {
                h * h / 8.0
            } else if i == last {
                r * h / 2.0 - h * h / 8.0
            } else {
                r * h
            };
            let cent = if i == 0 { 0.0 } else { v * v / (r * r) };
            s += w * (cent + 0.5 * (v * v - 1.0).powi(2));
        }
        s
    };
    let by_hand = one(&u.f) + one(&u.g);
    assert!((e.total - by_hand).abs() < 1e-8 * by_hand, "{} vs {by_hand}", e.total);
}

#[test]
fn energy_converges_at_second_order() {
    for (name, p) in [("decoupled", decoupled()), ("generic", generic())] {
        let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| relaxed(&p, 10.0, h).1.energy.total).collect();
        let ratio = (e[0] - e[1]).abs() / (e[1] - e[2]).abs();
        assert!((e[0] - e[1]).abs() < 4.0 * (e[1] - e[2]).abs(), "{name}: ratio {ratio}");
        assert!(ratio > 3.5, "{name}: ratio {ratio} is below second order");
    }
}

#[test]
fn relaxed_profile_matches_classical_solution() {
    let p = crit3();
    let (grid, out) = relaxed(&p, 20.0, 0.05);
    let c = classical_gl(2.0, 1, 20.0, 0.05);
    let d = c.sup_distance(grid.nodes(), &out.fields.f, 20.0);
    assert!(d < 1e-3, "f differs by {d:e}");
    assert!(out.fields.g.iter().all(|g| g.abs() < 1e-6));
}

#[test]
fn condensate_sits_in_the_core() {
    let p = condensing();
    let (_, out) = relaxed(&p, 40.0, 0.1);
    let g = &out.fields.g;
    assert!(g[0] > 0.0);
    assert!(g.windows(2).all(|w| w[1] <= w[0]), "g is not decreasing");
    let shot = solve(p, None);
    assert!((g[0] - shot.c0).abs() < 2e-3, "g(0) = {} against b0 = {}", g[0], shot.c0);
}

#[test]
fn relaxed_state_is_a_local_minimum() {
    let (p, spec) = decoupled();
    let (grid, out) = relaxed(&(p, spec), 10.0, 0.1);
    let probe = minimality_probe(&grid, &out.fields, &p, &spec, probe_seed(), 100, 1e-3).unwrap();
    assert!(probe.passed, "{probe:?}");
    assert_eq!(probe.raised, 100);
}

#[test]
fn oracle_separates_wrong_parameters() {
    let (p, spec) = decoupled();
    let (grid, out) = relaxed(&(p, spec), 12.0, 0.05);
    let ours = to_profile(&grid, &out.fields);
    let right = solve((p, spec), None);
    let wrong = solve((CouplingParameters::new(1.5, 1.0, 0.0, 1.0), spec), None);
    let window = (0.0, 8.0);
    let d_right = compare_profiles(&ours, &right.profile, window).unwrap();
    let d_wrong = compare_profiles(&ours, &wrong.profile, window).unwrap();
    assert!(d_right < 1e-3, "{d_right:e}");
    assert!(d_wrong > 1e-2, "{d_wrong:e}");
}
