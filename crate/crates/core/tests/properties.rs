use proptest::prelude::*;

use tcgl_core::cli::files::{format_profile, parse_profile};
use tcgl_core::integrate::FieldId;
use tcgl_core::model::{
    eom_rhs, potential, vacuum_potential, validate_parameters, CouplingParameters, FieldPoint,
    ProblemSpec, VevCase,
};
use tcgl_core::profile::{FrozenField, RadialProfile};
use tcgl_core::shoot::{
    bracket_search, check_monotone_regime, class_pair, ParamKind, ProfileSolution, SolveMethod, SolverControls,
};

/// Two-condensate couplings away from `det -> 0`, where `A` and `B` blow up
/// and absolute roundoff bounds stop making sense.
fn two_vev_params() -> impl Strategy<Value = CouplingParameters> {
    (0.3f64..4.0, 0.3f64..4.0, -1.0f64..1.5, 0.1f64..3.0)
        .prop_map(|(b1, b2, bp, a)| CouplingParameters::new(b1, b2, bp, a))
        .prop_filter("two-condensate regime", |p| {
            p.quartic_determinant() >= 0.1 * p.beta1 * p.beta2
                && validate_parameters(p, &ProblemSpec::two_vev(1, 1).unwrap()).is_ok()
        })
}

fn one_vev_params() -> impl Strategy<Value = CouplingParameters> {
    (0.3f64..4.0, 0.3f64..4.0, 0.1f64..2.0, 0.05f64..1.0)
        .prop_map(|(b1, b2, bp, frac)| CouplingParameters::new(b1, b2, bp, frac * bp))
        .prop_filter("one-condensate regime", |p| {
            validate_parameters(p, &ProblemSpec::one_vev(1).unwrap()).is_ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn vacuum_is_stationary(p in two_vev_params()) {
        let vac = validate_parameters(&p, &ProblemSpec::two_vev(1, 1).unwrap()).unwrap();
        let (a2, b2) = (vac.a * vac.a, vac.b * vac.b);
        prop_assert!((p.beta1 * a2 + p.beta_prime * b2 - p.beta1).abs() < 1e-12);
        prop_assert!((p.beta2 * b2 + p.beta_prime * a2 - p.alpha).abs() < 1e-12);
    }

    #[test]
    fn vacuum_potential_matches_substitution(p in two_vev_params()) {
        let vac = validate_parameters(&p, &ProblemSpec::two_vev(1, 1).unwrap()).unwrap();
        let direct = potential(FieldPoint::new(vac.a, vac.b), &p);
        let closed = vacuum_potential(&p).unwrap();
        prop_assert!((direct - closed).abs() <= 1e-12 * closed.abs().max(1e-300) + 1e-15);
        prop_assert_eq!(closed, vac.v_infinity);
    }

    #[test]
    fn trivial_vacuum_has_no_force(p in two_vev_params(), r in 0.01f64..50.0) {
        let spec = ProblemSpec::two_vev(0, 0).unwrap();
        let vac = validate_parameters(&p, &spec).unwrap();
        let (ff, gg) = eom_rhs(r, &[vac.a, 0.0, vac.b, 0.0], &p, &spec);
        // roundoff of the cubic terms
        let tol = 1e-14 * (1.0 + p.max_coupling() * vac.a.max(vac.b).powi(3));
        prop_assert!(ff.abs() < tol && gg.abs() < tol, "{ff} {gg} vs {tol}");
    }

    #[test]
    fn decoupled_equations_split(
        b1 in 0.1f64..4.0, b2 in 0.1f64..4.0, a in 0.1f64..4.0,
        r in 0.01f64..30.0, n in 1u32..4, m in 1u32..4,
        f in 0.0f64..1.5, df in -1.0f64..1.0, g in 0.0f64..1.5, dg in -1.0f64..1.0,
        g_alt in 0.0f64..1.5, f_alt in 0.0f64..1.5,
    ) {
        let p = CouplingParameters::new(b1, b2, 0.0, a);
        let spec = ProblemSpec::two_vev(n, m).unwrap();
        let (ff, gg) = eom_rhs(r, &[f, df, g, dg], &p, &spec);
        prop_assert_eq!(ff.to_bits(), eom_rhs(r, &[f, df, g_alt, dg], &p, &spec).0.to_bits());
        prop_assert_eq!(gg.to_bits(), eom_rhs(r, &[f_alt, df, g, dg], &p, &spec).1.to_bits());
        let inv_r = 1.0 / r;
        let (n2, m2) = (f64::from(n * n), f64::from(m * m));
        let f_only = -df * inv_r + n2 * (inv_r * inv_r) * f + f * (b1 * (f * f - 1.0));
        let g_only = -dg * inv_r + m2 * (inv_r * inv_r) * g + g * (b2 * (g * g) - a);
        prop_assert_eq!(ff.to_bits(), f_only.to_bits());
        prop_assert_eq!(gg.to_bits(), g_only.to_bits());
    }

    #[test]
    fn monotone_regime_matches_far_field_signs(p in two_vev_params(), n in 1u32..4, m in 1u32..4) {
        let spec = ProblemSpec::two_vev(n, m).unwrap();
        let (n2, m2) = (f64::from(n * n), f64::from(m * m));
        let expected = p.beta2 * n2 >= p.beta_prime * m2 && p.beta1 * m2 >= p.beta_prime * n2;
        prop_assert_eq!(check_monotone_regime(&p, &spec).is_ok(), expected);
    }

    #[test]
    fn profile_file_round_trips_bitwise(
        steps in prop::collection::vec((1e-6f64..0.5, prop::array::uniform4(-1e3f64..1e3)), 2..60),
        d0 in 0.0f64..10.0, c0 in 0.0f64..10.0, r_eps in 1e-8f64..1e-2,
    ) {
        let mut profile = RadialProfile::with_capacity(steps.len());
        let mut r = 0.0;
        for (dr, s) in &steps {
            r += dr;
            profile.push(r, *s);
        }
        let params = CouplingParameters::new(2.0, 2.0, 1.0, 1.5);
        let spec = ProblemSpec::two_vev(1, 1).unwrap();
        let sol = ProfileSolution {
            vacuum: validate_parameters(&params, &spec).unwrap(),
            r_max: profile.r_max(),
            profile,
            d0,
            c0,
            case: VevCase::TwoVev,
            params,
            spec,
            r_eps,
            iterations: 7,
            method: SolveMethod::FixedPoint,
        };
        let back = parse_profile(&format_profile(&sol)).unwrap();
        for (x, y) in [(&back.profile.r, &sol.profile.r), (&back.profile.f, &sol.profile.f),
                       (&back.profile.df, &sol.profile.df), (&back.profile.g, &sol.profile.g),
                       (&back.profile.dg, &sol.profile.dg)] {
            prop_assert_eq!(x.len(), y.len());
            for (a, b) in x.iter().zip(y) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        prop_assert_eq!(back.d0.to_bits(), d0.to_bits());
        prop_assert_eq!(back.c0.to_bits(), c0.to_bits());
        prop_assert_eq!(back.r_eps.to_bits(), r_eps.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bracket_endpoints_are_complementary(p in one_vev_params(), n in 1u32..3) {
        let spec = ProblemSpec::one_vev(n).unwrap();
        let controls = SolverControls::default();
        let vac = validate_parameters(&p, &spec).unwrap();
        let r_max = controls.resolved_r_max(&p, spec.case, &vac);
        let frozen = FrozenField::zero(r_max);
        let b = bracket_search(ParamKind::D, VevCase::OneVev, &frozen, &p, &spec, &controls).unwrap();
        prop_assert!(0.0 < b.lo && b.lo < b.hi);
        prop_assert_eq!((b.lo_class, b.hi_class), class_pair(VevCase::OneVev, FieldId::F));
        prop_assert_eq!(b.param_kind, ParamKind::D);
    }
}
