use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;

use halfspace_thermal::fd::{solve, FdGrid};
use halfspace_thermal::model::{to_cartesian, to_polar, PhysicalPoint};
use halfspace_thermal::time_kernels::{t1_ramp, t1_step, t2_step};
use halfspace_thermal::{
    identity_integral, temperature, EvalConfig, ForcingProfile, MaterialScales, ProblemSpec, QuadratureConfig,
};

fn field(r: f64, theta: f64, t: f64, spec: &ProblemSpec) -> f64 {
    temperature(r, theta, t, spec, &EvalConfig::default()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_holds_off_the_axis(theta in 1e-3f64..FRAC_PI_2, sign in prop::bool::ANY) {
        let theta = if sign { theta } else { -theta };
        let r = identity_integral(theta, &QuadratureConfig::default().with_rel_tol(1e-12)).unwrap();
        prop_assert!(r.residual() < 1e-8, "theta {theta}: residual {}", r.residual());
    }

    #[test]
    fn step_kernel_is_a_monotone_fraction(r in 1e-3f64..2.0, beta in 1.0f64..50.0, t in 1e-4f64..5.0) {
        let v = t1_step(r, beta, t);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(t1_step(r, beta * 1.1, t) <= v);
        prop_assert!(t1_step(r, beta, t * 1.1) >= v);
    }

    #[test]
    fn flux_kernel_integrates_the_step_kernel(r in 0.01f64..1.0, beta in 1.0f64..10.0, t in 1e-3f64..2.0) {
        // d/dk of the flux kernel is minus the step kernel, with k = r β.
        let k = r * beta;
        let h = 1e-5 * k;
        let d = (t2_step(k + h, 1.0, t) - t2_step(k - h, 1.0, t)) / (2.0 * h);
        prop_assert!((d + t1_step(k, 1.0, t)).abs() < 1e-6, "{d} vs {}", t1_step(k, 1.0, t));
    }

    #[test]
    fn ramp_kernel_is_continuous_at_breakpoints(
        r in 0.01f64..0.5,
        beta in 1.0f64..5.0,
        a in 1e-3f64..0.05,
        width in 1e-3f64..0.05,
    ) {
        let b = a + width;
        for tb in [a, b, 2.0 * b - a] {
            let lo = t1_ramp(r, beta, tb * (1.0 - 1e-9), a, b).unwrap();
            let hi = t1_ramp(r, beta, tb * (1.0 + 1e-9), a, b).unwrap();
            prop_assert!((hi - lo).abs() < 1e-7, "jump {} at {tb}", hi - lo);
        }
    }

    #[test]
    fn insulated_field_obeys_the_maximum_principle(r in 1e-3f64..1.0, theta in -FRAC_PI_2..FRAC_PI_2, t in 1e-4f64..2.0) {
        let v = field(r, theta, t, &ProblemSpec::step_insulator(1.0));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "T = {v}");
    }

    #[test]
    fn field_is_linear_in_the_boundary_data(
        r in 1e-3f64..1.0,
        theta in -FRAC_PI_2..FRAC_PI_2,
        t in 1e-3f64..1.0,
        t0 in -2.0f64..2.0,
        t0p in -2.0f64..2.0,
    ) {
        let both = field(r, theta, t, &ProblemSpec::step(t0, t0p));
        let split = t0 * field(r, theta, t, &ProblemSpec::step(1.0, 0.0)) + t0p * field(r, theta, t, &ProblemSpec::step(0.0, 1.0));
        prop_assert!((both - split).abs() < 1e-9 * (1.0 + both.abs()));
    }

    #[test]
    fn field_is_continuous_across_the_axis(r in 1e-3f64..1.0, t in 1e-3f64..1.0, t0p in -1.0f64..1.0) {
        let spec = ProblemSpec::step(1.0, t0p);
        let above = field(r, 1e-9, t, &spec);
        let below = field(r, -1e-9, t, &spec);
        prop_assert!((above - below).abs() < 1e-7, "{above} vs {below}");
    }

    #[test]
    fn insulated_slice_rises_towards_the_heated_side(x in 0.01f64..0.5, t in 1e-3f64..0.5, y in -1.0f64..1.0) {
        let spec = ProblemSpec::step_insulator(1.0);
        let cfg = EvalConfig::default();
        let lo = halfspace_thermal::temperature_at(x, y, t, &spec, &cfg).unwrap().value;
        let hi = halfspace_thermal::temperature_at(x, y + 0.05, t, &spec, &cfg).unwrap().value;
        prop_assert!(hi >= lo - 1e-12, "{lo} -> {hi}");
    }

    #[test]
    fn ramp_profile_returns_to_the_step(a in 1e-3f64..1.0, width in 1e-3f64..1.0, after in 0.0f64..10.0) {
        let b = a + width;
        let f = ForcingProfile::ramp(a, b).unwrap();
        let v = f.value(2.0 * b - a + after).unwrap();
        prop_assert!((v - 1.0).abs() < 1e-9);
        prop_assert!((f.value(b).unwrap() - (1.0 + width)).abs() < 1e-9);
    }

    #[test]
    fn polar_round_trip(r in 1e-6f64..1e3, theta in -FRAC_PI_2..FRAC_PI_2) {
        let (x, y) = to_cartesian(r, theta).unwrap();
        let (r2, theta2) = to_polar(x.max(0.0), y).unwrap();
        prop_assert!((r2 - r).abs() <= 1e-14 * r);
        prop_assert!((theta2 - theta).abs() <= 1e-14);
    }

    #[test]
    fn scaling_round_trip(
        x in 0.0f64..10.0,
        y in -10.0f64..10.0,
        t in 0.0f64..1e4,
        temp in 1.0f64..1e3,
        k in 0.1f64..400.0,
        ell in 0.01f64..100.0,
    ) {
        let m = MaterialScales::new(k, ell, 2700.0, 900.0, 293.0).unwrap();
        let p = PhysicalPoint { x, y, t, temperature: temp };
        let back = m.redimensionalize(m.nondimensionalize(p).unwrap()).unwrap();
        for (a, b) in [(p.x, back.x), (p.y, back.y), (p.t, back.t), (p.temperature, back.temperature)] {
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300) + 1e-300);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solver_keeps_insulated_values_between_bounds(steps in 1usize..40) {
        let grid = FdGrid::with_resolution(0.05, 1e-3);
        let sol = solve(&ProblemSpec::step_insulator(1.0), &grid, steps as f64 * 1e-3).unwrap();
        let (lo, hi) = sol.state.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        prop_assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12, "range [{lo}, {hi}]");
    }
}
