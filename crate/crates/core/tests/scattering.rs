use bose_core::lattice::enumerate_shells;
use bose_core::potential::PotentialSpec;
use bose_core::scattering::*;
use proptest::prelude::*;

fn well_length(v0: f64, r: f64) -> f64 {
    // closed form for −u'' + ½V₀u = 0 inside the well
    let k = (v0 / 2.0).sqrt();
    r - (k * r).tanh() / k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn square_wells_match_closed_form(v0 in 0.01f64..50.0, r in 0.2f64..3.0) {
        let p = PotentialSpec::square_well(v0, r).unwrap();
        let s = solve_zero_energy(&p, 4.0 * r, 1e-12).unwrap();
        let exact = well_length(v0, r);
        prop_assert!((s.a_integral - exact).abs() <= 1e-8 * exact);
        prop_assert!((s.a_asymptotic - exact).abs() <= 1e-8 * exact);
        prop_assert!(s.a_integral > 0.0 && s.a_integral < r);
        prop_assert!(s.f().iter().all(|f| (0.0..=1.0 + 1e-12).contains(f)));
    }

    #[test]
    fn scattering_length_grows_with_coupling(l1 in 0.01f64..5.0, l2 in 0.01f64..5.0) {
        prop_assume!((l1 - l2).abs() > 1e-3);
        let inner = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let a = |l: f64| solve_zero_energy(&PotentialSpec::scaled(l, inner.clone()).unwrap(), 3.0, 1e-12).unwrap().a_integral;
        prop_assert_eq!(l1 < l2, a(l1) < a(l2));
    }

    #[test]
    fn born_bounds_hold(l in 0.001f64..0.5) {
        let p = PotentialSpec::scaled(l, PotentialSpec::square_well(2.0, 1.0).unwrap()).unwrap();
        let a = solve_zero_energy(&p, 3.0, 1e-12).unwrap().a_integral;
        let t = enumerate_shells(10).unwrap();
        let b = born_terms(&p, &t, 1, 1.0).unwrap();
        // a <= first Born term, and the second order correction is negative
        prop_assert!(a <= b.a0);
        prop_assert!(b.a1_continuum < 0.0);
        prop_assert!(a >= b.a0 + b.a1_continuum);
    }
}

#[test]
fn tabulated_linear_ramp_is_consistent() {
    let radii: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let values: Vec<f64> = radii.iter().map(|r| 3.0 * (1.0 - r / 2.0)).collect();
    let p = PotentialSpec::tabulated(radii, values, 2.0).unwrap();
    let s = solve_zero_energy(&p, 6.0, 1e-12).unwrap();
    assert!((s.a_integral - s.a_asymptotic).abs() < 1e-8);
    assert!(s.a_integral > 0.0 && s.a_integral < 2.0);
}

#[test]
fn eta_follows_inverse_square_law() {
    let p = PotentialSpec::square_well(2.0, 1.0).unwrap();
    let s = solve_zero_energy(&p, 4.0, 1e-12).unwrap();
    let n = 50;
    let t = enumerate_shells(30).unwrap();
    let eta = eta_coefficients(&s, n, &t).unwrap();
    let a = s.a_integral;
    // for |p| << N the transform approaches −4πa/p²
    let k = 1u64;
    let p2 = bose_core::lattice::TWO_PI_SQ * k as f64;
    let ratio = eta.get(k).unwrap() / (-4.0 * std::f64::consts::PI * a / p2);
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    assert!(eta.values.values().all(|e| *e < 0.0));
}

#[test]
fn csv_export() {
    let s = solve_zero_energy(&PotentialSpec::square_well(2.0, 1.0).unwrap(), 3.0, 1e-10).unwrap();
    let mut out = Vec::new();
    s.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), s.grid.len() + 1);
}
