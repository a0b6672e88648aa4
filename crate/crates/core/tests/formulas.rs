use std::f64::consts::PI;

use bose_core::formulas::*;
use bose_core::lattice::{enumerate_shells, TWO_PI_SQ};
use proptest::prelude::*;

proptest! {
    #[test]
    fn quad_identities(a in 0.01f64..100.0, frac in -0.999f64..0.999) {
        let b = a * frac;
        let q = quad_diagonalize(a, b).unwrap();
        prop_assert!((q.eps * q.eps - (a * a - b * b)).abs() <= 1e-12 * a * a);
        prop_assert!(((2.0 * q.tau).tanh() + b / a).abs() <= 1e-12);
        prop_assert!(q.ground_shift <= 0.0);
        prop_assert!((q.ground_shift - (q.eps - a)).abs() <= 1e-12 * a);
    }

    #[test]
    fn gp_dominates_free_and_is_monotone(a in 1e-6f64..10.0, k in 1u64..5000) {
        let gp = DispersionModel::GrossPitaevskii { a };
        let e = gp.energy_for_norm(k).unwrap();
        prop_assert!(e > TWO_PI_SQ * k as f64);
        prop_assert!(gp.energy_for_norm(k + 1).unwrap() > e);
    }

    #[test]
    fn correction_summand_sign_and_bound(a in 1e-4f64..5.0, k in 1u64..100_000) {
        let s = correction_summand(a, k);
        let x = 8.0 * PI * a;
        let p2 = TWO_PI_SQ * k as f64;
        prop_assert!(s < 0.0);
        prop_assert!(-s <= x * x * x / (2.0 * p2 * p2) * (1.0 + 1e-12));
    }

    #[test]
    fn energy_sums_terms(n in 2u64..100_000, a in 0.0f64..2.0, e in -20.0f64..20.0) {
        let t = enumerate_shells(20).unwrap();
        let c = correction_sum(a, &t).unwrap();
        let b = ground_state_energy(n, a, e, &c).unwrap();
        prop_assert_eq!(b.total, b.term_main + b.term_boundary + b.term_correction);
        prop_assert_eq!(b.tail_bound, c.tail_bound);
    }
}

#[test]
fn phonon_regime_small_momentum_over_scattering_length() {
    // E/(|p|√(16πa)) = √(1 + p²/(16πa)) decreases to 1 as p²/a → 0
    let mut last = f64::INFINITY;
    for i in 0..=24 {
        let a = 10f64.powf(i as f64 / 4.0);
        let r = DispersionModel::GrossPitaevskii { a }.energy_for_norm(1).unwrap()
            / (TWO_PI_SQ.sqrt() * (16.0 * PI * a).sqrt());
        assert!(r > 1.0 && r < last);
        last = r;
    }
    assert!(last - 1.0 < 1e-6);
}

#[test]
fn e_lambda_scheme_errors_shrink() {
    let s = cube_partial_sums(400);
    let mut spreads = Vec::new();
    for m in [100usize, 200, 400] {
        let e = e_lambda_from_partial_sums(&s, m, ELambdaScheme::CubeCutoffAverage).unwrap();
        spreads.push(e.error_estimate);
    }
    assert!(spreads.windows(2).all(|w| w[1] < w[0]), "{spreads:?}");
    // frozen from the numpy prototype at M = 400
    let e = e_lambda_from_partial_sums(&s, 400, ELambdaScheme::CubeCutoffAverage).unwrap();
    assert!((e.value - 10.413632917884383).abs() < 1e-9);
    assert!(
        (e.value - 10.413633922493428).abs()
            < e_lambda_from_partial_sums(&s, 200, ELambdaScheme::Richardson).unwrap().error_estimate
    );
}

#[test]
fn quadratic_energy_tail_bound() {
    let w = bose_core::potential::PotentialSpec::square_well(2.0, 1.0).unwrap();
    let deep = enumerate_shells(4000).unwrap();
    let full = quadratic_bogoliubov_energy(&w, 4, &deep).unwrap();
    for cut in [100u64, 400, 1000] {
        let part = quadratic_bogoliubov_energy(&w, 4, &deep.truncated(cut).unwrap()).unwrap();
        assert!((full.total - part.total).abs() <= part.tail_bound, "cut {cut}");
    }
}
