use num_traits::One;

use rreach::bernoulli::build_transition_matrices;
use rreach::oracle::{bernoulli_expectation, realizability_census, string_expectation};
use rreach::propagation::{
    affine_tail_fit, exact_curve, initialize_at_r, step, transition_pair, ExactCurve,
    MomentPropagator,
};
use rreach::rational::{int, rat, to_f64, Rational};
use rreach::transfer::{gamma_exact, ChainModel};
use rreach::Limits;

fn check_curve_shape(curve: &ExactCurve) {
    let v = &curve.values;
    for n in 1..=v.len() {
        assert!(*curve.el(n) <= int(n as i64));
        if n > 1 {
            assert!(v[n - 1] >= v[n - 2]);
        }
    }
    for n in 1..v.len() {
        for m in 1..=(v.len() - n) {
            assert!(curve.el(n + m) >= &(curve.el(n) + curve.el(m)), "n={n} m={m}");
        }
    }
}

#[test]
fn reach_one_start_and_first_step() {
    let d = initialize_at_r(ChainModel::Bernoulli, 3, 1).unwrap();
    assert_eq!(d.total_mass(), Rational::one());
    assert_eq!(d.support[&0][0], rat(2, 3));
    assert_eq!(d.support[&1][3], rat(1, 3));
    let big = initialize_at_r(ChainModel::Bernoulli, 2, 3).unwrap();
    assert_eq!(big.total_mass(), Rational::one());
    assert!(big.support.keys().all(|&z| z as usize <= 3));

    let pair = build_transition_matrices(2, 1).unwrap();
    let d2 = step(&initialize_at_r(ChainModel::Bernoulli, 2, 1).unwrap(), &pair).unwrap();
    assert_eq!(d2.total_mass(), Rational::one());
    assert_eq!(d2.expected_center(), bernoulli_expectation(2, 2, 1).unwrap().expectation);
}

#[test]
fn mass_is_conserved_step_by_step() {
    for (model, k, r) in [
        (ChainModel::Bernoulli, 2, 2),
        (ChainModel::Bernoulli, 4, 1),
        (ChainModel::StringAugmented, 2, 1),
        (ChainModel::BernoulliAugmented, 2, 1),
    ] {
        let pair = transition_pair(model, k, r, &Limits::default()).unwrap();
        let mut d = initialize_at_r(model, k, r).unwrap();
        for _ in 0..15 {
            d = step(&d, &pair).unwrap();
            assert_eq!(d.total_mass(), Rational::one());
            assert!(d.support.keys().all(|&z| z as usize <= d.n));
        }
    }
}

#[test]
fn curves_match_enumeration() {
    for r in 1..=2 {
        let curve = exact_curve(ChainModel::Bernoulli, 2, r, 4).unwrap();
        for n in 1..=4 {
            assert_eq!(curve.el(n), &bernoulli_expectation(2, n, r).unwrap().expectation, "r={r} n={n}");
        }
    }
    let curve = exact_curve(ChainModel::StringAugmented, 2, 1, 6).unwrap();
    for n in 1..=6 {
        assert_eq!(curve.el(n), &string_expectation(2, n, Some(1)).unwrap().expectation, "n={n}");
    }
    // The augmented Bernoulli chain is the same process with a finer state.
    let plain = exact_curve(ChainModel::Bernoulli, 2, 1, 40).unwrap();
    let aug = exact_curve(ChainModel::BernoulliAugmented, 2, 1, 40).unwrap();
    assert_eq!(plain.values, aug.values);
}

#[test]
fn reach_one_closed_form() {
    let curve = exact_curve(ChainModel::Bernoulli, 2, 1, 30).unwrap();
    let target = rat(8, 11) * int(30) - rat(32, 121);
    assert!((to_f64(curve.el(30)) - to_f64(&target)).abs() < 1e-6);
    assert_eq!(exact_curve(ChainModel::Bernoulli, 2, 1, 1).unwrap().values, vec![rat(1, 2)]);
}

#[test]
fn curves_are_superadditive_and_bounded() {
    for r in 1..=3 {
        check_curve_shape(&exact_curve(ChainModel::Bernoulli, 2, r, 120).unwrap());
    }
    check_curve_shape(&exact_curve(ChainModel::Bernoulli, 3, 2, 80).unwrap());
    check_curve_shape(&exact_curve(ChainModel::StringAugmented, 2, 1, 120).unwrap());
}

#[test]
fn curves_increase_with_reach() {
    let curves: Vec<ExactCurve> = (1..=4)
        .map(|r| exact_curve(ChainModel::Bernoulli, 2, r, 60).unwrap())
        .collect();
    for pair in curves.windows(2) {
        for n in 1..=60 {
            assert!(pair[0].el(n) <= pair[1].el(n));
        }
    }
}

#[test]
fn increments_converge_to_gamma() {
    for r in 1..=3 {
        let gamma = to_f64(&gamma_exact(&build_transition_matrices(2, r).unwrap()).unwrap().gamma);
        let curve = exact_curve(ChainModel::Bernoulli, 2, r, 400).unwrap();
        for n in 200..400 {
            let slope = to_f64(&(curve.el(n + 1) - curve.el(n)));
            assert!((slope - gamma).abs() < 1e-9, "r={r} n={n}: {slope}");
        }
    }
}

#[test]
fn section_profile_approaches_stationary_times_gamma() {
    // E_n = sum_z z P_n(z) grows like n e* gamma plus a constant vector, so
    // the per-step increment converges fast while E_n / n carries an O(1/n)
    // offset (about 5e-4 at n = 500 for reach 1).
    for (model, k, r) in [
        (ChainModel::Bernoulli, 2, 1),
        (ChainModel::Bernoulli, 2, 2),
        (ChainModel::StringAugmented, 2, 1),
    ] {
        let pair = transition_pair(model, k, r, &Limits::default()).unwrap();
        let g = gamma_exact(&pair).unwrap();
        let limit: Vec<f64> = g.stationary.iter().map(|s| to_f64(&(s * &g.gamma))).collect();
        let mut prop = MomentPropagator::new(&pair, &initialize_at_r(model, k, r).unwrap()).unwrap();
        while prop.n() < 499 {
            prop.advance();
        }
        let before = prop.first_moment();
        prop.advance();
        let at_500 = prop.first_moment();
        for ((a, b), l) in at_500.iter().zip(&before).zip(&limit) {
            assert!((to_f64(&(a - b)) - l).abs() < 1e-4);
            assert!((to_f64(a) / 500.0 - l).abs() < 2e-3);
        }
        while prop.n() < 6000 {
            prop.advance();
        }
        for (e, l) in prop.first_moment().iter().zip(&limit) {
            assert!((to_f64(e) / 6000.0 - l).abs() < 1e-4);
        }
    }
}

#[test]
fn reach_one_profile_offsets() {
    // E P_n = n (32, 16, 16, 24)/121 - (344, 40, 40, -72)/1331 + exponentially small.
    let pair = build_transition_matrices(2, 1).unwrap();
    let mut prop = MomentPropagator::new(&pair, &initialize_at_r(ChainModel::Bernoulli, 2, 1).unwrap()).unwrap();
    while prop.n() < 60 {
        prop.advance();
    }
    let slope = [32, 16, 16, 24];
    let offset = [344, 40, 40, -72];
    for (i, e) in prop.first_moment().iter().enumerate() {
        let target = rat(slope[i], 121) * int(60) - rat(offset[i], 1331);
        assert!((to_f64(&(e - target))).abs() < 1e-12);
    }
}

#[test]
fn fits_recover_known_intercepts() {
    let c = exact_curve(ChainModel::Bernoulli, 3, 1, 2000).unwrap();
    let f = affine_tail_fit(&c, 50, 2000).unwrap();
    assert!((f.a_hat - 87.0 / 361.0).abs() < 1e-3);
    assert!((f.gamma_hat - 11.0 / 19.0).abs() < 1e-8);

    let c = exact_curve(ChainModel::Bernoulli, 2, 2, 2000).unwrap();
    let f = affine_tail_fit(&c, 50, 2000).unwrap();
    assert!((f.gamma_hat - 0.7715736043).abs() < 1e-8);
    assert!((f.a_hat - 0.434745).abs() < 1e-4);
    assert!((f.a_hat - 16872.0 / 38809.0).abs() < 1e-4);
    assert!(affine_tail_fit(&c, 2000, 50).is_err());
    assert!(affine_tail_fit(&c, 1, 2).is_err());
}

#[test]
fn csv_export() {
    let mut buf = Vec::new();
    exact_curve(ChainModel::Bernoulli, 2, 1, 3).unwrap().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("model,k,r,n,el_exact_num,el_exact_den,el_float"));
    assert_eq!(lines.next(), Some("bernoulli,2,1,1,1,2,0.5"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn oracle_properties() {
    let values: Vec<Rational> = (1..=6)
        .map(|n| string_expectation(2, n, None).unwrap().expectation)
        .collect();
    for n in 1..=6 {
        for m in 1..=(6 - n) {
            assert!(values[n + m - 1] >= &values[n - 1] + &values[m - 1]);
        }
    }
    for k in [2, 3] {
        for r in 1..=3 {
            let banded = bernoulli_expectation(k, r, r).unwrap().expectation;
            let unrestricted = bernoulli_expectation(k, r, r + 5).unwrap().expectation;
            assert_eq!(banded, unrestricted);
        }
    }
    for n in 1..=5 {
        let census = realizability_census(n).unwrap();
        assert!(census.passed(), "n={n}: {census:?}");
        assert_eq!(census.configurations, 1 << (3 * n - 2));
    }
    assert_eq!(realizability_census(2).unwrap().weight_counts[&2], 8);
}

#[test]
fn moment_propagation_matches_full_distribution() {
    for (model, k, r) in [
        (ChainModel::Bernoulli, 2, 2),
        (ChainModel::Bernoulli, 3, 1),
        (ChainModel::BernoulliAugmented, 2, 1),
        (ChainModel::StringAugmented, 2, 1),
    ] {
        let pair = transition_pair(model, k, r, &Limits::default()).unwrap();
        let mut d = initialize_at_r(model, k, r).unwrap();
        let mut prop = MomentPropagator::new(&pair, &d).unwrap();
        for _ in 0..15 {
            d = step(&d, &pair).unwrap();
            prop.advance();
            assert_eq!(prop.n(), d.n);
            assert_eq!(prop.marginal(), d.marginal());
            assert_eq!(prop.first_moment(), d.first_moment());
            assert_eq!(prop.expected_center(), d.expected_center());
        }
    }
}
