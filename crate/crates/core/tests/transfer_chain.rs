use num_traits::{One, Zero};

use rreach::bernoulli::{
    build_augmented_matrices, build_transition_matrices, gamma_formula_check, r2_stationary_formula,
};
use rreach::oracle::bernoulli_expectation;
use rreach::rational::{det, int, rat, Rational};
use rreach::string_model::{build_string_matrices, gamma_string_exact};
use rreach::transfer::{gamma_exact, stationary_vector, ChainModel};
use rreach::Error;

#[test]
fn matrices_are_stochastic() {
    for k in 2..=4 {
        for r in 1..=3 {
            let pair = build_transition_matrices(k, r).unwrap();
            assert_eq!(pair.dim(), 1 << (2 * r));
            assert!(pair.is_stochastic(), "k={k} r={r}");
        }
    }
    assert!(build_string_matrices().is_stochastic());
    assert!(build_augmented_matrices(2, 1).unwrap().is_stochastic());
}

#[test]
fn one_is_an_eigenvalue_of_t1() {
    let pair = build_transition_matrices(2, 1).unwrap();
    assert!(det(&pair.t1().sub_diagonal(&Rational::one()).unwrap()).unwrap().is_zero());
    assert!(pair.char_poly_at(&Rational::one(), &Rational::one()).is_zero());
}

#[test]
fn reach_one_examples() {
    let pair = build_transition_matrices(2, 1).unwrap();
    assert_eq!(pair.m[(0, 0)], rat(1, 8));
    let diag: Vec<Rational> = (0..4).map(|i| pair.n[(i, i)].clone()).collect();
    assert_eq!(diag, vec![rat(1, 4), rat(1, 2), rat(1, 2), rat(1, 2)]);

    let g = gamma_exact(&pair).unwrap();
    assert_eq!(g.gamma, rat(8, 11));
    assert_eq!(g.stationary, vec![rat(4, 11), rat(2, 11), rat(2, 11), rat(3, 11)]);
    assert_eq!(
        gamma_exact(&build_transition_matrices(3, 1).unwrap()).unwrap().gamma,
        rat(11, 19)
    );
    assert_eq!(gamma_formula_check(5, 1).unwrap(), rat(17, 41));
}

#[test]
fn stationary_vectors_are_fixed_distributions() {
    for (k, r) in [(2, 1), (3, 1), (2, 2), (4, 2)] {
        let pair = build_transition_matrices(k, r).unwrap();
        let t1 = pair.t1();
        let e = stationary_vector(&t1).unwrap();
        assert!(e.iter().all(|x| *x >= Rational::zero()));
        assert_eq!(e.iter().fold(Rational::zero(), |a, x| a + x), Rational::one());
        assert_eq!(t1.left_mul_vec(&e).unwrap(), e);
    }
}

#[test]
fn reach_two_table_layout() {
    for k in 2..=4 {
        let g = gamma_exact(&build_transition_matrices(k, 2).unwrap()).unwrap();
        assert_eq!(g.stationary, r2_stationary_formula(k), "k={k}");
    }
}

#[test]
fn gamma_grows_with_reach_and_beats_the_square_bound() {
    let gammas: Vec<Rational> = (1..=3)
        .map(|r| gamma_exact(&build_transition_matrices(2, r).unwrap()).unwrap().gamma)
        .collect();
    assert!(gammas[0] < gammas[1] && gammas[1] < gammas[2]);
    for (idx, gamma) in gammas.iter().enumerate() {
        let r = idx + 1;
        let square = bernoulli_expectation(2, r, r).unwrap().expectation;
        assert!(*gamma >= square / int(r as i64), "r={r}");
    }
}

#[test]
fn string_constant_is_below_bernoulli() {
    let s = gamma_string_exact().unwrap();
    assert_eq!(s.gamma, rat(7, 10));
    assert!(s.gamma < gamma_formula_check(2, 1).unwrap());
    let aug = gamma_exact(&build_augmented_matrices(2, 1).unwrap()).unwrap();
    assert_eq!(aug.gamma, rat(8, 11));
}

#[test]
fn augmented_examples() {
    let pair = build_augmented_matrices(2, 1).unwrap();
    assert_eq!(pair.model, ChainModel::BernoulliAugmented);
    assert_eq!(pair.m[(0, 0)], rat(1, 8));
    assert_eq!(pair.m[(4, 0)], rat(1, 8));
    let eighth = rat(1, 8);
    let row0: Vec<Rational> = (0..8).map(|j| pair.n[(0, j)].clone()).collect();
    let expected: Vec<Rational> = [1, 1, 1, 0, 1, 1, 1, 1]
        .iter()
        .map(|&c| &eighth * int(c))
        .collect();
    assert_eq!(row0, expected);
    let string = build_string_matrices();
    assert_eq!(string.n[(4, 4)], rat(1, 4));
}

#[test]
fn json_export_shape() {
    let json = build_transition_matrices(2, 1).unwrap().to_json();
    assert_eq!(json["k"], 2);
    assert_eq!(json["r"], 1);
    assert_eq!(json["M"][0][0][0], "1");
    assert_eq!(json["M"][0][0][1], "8");
    assert_eq!(json["N"].as_array().unwrap().len(), 4);
}

#[test]
fn caps_and_unsupported_parameters() {
    assert!(matches!(
        gamma_exact(&build_transition_matrices(2, 4).unwrap()),
        Err(Error::ResourceCap { .. })
    ));
    assert!(matches!(build_transition_matrices(2, 6), Err(Error::ResourceCap { .. })));
    assert!(matches!(gamma_formula_check(2, 3), Err(Error::Unsupported(_))));
}
