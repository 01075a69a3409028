use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

use rreach::lattice::{
    band_from_strings, lcs_length, rreach_band_length, rreach_string_length, EpsilonBand,
    StringSeq,
};
use rreach::rational::{det, int, interpolate, left_nullspace, rat, Rational, RationalMatrix, UniPolynomial};

fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut total = Rational::zero();
    for c in 0..n {
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][c] * cofactor_det(&minor);
        if c % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=6).prop_map(|(a, b)| rat(a, b))
}

fn square_matrix(max: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    (1..=max).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(small_rational(), n), n))
}

fn binary_pair(max_len: usize) -> impl Strategy<Value = (StringSeq, StringSeq)> {
    (1..=max_len).prop_flat_map(|n| {
        (
            prop::collection::vec(0u32..2, n),
            prop::collection::vec(0u32..2, n),
        )
            .prop_map(|(a, b)| (StringSeq::new(a, 2).unwrap(), StringSeq::new(b, 2).unwrap()))
    })
}

fn in_lowest_terms(x: &Rational) -> bool {
    x.denom() > &BigInt::zero() && x.numer().gcd(x.denom()).is_one()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bareiss_matches_cofactor_expansion(rows in square_matrix(5)) {
        let m = RationalMatrix::from_rows(rows.clone()).unwrap();
        let d = det(&m).unwrap();
        prop_assert!(in_lowest_terms(&d));
        prop_assert_eq!(d, cofactor_det(&rows));
    }

    #[test]
    fn interpolation_recovers_polynomial(coeffs in prop::collection::vec(small_rational(), 1..=9)) {
        let p = UniPolynomial::new(coeffs.clone());
        let points: Vec<(Rational, Rational)> = (0..coeffs.len() as i64)
            .map(|x| (int(x), p.eval(&int(x))))
            .collect();
        let q = interpolate(&points).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert!(q.coefficients().iter().all(in_lowest_terms));
    }

    #[test]
    fn nullspace_vectors_annihilate(rows in square_matrix(5), mix in prop::collection::vec(small_rational(), 5)) {
        // Make the last row a combination of the others so the matrix is singular.
        let mut rows = rows;
        let n = rows.len();
        if n > 1 {
            let combo: Vec<Rational> = (0..n)
                .map(|c| (0..n - 1).fold(Rational::zero(), |acc, r| acc + &rows[r][c] * &mix[r]))
                .collect();
            rows[n - 1] = combo;
        }
        let m = RationalMatrix::from_rows(rows).unwrap();
        let basis = left_nullspace(&m).unwrap();
        if n > 1 {
            prop_assert!(!basis.is_empty());
        }
        for v in basis {
            prop_assert!(v.mul(&m).unwrap().entries().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn lengths_are_symmetric_and_monotone_in_reach((u, v) in binary_pair(9)) {
        let n = u.len();
        let full = lcs_length(&u, &v).unwrap();
        prop_assert_eq!(full, lcs_length(&v, &u).unwrap());
        let mut prev = 0;
        for r in 1..=n + 1 {
            let lr = rreach_string_length(&u, &v, r).unwrap();
            prop_assert_eq!(lr, rreach_string_length(&v, &u, r).unwrap());
            prop_assert!(prev <= lr && lr <= full);
            prev = lr;
        }
        prop_assert_eq!(rreach_string_length(&u, &v, n).unwrap(), full);
    }

    #[test]
    fn band_sweep_matches_table((u, v) in binary_pair(8), r in 1usize..5) {
        let band = band_from_strings(&u, &v, r).unwrap();
        let res = rreach_band_length(&band);
        prop_assert_eq!(res.length as usize, rreach_string_length(&u, &v, r).unwrap());
        // Section values step by 0 or 1 and never increase away from the center.
        let s = &res.final_section;
        prop_assert_eq!(s.len(), 2 * r + 1);
        for i in 0..r {
            prop_assert!(s[i] <= s[i + 1] && s[i + 1] - s[i] <= 1);
            prop_assert!(s[r + i + 1] <= s[r + i] && s[r + i] - s[r + i + 1] <= 1);
        }
    }

    #[test]
    fn bands_are_superadditive(n in 1usize..7, m in 1usize..7, r in 1usize..4, bits in prop::collection::vec(any::<bool>(), 200)) {
        let mut whole = EpsilonBand::zeros(n + m, r).unwrap();
        let mut first = EpsilonBand::zeros(n, r).unwrap();
        let mut second = EpsilonBand::zeros(m, r).unwrap();
        for (idx, (i, j)) in whole.cells().collect::<Vec<_>>().into_iter().enumerate() {
            let b = bits[idx];
            whole.set(i, j, b).unwrap();
            if i <= n && j <= n {
                first.set(i, j, b).unwrap();
            } else if i > n && j > n {
                second.set(i - n, j - n, b).unwrap();
            }
        }
        let joined = rreach_band_length(&whole).length;
        prop_assert!(joined >= rreach_band_length(&first).length + rreach_band_length(&second).length);
    }
}

#[test]
fn reach_needs_equal_lengths_but_lcs_does_not() {
    let (u, v) = StringSeq::encode_pair("cinematography", "neurotransmitter");
    assert_eq!(u.len(), 14);
    // Different lengths: only the unrestricted length is defined.
    assert!(rreach_string_length(&u, &v, 20).is_err());
    assert_eq!(lcs_length(&u, &v).unwrap(), 5);
}
