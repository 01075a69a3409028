//! Transition matrices of the Bernoulli matching chain and the closed forms
//! they are checked against.
//!
//! One transition consumes the `2r + 1` fresh cells `(n-i, n)`, `i = r..1`,
//! `(n, n-j)`, `j = r..1`, and `(n, n)`. Their values depend only on the
//! previous section and the fresh match bits, so enumerating all bit
//! patterns from every old state yields exact transition probabilities.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::BandSweep;
use crate::limits::{Limits, ENV_MAX_R};
use crate::rational::{Rational, RationalMatrix};
use crate::transfer::{ChainModel, SectionState, TransitionPair};

/// Outcome of one section step from `state` under the fresh-bit `pattern`.
///
/// Pattern bit `i - 1` is the column cell at offset `i`, bit `r + j - 1` the
/// row cell at offset `j`, bit `2r` the center cell.
pub(crate) fn advance_state(r: usize, state: SectionState, pattern: u32) -> (SectionState, bool) {
    let z = r as u32;
    let (col, row) = state.section(z).expect("z = r keeps the section non-negative");
    let m = r + 1;
    let mut sweep = BandSweep::from_section(r, m, col, row);
    sweep.step(|a, b| pattern_bit(r, pattern, a, b));
    let next = SectionState::from_section(sweep.col(), sweep.row());
    (next, sweep.center() > z)
}

fn pattern_bit(r: usize, pattern: u32, a: usize, b: usize) -> bool {
    let bit = match a.cmp(&b) {
        std::cmp::Ordering::Equal => 2 * r,
        std::cmp::Ordering::Less => b - a - 1,
        std::cmp::Ordering::Greater => r + (a - b) - 1,
    };
    (pattern >> bit) & 1 == 1
}

/// Rough resident size of a dense pair of side `4^r`.
pub fn memory_estimate_bytes(r: usize) -> u64 {
    let side = SectionState::count(r) as u64;
    // Two matrices; a BigRational is 64 bytes inline plus a small heap limb.
    2 * side * side * 80
}

fn check_reach(r: usize, limits: &Limits) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("reach must be at least 1".into()));
    }
    if r > limits.max_transfer_r {
        return Err(Error::ResourceCap {
            what: "reach for dense transition matrices",
            requested: r as u64,
            cap: limits.max_transfer_r as u64,
            env: ENV_MAX_R,
        });
    }
    Ok(())
}

/// `M` and `N` for the Bernoulli chain with match probability `1/k`.
pub fn build_transition_matrices(k: u32, r: usize) -> Result<TransitionPair> {
    build_transition_matrices_with(k, r, &Limits::default())
}

pub fn build_transition_matrices_with(k: u32, r: usize, limits: &Limits) -> Result<TransitionPair> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("alphabet size {k} < 2")));
    }
    check_reach(r, limits)?;
    let cells = (2 * r + 1) as u32;
    let den = (k as u128)
        .checked_pow(cells)
        .ok_or_else(|| Error::Unsupported(format!("k^{cells} overflows 128 bits")))?;
    // weight[ones] = (k-1)^zeros, all over k^cells.
    let weight: Vec<u128> = (0..=cells)
        .map(|ones| (k as u128 - 1).pow(cells - ones))
        .collect();

    let states = SectionState::count(r);
    let rows: Vec<(Vec<u128>, Vec<u128>)> = (0..states)
        .into_par_iter()
        .map(|s| {
            let from = SectionState::from_index(r, s);
            let mut m_row = vec![0u128; states];
            let mut n_row = vec![0u128; states];
            for pattern in 0..(1u32 << cells) {
                let (to, incremented) = advance_state(r, from, pattern);
                let w = weight[pattern.count_ones() as usize];
                if incremented {
                    n_row[to.index()] += w;
                } else {
                    m_row[to.index()] += w;
                }
            }
            (m_row, n_row)
        })
        .collect();

    let den = BigInt::from(den);
    type Weights = (Vec<u128>, Vec<u128>);
    let to_matrix = |pick: fn(&Weights) -> &Vec<u128>| {
        let mut out = RationalMatrix::zeros(states, states);
        for (i, row) in rows.iter().enumerate() {
            for (j, &w) in pick(row).iter().enumerate() {
                if w != 0 {
                    out[(i, j)] = Rational::new(BigInt::from(w), den.clone());
                }
            }
        }
        out
    };
    Ok(TransitionPair {
        model: ChainModel::Bernoulli,
        k,
        r,
        m: to_matrix(|row| &row.0),
        n: to_matrix(|row| &row.1),
    })
}

/// The 8 x 8 Bernoulli chain for `k = 2, r = 1` whose states also carry the
/// center match bit: off-states `0..4`, on-states `4..8`, each block in
/// section-state order.
pub fn build_augmented_matrices(k: u32, r: usize) -> Result<TransitionPair> {
    if k != 2 || r != 1 {
        return Err(Error::Unsupported(format!(
            "augmented Bernoulli matrices exist for k=2, r=1 only (got k={k}, r={r})"
        )));
    }
    let eighth = Rational::new(BigInt::one(), BigInt::from(8));
    let mut m = RationalMatrix::zeros(8, 8);
    let mut n = RationalMatrix::zeros(8, 8);
    for old in 0..8 {
        // The old match bit does not influence independent fresh bits.
        let from = SectionState::from_index(1, old % 4);
        for pattern in 0..8u32 {
            let (to, incremented) = advance_state(1, from, pattern);
            let on = (pattern >> 2) & 1 == 1;
            let j = to.index() + if on { 4 } else { 0 };
            let target = if incremented { &mut n } else { &mut m };
            target[(old, j)] += &eighth;
        }
    }
    Ok(TransitionPair {
        model: ChainModel::BernoulliAugmented,
        k,
        r,
        m,
        n,
    })
}

/// Closed forms for the reach-1 and reach-2 Bernoulli constants.
pub fn gamma_formula_check(k: u32, r: usize) -> Result<Rational> {
    let k = BigInt::from(k);
    let p = |coeffs: &[i64]| -> BigInt {
        coeffs
            .iter()
            .fold(BigInt::zero(), |acc, &c| acc * &k + BigInt::from(c))
    };
    match r {
        1 => Ok(Rational::new(p(&[3, 2]), p(&[1, 3, 1]))),
        2 => Ok(Rational::new(p(&[5, 20, 15, 2]), p(&[1, 10, 20, 10, 1]))),
        _ => Err(Error::Unsupported(format!(
            "closed-form constant known for r in {{1, 2}} only (got r={r})"
        ))),
    }
}

/// Asymptotic intercept `A` in `EL_n ~ gamma n - A` for reach 1.
pub fn intercept_formula_r1(k: u32) -> Rational {
    let k = BigInt::from(k);
    let num = &k * (BigInt::from(2) * &k * &k + BigInt::from(3) * &k + 2);
    let base = &k * &k + BigInt::from(3) * &k + 1;
    Rational::new(num, &base * &base)
}

/// Position of a reach-2 state in the 4 x 4 tabular layout of the
/// stationary vector: row `2 d1x + d2x`, column `2 d1y + d2y`.
pub fn r2_table_position(state: SectionState) -> (usize, usize) {
    assert_eq!(state.r(), 2);
    (
        (2 * state.dx(1) + state.dx(2)) as usize,
        (2 * state.dy(1) + state.dy(2)) as usize,
    )
}

/// The reach-2 stationary vector in section-state order, assembled from the
/// closed-form 4 x 4 table.
pub fn r2_stationary_formula(k: u32) -> Vec<Rational> {
    let kk = Rational::from_integer(BigInt::from(k));
    let i = |v: i64| Rational::from_integer(BigInt::from(v));
    let k2 = &kk * &kk;
    let table: [[Rational; 4]; 4] = [
        [k2.clone(), i(2) * &kk, kk.clone(), i(1)],
        [
            i(2) * &kk,
            &kk + i(4),
            &kk + i(2),
            i(2) * (&kk + i(1)) / &kk,
        ],
        [
            kk.clone(),
            &kk + i(2),
            &kk + i(1),
            (i(2) * &kk + i(1)) / &kk,
        ],
        [
            i(1),
            i(2) * (&kk + i(1)) / &kk,
            (i(2) * &kk + i(1)) / &kk,
            (&k2 + i(4) * &kk + i(1)) / &k2,
        ],
    ];
    let norm = &k2 / (&k2 * &k2 + i(10) * &k2 * &kk + i(20) * &k2 + i(10) * &kk + i(1));
    (0..SectionState::count(2))
        .map(|idx| {
            let (row, col) = r2_table_position(SectionState::from_index(2, idx));
            &table[row][col] * &norm
        })
        .collect()
}
