//! Reach-1 analysis of two random binary strings.
//!
//! Over a binary alphabet a banded match configuration is produced by either
//! exactly two string pairs or none, and which one is decided locally: every
//! 2 x 2 window along the diagonal must have an even number of matches. The
//! chain below therefore only needs the previous center match bit on top of
//! the section state, and each step is driven by two fair coins
//! `a = [u(n) == u(n-1)]`, `b = [v(n) == v(n-1)]`.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::lattice::{BandSweep, EpsilonBand};
use crate::rational::{Rational, RationalMatrix};
use crate::transfer::{gamma_exact, ChainModel, GammaExact, SectionState, TransitionPair};

/// Match bits of one diagonal window, laid out as
///
/// ```text
/// [ eps(i-1, i)    eps(i, i)   ]
/// [ eps(i-1, i-1)  eps(i, i-1) ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window2x2 {
    pub upper_left: bool,
    pub upper_right: bool,
    pub lower_left: bool,
    pub lower_right: bool,
}

impl Window2x2 {
    pub const fn new(rows: [[u8; 2]; 2]) -> Self {
        Window2x2 {
            upper_left: rows[0][0] == 1,
            upper_right: rows[0][1] == 1,
            lower_left: rows[1][0] == 1,
            lower_right: rows[1][1] == 1,
        }
    }

    pub fn from_bits(bits: u8) -> Self {
        Window2x2 {
            upper_left: bits & 8 != 0,
            upper_right: bits & 4 != 0,
            lower_left: bits & 2 != 0,
            lower_right: bits & 1 != 0,
        }
    }

    /// The window at diagonal position `i >= 2` of a reach-1 band.
    pub fn at(band: &EpsilonBand, i: usize) -> Result<Self> {
        Ok(Window2x2 {
            upper_left: band.get(i - 1, i)?,
            upper_right: band.get(i, i)?,
            lower_left: band.get(i - 1, i - 1)?,
            lower_right: band.get(i, i - 1)?,
        })
    }

    pub fn sum(&self) -> u8 {
        [self.upper_left, self.upper_right, self.lower_left, self.lower_right]
            .iter()
            .filter(|&&b| b)
            .count() as u8
    }

    /// Binary-alphabet realizability of a single window.
    pub fn is_realizable(&self) -> bool {
        self.sum().is_multiple_of(2)
    }
}

/// The eight windows a pair of binary strings can produce.
pub const REALIZABLE_WINDOWS: [Window2x2; 8] = [
    Window2x2::new([[1, 1], [1, 1]]),
    Window2x2::new([[0, 1], [1, 0]]),
    Window2x2::new([[0, 0], [1, 1]]),
    Window2x2::new([[1, 0], [1, 0]]),
    Window2x2::new([[0, 0], [0, 0]]),
    Window2x2::new([[1, 0], [0, 1]]),
    Window2x2::new([[1, 1], [0, 0]]),
    Window2x2::new([[0, 1], [0, 1]]),
];

/// Number of binary string pairs producing `band`, by the window criterion.
pub fn realizability_weight(band: &EpsilonBand) -> Result<u64> {
    if band.r() != 1 {
        return Err(Error::Unsupported(format!(
            "realizability weight is defined for reach 1 only (got r={})",
            band.r()
        )));
    }
    if band.n() == 0 {
        return Ok(1);
    }
    for i in 2..=band.n() {
        if !Window2x2::at(band, i)?.is_realizable() {
            return Ok(0);
        }
    }
    Ok(2)
}

/// Section state plus the center match bit `eps(n, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AugmentedState {
    pub state: SectionState,
    pub match_on: bool,
}

impl AugmentedState {
    pub fn from_index(index: usize) -> Self {
        assert!(index < 8);
        AugmentedState {
            state: SectionState::from_index(1, index % 4),
            match_on: index >= 4,
        }
    }

    /// Off-states occupy `0..4`, on-states `4..8`.
    pub fn index(&self) -> usize {
        self.state.index() + if self.match_on { 4 } else { 0 }
    }
}

/// Fresh window bits `(eps(n-1, n), eps(n, n), eps(n, n-1))` given the old
/// center bit and the letter-agreement coins.
fn fresh_window(old_center: bool, a: bool, b: bool) -> (bool, bool, bool) {
    // v(n) repeats v(n-1) exactly when b holds, and symmetrically for u.
    let upper = if b { old_center } else { !old_center };
    let lower = if a { old_center } else { !old_center };
    let center = if a == b { old_center } else { !old_center };
    (upper, center, lower)
}

/// The 8 x 8 string-model matrices, built by enumerating the four equally
/// likely letter-agreement outcomes from every augmented state.
pub fn build_string_matrices() -> TransitionPair {
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    let mut m = RationalMatrix::zeros(8, 8);
    let mut n = RationalMatrix::zeros(8, 8);
    for old in 0..8 {
        let from = AugmentedState::from_index(old);
        let (col, row) = from.state.section(1).expect("z = 1 suffices for reach 1");
        for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
            let (upper, center, lower) = fresh_window(from.match_on, a, b);
            let mut sweep = BandSweep::from_section(1, 2, col.clone(), row.clone());
            sweep.step(|i, j| match i.cmp(&j) {
                std::cmp::Ordering::Less => upper,
                std::cmp::Ordering::Equal => center,
                std::cmp::Ordering::Greater => lower,
            });
            let to = AugmentedState {
                state: SectionState::from_section(sweep.col(), sweep.row()),
                match_on: center,
            };
            let target = if sweep.center() > 1 { &mut n } else { &mut m };
            target[(old, to.index())] += &quarter;
        }
    }
    TransitionPair {
        model: ChainModel::StringAugmented,
        k: 2,
        r: 1,
        m,
        n,
    }
}

/// Growth constant of reach-1 LCS for two random binary strings.
pub fn gamma_string_exact() -> Result<GammaExact> {
    gamma_exact(&build_string_matrices())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_set_is_exactly_the_even_patterns() {
        for w in REALIZABLE_WINDOWS {
            assert!(matches!(w.sum(), 0 | 2 | 4));
        }
        for bits in 0..16u8 {
            let w = Window2x2::from_bits(bits);
            assert_eq!(REALIZABLE_WINDOWS.contains(&w), w.is_realizable());
        }
    }

    #[test]
    fn small_weights() {
        let mut one = EpsilonBand::zeros(1, 1).unwrap();
        assert_eq!(realizability_weight(&one).unwrap(), 2);
        one.set(1, 1, true).unwrap();
        assert_eq!(realizability_weight(&one).unwrap(), 2);

        let mut odd = EpsilonBand::zeros(2, 1).unwrap();
        odd.set(1, 2, true).unwrap();
        assert_eq!(realizability_weight(&odd).unwrap(), 0);

        assert_eq!(realizability_weight(&EpsilonBand::ones(2, 1).unwrap()).unwrap(), 2);
        assert!(matches!(
            realizability_weight(&EpsilonBand::zeros(3, 2).unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn fresh_windows_are_realizable() {
        for old in [false, true] {
            for a in [false, true] {
                for b in [false, true] {
                    let (upper, center, lower) = fresh_window(old, a, b);
                    let w = Window2x2 {
                        upper_left: upper,
                        upper_right: center,
                        lower_left: old,
                        lower_right: lower,
                    };
                    assert!(w.is_realizable());
                }
            }
        }
    }

    #[test]
    fn augmented_index_layout() {
        for idx in 0..8 {
            assert_eq!(AugmentedState::from_index(idx).index(), idx);
        }
        assert!(!AugmentedState::from_index(3).match_on);
        assert!(AugmentedState::from_index(4).match_on);
    }
}
