//! Section states, transition pairs `(M, N)` and exact extraction of the
//! growth constant from `g(lambda, b) = det(M + bN - lambda I)`.
//!
//! The section at step `n` is the run of `2r + 1` values
//! `R(n-r, n), .., R(n, n), .., R(n, n-r)`. Adjacent values differ by 0 or 1
//! and decrease away from the center, so relative to `z = R(n, n)` the
//! section is described by `2r` decrement bits. Matrices are oriented for
//! row vectors: entry `(i, j)` is the probability of moving from old state
//! `i` to new state `j`, with `M` collecting the moves that keep the center
//! value and `N` the moves that increment it.

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limits::{Limits, ENV_MAX_GAMMA_R};
use crate::rational::{
    det, interpolate, left_nullspace, poly_derivative_at, to_string_pair, Rational,
    RationalMatrix, UniPolynomial,
};

/// Decrement bits `(d1x, d1y, d2x, d2y, .., drx, dry)`, packed big-endian
/// with `d1x` as the most significant bit.
///
/// For `r = 1` the index order is `(z,z,z), (z,z,z-1), (z,z-1,z), (z,z-1,z-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectionState {
    r: usize,
    index: usize,
}

impl SectionState {
    pub fn count(r: usize) -> usize {
        1 << (2 * r)
    }

    pub fn from_index(r: usize, index: usize) -> Self {
        assert!(index < Self::count(r));
        SectionState { r, index }
    }

    pub fn from_decrements(r: usize, dx: &[u8], dy: &[u8]) -> Self {
        assert_eq!(dx.len(), r);
        assert_eq!(dy.len(), r);
        let mut index = 0;
        for i in 0..r {
            debug_assert!(dx[i] <= 1 && dy[i] <= 1);
            index = (index << 2) | ((dx[i] as usize) << 1) | dy[i] as usize;
        }
        SectionState { r, index }
    }

    /// Reads the state off absolute section values (`col[0] == row[0]`).
    pub fn from_section(col: &[u32], row: &[u32]) -> Self {
        let r = col.len() - 1;
        let dx: Vec<u8> = (1..=r).map(|i| (col[i - 1] - col[i]) as u8).collect();
        let dy: Vec<u8> = (1..=r).map(|i| (row[i - 1] - row[i]) as u8).collect();
        Self::from_decrements(r, &dx, &dy)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `d_i^x` for `i` in `1..=r`.
    pub fn dx(&self, i: usize) -> u8 {
        self.bit(2 * (i - 1))
    }

    /// `d_i^y` for `i` in `1..=r`.
    pub fn dy(&self, i: usize) -> u8 {
        self.bit(2 * (i - 1) + 1)
    }

    /// The `2r` bits in listed order.
    pub fn decrements(&self) -> Vec<u8> {
        (0..2 * self.r).map(|p| self.bit(p)).collect()
    }

    fn bit(&self, position: usize) -> u8 {
        ((self.index >> (2 * self.r - 1 - position)) & 1) as u8
    }

    /// Absolute section values for center value `z`; `None` if any would be negative.
    pub fn section(&self, z: u32) -> Option<(Vec<u32>, Vec<u32>)> {
        let mut col = vec![z; self.r + 1];
        let mut row = vec![z; self.r + 1];
        for i in 1..=self.r {
            col[i] = col[i - 1].checked_sub(self.dx(i) as u32)?;
            row[i] = row[i - 1].checked_sub(self.dy(i) as u32)?;
        }
        Some((col, row))
    }
}

/// Which chain a transition pair or distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainModel {
    /// Independent matches, states are plain section states.
    Bernoulli,
    /// Independent matches with the center match bit carried in the state.
    BernoulliAugmented,
    /// Two random binary strings, reach 1, center match bit carried in the state.
    StringAugmented,
}

impl ChainModel {
    pub fn name(&self) -> &'static str {
        match self {
            ChainModel::Bernoulli => "bernoulli",
            ChainModel::BernoulliAugmented => "bernoulli-augmented",
            ChainModel::StringAugmented => "string-augmented",
        }
    }

    pub fn state_count(&self, r: usize) -> usize {
        match self {
            ChainModel::Bernoulli => SectionState::count(r),
            ChainModel::BernoulliAugmented | ChainModel::StringAugmented => {
                2 * SectionState::count(r)
            }
        }
    }
}

/// Nonzero columns of one row of the integer form: `(column, scale*M, scale*N)`.
pub type IntegerRow = Vec<(usize, u64, u64)>;

/// The two conditional transition matrices of one chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionPair {
    pub model: ChainModel,
    pub k: u32,
    pub r: usize,
    /// Center value unchanged.
    pub m: RationalMatrix,
    /// Center value incremented.
    pub n: RationalMatrix,
}

#[derive(Serialize)]
struct MatrixJson {
    k: u32,
    r: usize,
    #[serde(rename = "M")]
    m: Vec<Vec<[String; 2]>>,
    #[serde(rename = "N")]
    n: Vec<Vec<[String; 2]>>,
}

pub(crate) fn matrix_to_json(m: &RationalMatrix) -> Vec<Vec<[String; 2]>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(to_string_pair).collect())
        .collect()
}

impl TransitionPair {
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// `T(b) = M + bN`.
    pub fn t_of(&self, b: &Rational) -> RationalMatrix {
        self.m.add_scaled(b, &self.n).expect("M and N share a shape")
    }

    pub fn t1(&self) -> RationalMatrix {
        self.m.add(&self.n).expect("M and N share a shape")
    }

    /// `det(T(b) - lambda I)`.
    pub fn char_poly_at(&self, lambda: &Rational, b: &Rational) -> Rational {
        let t = self.t_of(b).sub_diagonal(lambda).expect("square");
        det(&t).expect("square")
    }

    /// Rows of `M + N` all sum to one and every entry lies in `[0, 1]`.
    pub fn is_stochastic(&self) -> bool {
        let one = Rational::one();
        let in_range = |m: &RationalMatrix| {
            m.entries()
                .iter()
                .all(|e| *e >= Rational::zero() && *e <= one)
        };
        in_range(&self.m) && in_range(&self.n) && self.t1().row_sums().iter().all(|s| *s == one)
    }

    /// `{"k", "r", "M", "N"}` with `[num, den]` decimal-string entries.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MatrixJson {
            k: self.k,
            r: self.r,
            m: matrix_to_json(&self.m),
            n: matrix_to_json(&self.n),
        })
        .expect("plain data serialises")
    }

    /// Integer form `(scale, rows)` with `scale * M` and `scale * N` integral.
    /// Each row lists `(column, scale*M, scale*N)` for nonzero columns.
    pub fn integer_rows(&self) -> Result<(u64, Vec<IntegerRow>)> {
        let scale = self.m.common_denominator().lcm(&self.n.common_denominator());
        let scale_u64: u64 = scale
            .to_string()
            .parse()
            .map_err(|_| Error::Unsupported(format!("transition denominator {scale} exceeds 64 bits")))?;
        let as_u64 = |x: &Rational| -> u64 {
            let v = x.numer() * (&scale / x.denom());
            v.to_string().parse().expect("entries are at most 1")
        };
        let dim = self.dim();
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .filter_map(|j| {
                        let a = &self.m[(i, j)];
                        let b = &self.n[(i, j)];
                        (!a.is_zero() || !b.is_zero()).then(|| (j, as_u64(a), as_u64(b)))
                    })
                    .collect()
            })
            .collect();
        Ok((scale_u64, rows))
    }
}

/// Growth constant with its certificate data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaExact {
    pub gamma: Rational,
    /// Stationary left eigenvector of `T(1)`, normalised to sum 1.
    pub stationary: Vec<Rational>,
    /// `g(lambda, 1)`.
    pub char_slice_lambda: UniPolynomial,
    /// `g(1, b)`.
    pub char_slice_b: UniPolynomial,
}

/// `gamma = -g_b(1,1) / g_lambda(1,1)`, the derivative at `b = 1` of the
/// Perron root of `T(b)`, plus the stationary vector of `T(1)`.
pub fn gamma_exact(pair: &TransitionPair) -> Result<GammaExact> {
    gamma_exact_with(pair, &Limits::default())
}

pub fn gamma_exact_with(pair: &TransitionPair, limits: &Limits) -> Result<GammaExact> {
    if pair.r > limits.max_gamma_r {
        return Err(Error::ResourceCap {
            what: "reach for characteristic-slice interpolation",
            requested: pair.r as u64,
            cap: limits.max_gamma_r as u64,
            env: ENV_MAX_GAMMA_R,
        });
    }
    let dim = pair.dim();
    let one = Rational::one();

    // Both slices have degree at most dim: every entry of T(b) is affine in b
    // and lambda only appears on the diagonal.
    let abscissae: Vec<Rational> = (0..=dim as i64).map(|x| Rational::from_integer(x.into())).collect();
    let t1 = pair.t1();
    let lambda_points: Vec<(Rational, Rational)> = abscissae
        .iter()
        .map(|l| (l.clone(), det(&t1.sub_diagonal(l).expect("square")).expect("square")))
        .collect();
    let b_points: Vec<(Rational, Rational)> = abscissae
        .iter()
        .map(|b| (b.clone(), pair.char_poly_at(&one, b)))
        .collect();
    let char_slice_lambda = interpolate(&lambda_points)?;
    let char_slice_b = interpolate(&b_points)?;

    if !char_slice_lambda.eval(&one).is_zero() {
        return Err(Error::Degenerate("lambda = 1 is not an eigenvalue of T(1)".into()));
    }
    let g_lambda = poly_derivative_at(&char_slice_lambda, &one);
    if g_lambda.is_zero() {
        return Err(Error::Degenerate("lambda = 1 is a repeated root of g(lambda, 1)".into()));
    }
    let g_b = poly_derivative_at(&char_slice_b, &one);
    let gamma = -g_b / g_lambda;

    let stationary = stationary_vector(&t1)?;
    Ok(GammaExact {
        gamma,
        stationary,
        char_slice_lambda,
        char_slice_b,
    })
}

/// The unique left fixed vector of a row-stochastic matrix, summing to 1.
pub fn stationary_vector(t1: &RationalMatrix) -> Result<Vec<Rational>> {
    let basis = left_nullspace(&t1.sub_diagonal(&Rational::one())?)?;
    if basis.len() != 1 {
        return Err(Error::NonUnique(basis.len()));
    }
    let v = basis[0].entries().to_vec();
    let total = v.iter().fold(Rational::zero(), |acc, x| acc + x);
    if total.is_zero() {
        return Err(Error::Degenerate("fixed vector sums to zero".into()));
    }
    Ok(v.into_iter().map(|x| x / &total).collect())
}
