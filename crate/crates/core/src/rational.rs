//! Exact rational scalars, dense rational matrices and univariate polynomials.
//!
//! Nothing in this module rounds. Determinants are computed by clearing
//! denominators and running fraction-free (Bareiss) elimination over the
//! integers, which keeps intermediate entries bounded by Hadamard's bound
//! instead of letting fraction sizes compound across pivots.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Renders `x` with `digits` significant digits, rounding half to even.
pub fn to_decimal(x: &Rational, digits: usize) -> String {
    assert!(digits > 0);
    if x.is_zero() {
        return format!("0.{}", "0".repeat(digits.saturating_sub(1)));
    }
    let negative = x.is_negative();
    let num = x.numer().abs();
    let den = x.denom().clone();

    // Decimal exponent e with 10^e <= |x| < 10^(e+1).
    let mut e = num.to_string().len() as i64 - den.to_string().len() as i64;
    let ten = BigInt::from(10u32);
    let pow10 = |p: i64| -> BigInt { num_traits::pow(ten.clone(), p as usize) };
    let below = |e: i64| -> bool {
        // |x| < 10^e ?
        if e >= 0 {
            num < &den * pow10(e)
        } else {
            &num * pow10(-e) < den
        }
    };
    while below(e) {
        e -= 1;
    }
    while !below(e + 1) {
        e += 1;
    }

    // Scaled value |x| * 10^(digits-1-e), rounded half-even to an integer.
    let shift = digits as i64 - 1 - e;
    let (sn, sd) = if shift >= 0 {
        (&num * pow10(shift), den.clone())
    } else {
        (num.clone(), &den * pow10(-shift))
    };
    let (mut q, rem) = sn.div_rem(&sd);
    let twice = &rem * 2u32;
    if twice > sd || (twice == sd && q.is_odd()) {
        q += 1u32;
    }
    let mut shift = shift;
    let mut digits_str = q.to_string();
    if digits_str.len() > digits {
        // Rounding carried into a new leading digit.
        digits_str.truncate(digits);
        shift -= 1;
    }

    let point = digits_str.len() as i64 - shift;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits_str)
    } else if point as usize >= digits_str.len() {
        format!("{}{}", digits_str, "0".repeat(point as usize - digits_str.len()))
    } else {
        let (a, b) = digits_str.split_at(point as usize);
        format!("{a}.{b}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Dense row-major matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(RationalMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// A 1 x n matrix.
    pub fn row_vector(values: Vec<Rational>) -> Self {
        RationalMatrix {
            rows: 1,
            cols: values.len(),
            entries: values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    /// `self + s * other`, the shape of `T(b) = M + bN`.
    pub fn add_scaled(&self, s: &Rational, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b * s))
    }

    /// `self - s * I`.
    pub fn sub_diagonal(&self, s: &Rational) -> Result<Self> {
        if !self.is_square() {
            return Err(self.not_square());
        }
        let mut m = self.clone();
        for i in 0..self.rows {
            m[(i, i)] -= s;
        }
        Ok(m)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o += vi * a;
                }
            }
        }
        Ok(out)
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(Rational::zero(), |acc, x| acc + x))
            .collect()
    }

    /// Least common multiple of all entry denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.entries
            .iter()
            .fold(BigInt::one(), |acc, e| acc.lcm(e.denom()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn not_square(&self) -> Error {
        Error::Dimension(format!("expected a square matrix, got {}x{}", self.rows, self.cols))
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Exact determinant of a square rational matrix.
pub fn det(m: &RationalMatrix) -> Result<Rational> {
    if !m.is_square() {
        return Err(m.not_square());
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Rational::one());
    }
    let d = m.common_denominator();
    let ints: Vec<BigInt> = m
        .entries()
        .iter()
        .map(|e| e.numer() * (&d / e.denom()))
        .collect();
    let det_int = bareiss_det(ints, n);
    Ok(Rational::new(det_int, num_traits::pow(d, n)))
}

/// Fraction-free Gaussian elimination: every division is exact.
fn bareiss_det(mut a: Vec<BigInt>, n: usize) -> BigInt {
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                return BigInt::zero();
            };
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            negate = !negate;
        }
        let pivot = a[k * n + k].clone();
        for i in k + 1..n {
            let lead = a[i * n + k].clone();
            for j in k + 1..n {
                let v = &a[i * n + j] * &pivot - &lead * &a[k * n + j];
                a[i * n + j] = if prev.is_one() { v } else { v / &prev };
            }
            a[i * n + k] = BigInt::zero();
        }
        prev = pivot;
    }
    let d = a[n * n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Basis of `{v : v m = 0}` as 1 x n row vectors; empty when trivial.
pub fn left_nullspace(m: &RationalMatrix) -> Result<Vec<RationalMatrix>> {
    if !m.is_square() {
        return Err(m.not_square());
    }
    // v m = 0  <=>  m^T v^T = 0.
    let t = m.transpose();
    let n = t.rows();
    let cols = t.cols();
    let mut a = t.to_rows();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == n {
            break;
        }
        let Some(p) = (row..n).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                let (src, dst) = if i < row {
                    let (lo, hi) = a.split_at_mut(row);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = a.split_at_mut(i);
                    (&lo[row], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    if !s.is_zero() {
                        *d -= &f * s;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }

    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][f].clone();
            }
            RationalMatrix::row_vector(v)
        })
        .collect();
    Ok(basis)
}

/// Univariate polynomial with exact coefficients, lowest power first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UniPolynomial {
    coefficients: Vec<Rational>,
}

impl UniPolynomial {
    pub fn new(mut coefficients: Vec<Rational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        UniPolynomial { coefficients }
    }

    pub fn zero() -> Self {
        UniPolynomial::default()
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coefficients
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> UniPolynomial {
        UniPolynomial::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, c)| c * BigInt::from(p))
                .collect(),
        )
    }
}

impl fmt::Display for UniPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(p, c)| match p {
                0 => format!("{c}"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{p}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// The unique polynomial of degree below `points.len()` through every point
/// (Newton divided differences).
pub fn interpolate(points: &[(Rational, Rational)]) -> Result<UniPolynomial> {
    for (i, (xi, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|(xj, _)| xj == xi) {
            return Err(Error::DuplicateAbscissa(xi.to_string()));
        }
    }
    let n = points.len();
    let xs: Vec<&Rational> = points.iter().map(|(x, _)| x).collect();
    let mut coef: Vec<Rational> = points.iter().map(|(_, y)| y.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            coef[i] = (&coef[i] - &coef[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    // Horner expansion of the Newton form into monomials.
    let mut acc: Vec<Rational> = Vec::with_capacity(n);
    for i in (0..n).rev() {
        // acc <- acc * (x - xs[i]) + coef[i]
        let mut next = vec![Rational::zero(); acc.len() + 1];
        for (p, c) in acc.iter().enumerate() {
            next[p + 1] += c;
            next[p] -= c * xs[i];
        }
        next[0] += &coef[i];
        acc = next;
    }
    Ok(UniPolynomial::new(acc))
}

/// Exact `p'(x)`.
pub fn poly_derivative_at(p: &UniPolynomial, x: &Rational) -> Rational {
    p.derivative().eval(x)
}

/// `(num, den)` as decimal strings, the wire form used in every export.
pub fn to_string_pair(x: &Rational) -> [String; 2] {
    [x.numer().to_string(), x.denom().to_string()]
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn biguint_to_bigint(x: BigUint) -> BigInt {
    BigInt::from_biguint(if x.is_zero() { Sign::NoSign } else { Sign::Plus }, x)
}
