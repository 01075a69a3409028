//! Exact finite-`n` propagation of the section chain.
//!
//! `P_n(z)` is the row vector of probabilities that the center value is `z`
//! and the section is in each state. For `n > r`
//!
//! ```text
//! P_n(z) = P_{n-1}(z) M + P_{n-1}(z-1) N.
//! ```
//!
//! [`step`] applies this literally. Long curves only need the first moment,
//! so [`MomentPropagator`] tracks `H_n = sum_z P_n(z)` and
//! `E_n = sum_z z P_n(z)`, which obey
//!
//! ```text
//! H_n = H_{n-1} T,   E_n = E_{n-1} T + H_{n-1} N,   T = M + N,
//! ```
//!
//! in scaled integer arithmetic with one shared denominator.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bernoulli::{build_augmented_matrices, build_transition_matrices_with};
use crate::error::{Error, Result};
use crate::fit::{check_window, fit_affine, FitResult};
use crate::lattice::BandSweep;
use crate::limits::{Limits, ENV_MAX_R};
use crate::rational::{biguint_to_bigint, to_f64, Rational};
use crate::string_model::build_string_matrices;
use crate::transfer::{ChainModel, SectionState, TransitionPair};

/// Joint law of the center value and the section state after `n` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionDistribution {
    pub model: ChainModel,
    pub k: u32,
    pub r: usize,
    pub n: usize,
    /// `z -> P_n(z)`; only nonzero vectors are stored.
    pub support: BTreeMap<u32, Vec<Rational>>,
}

impl SectionDistribution {
    pub fn dim(&self) -> usize {
        self.model.state_count(self.r)
    }

    pub fn total_mass(&self) -> Rational {
        self.support
            .values()
            .flatten()
            .fold(Rational::zero(), |acc, p| acc + p)
    }

    /// `EL_n = sum_z z P_n(z) 1`.
    pub fn expected_center(&self) -> Rational {
        self.support.iter().fold(Rational::zero(), |acc, (&z, v)| {
            let mass = v.iter().fold(Rational::zero(), |a, p| a + p);
            acc + mass * Rational::from_integer(z.into())
        })
    }

    /// `sum_z P_n(z)`, the law of the section state alone.
    pub fn marginal(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for v in self.support.values() {
            out.iter_mut().zip(v).for_each(|(o, p)| *o += p);
        }
        out
    }

    /// `sum_z z P_n(z)`.
    pub fn first_moment(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for (&z, v) in &self.support {
            let z = Rational::from_integer(z.into());
            out.iter_mut().zip(v).for_each(|(o, p)| *o += p * &z);
        }
        out
    }

    fn add_mass(&mut self, z: u32, state: usize, p: Rational) {
        let dim = self.dim();
        self.support
            .entry(z)
            .or_insert_with(|| vec![Rational::zero(); dim])[state] += p;
    }
}

fn check_bernoulli_args(k: u32, r: usize, limits: &Limits) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("alphabet size {k} < 2")));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("reach must be at least 1".into()));
    }
    if r > limits.max_transfer_r {
        return Err(Error::ResourceCap {
            what: "reach for exact propagation",
            requested: r as u64,
            cap: limits.max_transfer_r as u64,
            env: ENV_MAX_R,
        });
    }
    Ok(())
}

/// The distribution at `n = r`, where the recurrence starts to hold.
pub fn initialize_at_r(model: ChainModel, k: u32, r: usize) -> Result<SectionDistribution> {
    initialize_at_r_with(model, k, r, &Limits::default())
}

pub fn initialize_at_r_with(
    model: ChainModel,
    k: u32,
    r: usize,
    limits: &Limits,
) -> Result<SectionDistribution> {
    match model {
        ChainModel::Bernoulli => {
            check_bernoulli_args(k, r, limits)?;
            if r <= limits.max_bruteforce_init_r {
                Ok(initialize_by_square(k, r))
            } else {
                Ok(growing_band_distributions(k, r, limits)?.pop().expect("r + 1 entries"))
            }
        }
        ChainModel::BernoulliAugmented | ChainModel::StringAugmented => {
            if k != 2 || r != 1 {
                return Err(Error::Unsupported(format!(
                    "{} chain supports k=2, r=1 only (got k={k}, r={r})",
                    model.name()
                )));
            }
            // One cell: no match (off, state 0) or a match (on, state 3).
            let half = Rational::new(BigInt::one(), BigInt::from(2));
            let mut dist = SectionDistribution {
                model,
                k,
                r,
                n: 1,
                support: BTreeMap::new(),
            };
            dist.add_mass(0, 0, half.clone());
            dist.add_mass(1, 4 + 3, half);
            Ok(dist)
        }
    }
}

/// Enumerates every match assignment on the `r x r` square; at `n = r` the
/// band `|i - j| <= r` contains the whole square.
fn initialize_by_square(k: u32, r: usize) -> SectionDistribution {
    let cells = (r * r) as u32;
    let states = SectionState::count(r);
    // counts[(z, state)][zeros] = number of assignments.
    let mut counts: BTreeMap<(u32, usize), Vec<u64>> = BTreeMap::new();
    for mask in 0..1u64 << cells {
        let mut sweep = BandSweep::new(r);
        for _ in 0..r {
            sweep.step(|i, j| (mask >> ((i - 1) * r + (j - 1))) & 1 == 1);
        }
        let state = SectionState::from_section(sweep.col(), sweep.row());
        let zeros = cells - mask.count_ones();
        counts
            .entry((sweep.center(), state.index()))
            .or_insert_with(|| vec![0; cells as usize + 1])[zeros as usize] += 1;
    }
    let den = BigInt::from(k).pow(cells);
    let km1 = BigInt::from(k - 1);
    let mut dist = SectionDistribution {
        model: ChainModel::Bernoulli,
        k,
        r,
        n: r,
        support: BTreeMap::new(),
    };
    for ((z, state), by_zeros) in counts {
        let numer = by_zeros
            .iter()
            .enumerate()
            .fold(BigInt::zero(), |acc, (zeros, &c)| acc + BigInt::from(c) * km1.pow(zeros as u32));
        if !numer.is_zero() {
            debug_assert!(state < states);
            dist.add_mass(z, state, Rational::new(numer, den.clone()));
        }
    }
    dist
}

/// Bernoulli distributions at `m = 0, 1, .., r`, growing the lattice one
/// section at a time. At step `m <= r` only the `2 (m - 1) + 1` cells inside
/// the `m x m` square are fresh; everything beyond sits on the zero boundary.
pub fn growing_band_distributions(k: u32, r: usize, limits: &Limits) -> Result<Vec<SectionDistribution>> {
    check_bernoulli_args(k, r, limits)?;
    let mut current = SectionDistribution {
        model: ChainModel::Bernoulli,
        k,
        r,
        n: 0,
        support: BTreeMap::from([(0, {
            let mut v = vec![Rational::zero(); SectionState::count(r)];
            v[0] = Rational::one();
            v
        })]),
    };
    let mut out = vec![current.clone()];
    let km1 = BigInt::from(k - 1);
    for m in 1..=r {
        let active = m - 1;
        let fresh = (2 * active + 1) as u32;
        let den = BigInt::from(k).pow(fresh);
        let weights: Vec<Rational> = (0..=fresh)
            .map(|ones| Rational::new(km1.pow(fresh - ones), den.clone()))
            .collect();
        let mut next = SectionDistribution {
            n: m,
            support: BTreeMap::new(),
            ..current.clone()
        };
        for (&z, v) in &current.support {
            for (s, p) in v.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
                let (col, row) = SectionState::from_index(r, s)
                    .section(z)
                    .ok_or_else(|| Error::Degenerate("negative section value".into()))?;
                for pattern in 0..1u32 << fresh {
                    let mut sweep = BandSweep::from_section(r, m - 1, col.clone(), row.clone());
                    // Column offsets 1..=active, then row offsets, then the center.
                    sweep.step(|a, b| {
                        let bit = match a.cmp(&b) {
                            std::cmp::Ordering::Less => b - a - 1,
                            std::cmp::Ordering::Greater => active + (a - b) - 1,
                            std::cmp::Ordering::Equal => 2 * active,
                        };
                        (pattern >> bit) & 1 == 1
                    });
                    let to = SectionState::from_section(sweep.col(), sweep.row());
                    next.add_mass(sweep.center(), to.index(), p * &weights[pattern.count_ones() as usize]);
                }
            }
        }
        out.push(next.clone());
        current = next;
    }
    Ok(out)
}

/// One application of `P_n(z) = P_{n-1}(z) M + P_{n-1}(z-1) N`.
pub fn step(dist: &SectionDistribution, pair: &TransitionPair) -> Result<SectionDistribution> {
    if dist.model != pair.model || dist.k != pair.k || dist.r != pair.r {
        return Err(Error::ModelMismatch(format!(
            "distribution ({}, k={}, r={}) vs matrices ({}, k={}, r={})",
            dist.model.name(),
            dist.k,
            dist.r,
            pair.model.name(),
            pair.k,
            pair.r
        )));
    }
    let dim = pair.dim();
    let mut next = SectionDistribution {
        n: dist.n + 1,
        support: BTreeMap::new(),
        ..dist.clone()
    };
    for (&z, v) in &dist.support {
        for (i, p) in v.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
            for j in 0..dim {
                let stay = &pair.m[(i, j)];
                if !stay.is_zero() {
                    next.add_mass(z, j, p * stay);
                }
                let up = &pair.n[(i, j)];
                if !up.is_zero() {
                    next.add_mass(z + 1, j, p * up);
                }
            }
        }
    }
    next.support.retain(|_, v| v.iter().any(|p| !p.is_zero()));
    Ok(next)
}

/// Little-endian 64-bit limbs of a natural number.
type Limbs = Vec<u64>;

/// `acc += x * c`.
fn add_mul_small(acc: &mut Limbs, x: &[u64], c: u64) {
    if c == 0 || x.is_empty() {
        return;
    }
    if acc.len() < x.len() + 1 {
        acc.resize(x.len() + 1, 0);
    }
    let mut carry: u128 = 0;
    for (a, &xi) in acc.iter_mut().zip(x) {
        let t = *a as u128 + xi as u128 * c as u128 + carry;
        *a = t as u64;
        carry = t >> 64;
    }
    let mut idx = x.len();
    while carry != 0 {
        if idx == acc.len() {
            acc.push(0);
        }
        let t = acc[idx] as u128 + carry;
        acc[idx] = t as u64;
        carry = t >> 64;
        idx += 1;
    }
}

fn trim(x: &mut Limbs) {
    while x.last() == Some(&0) {
        x.pop();
    }
}

fn limbs_to_biguint(x: &[u64]) -> BigUint {
    let digits: Vec<u32> = x.iter().flat_map(|&l| [l as u32, (l >> 32) as u32]).collect();
    BigUint::new(digits)
}

fn biguint_to_limbs(x: &BigUint) -> Limbs {
    let mut out = x.to_u64_digits();
    trim(&mut out);
    out
}

/// Incoming transitions of one target state: `(source, scale*T, scale*N)`.
type Column = Vec<(usize, u64, u64)>;

/// Exact first-moment propagation, `H_n = h / Q` and `E_n = e / Q`.
#[derive(Debug, Clone)]
pub struct MomentPropagator {
    model: ChainModel,
    k: u32,
    r: usize,
    n: usize,
    scale: u64,
    columns: Vec<Column>,
    denominator: BigUint,
    h: Vec<Limbs>,
    e: Vec<Limbs>,
}

impl MomentPropagator {
    pub fn new(pair: &TransitionPair, start: &SectionDistribution) -> Result<Self> {
        if start.model != pair.model || start.k != pair.k || start.r != pair.r {
            return Err(Error::ModelMismatch(format!(
                "start distribution ({}, k={}, r={}) vs matrices ({}, k={}, r={})",
                start.model.name(),
                start.k,
                start.r,
                pair.model.name(),
                pair.k,
                pair.r
            )));
        }
        let (scale, rows) = pair.integer_rows()?;
        let dim = pair.dim();
        let mut columns = vec![Column::new(); dim];
        for (i, row) in rows.iter().enumerate() {
            for &(j, m, n) in row {
                columns[j].push((i, m + n, n));
            }
        }

        let marginal = start.marginal();
        let moment = start.first_moment();
        let q = marginal
            .iter()
            .chain(&moment)
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let to_limbs = |x: &Rational| -> Limbs {
            let v = x.numer() * (&q / x.denom());
            biguint_to_limbs(&v.to_biguint().expect("probabilities are non-negative"))
        };
        Ok(MomentPropagator {
            model: pair.model,
            k: pair.k,
            r: pair.r,
            n: start.n,
            scale,
            columns,
            denominator: q.to_biguint().expect("positive"),
            h: marginal.iter().map(to_limbs).collect(),
            e: moment.iter().map(to_limbs).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> ChainModel {
        self.model
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Advances from `n` to `n + 1`.
    pub fn advance(&mut self) {
        let (h, e) = (&self.h, &self.e);
        let next: Vec<(Limbs, Limbs)> = self
            .columns
            .par_iter()
            .map(|col| {
                let mut nh = Limbs::new();
                let mut ne = Limbs::new();
                for &(i, t, up) in col {
                    add_mul_small(&mut nh, &h[i], t);
                    add_mul_small(&mut ne, &e[i], t);
                    add_mul_small(&mut ne, &h[i], up);
                }
                trim(&mut nh);
                trim(&mut ne);
                (nh, ne)
            })
            .collect();
        (self.h, self.e) = next.into_iter().unzip();
        self.denominator *= self.scale;
        self.n += 1;
    }

    fn ratio(&self, x: &[u64]) -> Rational {
        Rational::new(
            biguint_to_bigint(limbs_to_biguint(x)),
            biguint_to_bigint(self.denominator.clone()),
        )
    }

    fn sum(parts: &[Limbs]) -> Limbs {
        let mut total = Limbs::new();
        for p in parts {
            add_mul_small(&mut total, p, 1);
        }
        total
    }

    /// `EL_n`.
    pub fn expected_center(&self) -> Rational {
        self.ratio(&Self::sum(&self.e))
    }

    /// `H_n 1`; exactly one for a stochastic chain.
    pub fn total_mass(&self) -> Rational {
        self.ratio(&Self::sum(&self.h))
    }

    /// `H_n`.
    pub fn marginal(&self) -> Vec<Rational> {
        self.h.iter().map(|x| self.ratio(x)).collect()
    }

    /// `E_n`.
    pub fn first_moment(&self) -> Vec<Rational> {
        self.e.iter().map(|x| self.ratio(x)).collect()
    }
}

/// `EL_n` for `n = 1..=n_max` as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCurve {
    pub model: ChainModel,
    pub k: u32,
    pub r: usize,
    /// `values[n - 1] = EL_n`.
    pub values: Vec<Rational>,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    model: &'a str,
    k: u32,
    r: usize,
    n: usize,
    el_exact_num: String,
    el_exact_den: String,
    el_float: f64,
}

impl ExactCurve {
    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    pub fn el(&self, n: usize) -> &Rational {
        &self.values[n - 1]
    }

    pub fn el_f64(&self, n: usize) -> f64 {
        to_f64(self.el(n))
    }

    /// CSV with header `model,k,r,n,el_exact_num,el_exact_den,el_float`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (idx, v) in self.values.iter().enumerate() {
            w.serialize(CurveRow {
                model: self.model.name(),
                k: self.k,
                r: self.r,
                n: idx + 1,
                el_exact_num: v.numer().to_string(),
                el_exact_den: v.denom().to_string(),
                el_float: to_f64(v),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Transition pair for a chain model.
pub fn transition_pair(model: ChainModel, k: u32, r: usize, limits: &Limits) -> Result<TransitionPair> {
    match model {
        ChainModel::Bernoulli => build_transition_matrices_with(k, r, limits),
        ChainModel::BernoulliAugmented => build_augmented_matrices(k, r),
        ChainModel::StringAugmented => {
            if k != 2 || r != 1 {
                return Err(Error::Unsupported(format!(
                    "string model supports k=2, r=1 only (got k={k}, r={r})"
                )));
            }
            Ok(build_string_matrices())
        }
    }
}

pub fn exact_curve(model: ChainModel, k: u32, r: usize, n_max: usize) -> Result<ExactCurve> {
    exact_curve_with(model, k, r, n_max, &Limits::default())
}

pub fn exact_curve_with(
    model: ChainModel,
    k: u32,
    r: usize,
    n_max: usize,
    limits: &Limits,
) -> Result<ExactCurve> {
    if n_max < r || n_max == 0 {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} must be at least the reach {r} and at least 1"
        )));
    }
    let pair = transition_pair(model, k, r, limits)?;
    let start = initialize_at_r_with(model, k, r, limits)?;
    let mut values = Vec::with_capacity(n_max);
    if model == ChainModel::Bernoulli && r > 1 {
        // Before the section formalism applies the lattice is still growing.
        let early = growing_band_distributions(k, r, limits)?;
        values.extend(early[1..r].iter().map(SectionDistribution::expected_center));
    }
    let mut prop = MomentPropagator::new(&pair, &start)?;
    values.push(prop.expected_center());
    while prop.n() < n_max {
        prop.advance();
        values.push(prop.expected_center());
    }
    Ok(ExactCurve {
        model,
        k,
        r,
        values,
    })
}

/// The affine extrapolation of the exact curve over `n_min..=n_max`.
pub fn affine_tail_fit(curve: &ExactCurve, n_min: usize, n_max: usize) -> Result<FitResult> {
    check_window(n_min, n_max, curve.n_max())?;
    let points: Vec<(usize, f64)> = (n_min..=n_max).map(|n| (n, curve.el_f64(n))).collect();
    fit_affine(&points)
}
