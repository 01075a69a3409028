//! Exhaustive ground truth at desk scale.
//!
//! Everything here is deliberately naive: full enumeration, the literal
//! table recurrence, exact integer accumulation. Nothing in this module
//! shares the section-by-section evaluator used by the chain builders.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{lcs_length, rreach_table_length, EpsilonBand, StringSeq};
use crate::limits::{Limits, ENV_MAX_CELLS, ENV_MAX_ENUM};
use crate::rational::Rational;
use crate::string_model::realizability_weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleModel {
    Strings,
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub model: OracleModel,
    pub k: u32,
    /// `None` means unrestricted.
    pub reach: Option<usize>,
    pub n: usize,
    pub expectation: Rational,
    pub enumeration_count: u64,
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

fn decode(mut index: u64, k: u32, n: usize) -> Vec<u32> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = (index % k as u64) as u32;
        index /= k as u64;
    }
    out
}

/// Average of `L(u, v)` (or `L_r(u, v)`) over all `k^{2n}` ordered pairs.
pub fn string_expectation(k: u32, n: usize, reach: Option<usize>) -> Result<OracleResult> {
    string_expectation_with(k, n, reach, &Limits::default())
}

pub fn string_expectation_with(
    k: u32,
    n: usize,
    reach: Option<usize>,
    limits: &Limits,
) -> Result<OracleResult> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("alphabet size {k} < 2")));
    }
    if reach == Some(0) {
        return Err(Error::InvalidArgument("reach must be at least 1".into()));
    }
    let too_big = || Error::ResourceCap {
        what: "string pairs to enumerate",
        requested: u64::MAX,
        cap: limits.max_enumeration,
        env: ENV_MAX_ENUM,
    };
    let singles = checked_pow(k as u64, n as u32).ok_or_else(too_big)?;
    let pairs = singles.checked_mul(singles).ok_or_else(too_big)?;
    if pairs > limits.max_enumeration {
        return Err(Error::ResourceCap {
            what: "string pairs to enumerate",
            requested: pairs,
            cap: limits.max_enumeration,
            env: ENV_MAX_ENUM,
        });
    }

    let total: u64 = (0..singles)
        .into_par_iter()
        .map(|a| -> Result<u64> {
            let u = StringSeq::new(decode(a, k, n), k)?;
            let mut sum = 0u64;
            for b in 0..singles {
                let v = StringSeq::new(decode(b, k, n), k)?;
                let len = match reach {
                    None => lcs_length(&u, &v)?,
                    Some(r) => {
                        let (x, y) = (u.symbols(), v.symbols());
                        rreach_table_length(n, r, |i, j| x[i - 1] == y[j - 1])
                    }
                };
                sum += len as u64;
            }
            Ok(sum)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    Ok(OracleResult {
        model: OracleModel::Strings,
        k,
        reach,
        n,
        expectation: Rational::new(BigInt::from(total), BigInt::from(pairs)),
        enumeration_count: pairs,
    })
}

/// Exact `EL` of the Bernoulli model with match probability `1/k` on the band
/// of reach `r`, summing over all `2^{cells}` match assignments.
pub fn bernoulli_expectation(k: u32, n: usize, r: usize) -> Result<OracleResult> {
    bernoulli_expectation_with(k, n, r, &Limits::default())
}

pub fn bernoulli_expectation_with(k: u32, n: usize, r: usize, limits: &Limits) -> Result<OracleResult> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("alphabet size {k} < 2")));
    }
    let band = EpsilonBand::zeros(n, r)?;
    let cells: Vec<(usize, usize)> = band.cells().collect();
    let c = cells.len() as u32;
    if c > limits.max_band_cells {
        return Err(Error::ResourceCap {
            what: "band cells to enumerate",
            requested: c as u64,
            cap: limits.max_band_cells as u64,
            env: ENV_MAX_CELLS,
        });
    }
    // position[i][j] = bit of cell (i, j) in the assignment mask.
    let mut position = vec![vec![usize::MAX; n + 1]; n + 1];
    for (bit, &(i, j)) in cells.iter().enumerate() {
        position[i][j] = bit;
    }

    // by_zeros[z] = total DP length over assignments with z unmatched cells.
    let by_zeros: Vec<u64> = (0..1u64 << c)
        .into_par_iter()
        .fold(
            || vec![0u64; c as usize + 1],
            |mut acc, mask| {
                let len = rreach_table_length(n, r, |i, j| (mask >> position[i][j]) & 1 == 1);
                acc[(c - mask.count_ones()) as usize] += len as u64;
                acc
            },
        )
        .reduce(
            || vec![0u64; c as usize + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let km1 = BigInt::from(k - 1);
    let numer = by_zeros
        .iter()
        .enumerate()
        .fold(BigInt::from(0), |acc, (z, &s)| acc + BigInt::from(s) * km1.pow(z as u32));
    Ok(OracleResult {
        model: OracleModel::Bernoulli,
        k,
        reach: Some(r),
        n,
        expectation: Rational::new(numer, BigInt::from(k).pow(c)),
        enumeration_count: 1u64 << c,
    })
}

/// Outcome of checking the binary reach-1 window criterion against brute force.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusSummary {
    pub n: usize,
    pub configurations: u64,
    /// Brute-force weight -> number of band configurations with that weight.
    pub weight_counts: BTreeMap<u64, u64>,
    /// Configurations whose brute-force weight differs from the criterion.
    pub mismatches: u64,
}

impl CensusSummary {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.weight_counts.keys().all(|&w| w == 0 || w == 2)
    }
}

/// For every reach-1 band configuration of size `n`, counts the binary string
/// pairs producing it and compares with the window criterion.
pub fn realizability_census(n: usize) -> Result<CensusSummary> {
    realizability_census_with(n, &Limits::default())
}

pub fn realizability_census_with(n: usize, limits: &Limits) -> Result<CensusSummary> {
    if n == 0 {
        return Err(Error::InvalidArgument("census needs n >= 1".into()));
    }
    let band = EpsilonBand::zeros(n, 1)?;
    let cells: Vec<(usize, usize)> = band.cells().collect();
    let c = cells.len() as u32;
    let work = (1u64 << c.min(63)).max(1u64 << (2 * n).min(63));
    if c >= 63 || 2 * n >= 63 || work > limits.max_enumeration {
        return Err(Error::ResourceCap {
            what: "realizability census size",
            requested: work,
            cap: limits.max_enumeration,
            env: ENV_MAX_ENUM,
        });
    }

    let mut counts = vec![0u64; 1 << c];
    for u in 0..1u64 << n {
        for v in 0..1u64 << n {
            let mut config = 0usize;
            for (bit, &(i, j)) in cells.iter().enumerate() {
                if (u >> (i - 1)) & 1 == (v >> (j - 1)) & 1 {
                    config |= 1 << bit;
                }
            }
            counts[config] += 1;
        }
    }

    let mut weight_counts = BTreeMap::new();
    let mut mismatches = 0;
    let mut config_band = band;
    for (config, &count) in counts.iter().enumerate() {
        for (bit, &(i, j)) in cells.iter().enumerate() {
            config_band.set(i, j, (config >> bit) & 1 == 1)?;
        }
        if realizability_weight(&config_band)? != count {
            mismatches += 1;
        }
        *weight_counts.entry(count).or_insert(0) += 1;
    }
    Ok(CensusSummary {
        n,
        configurations: counts.len() as u64,
        weight_counts,
        mismatches,
    })
}
