//! Seeded Monte Carlo estimates of `EL_n` for every `n <= n_max` at once.
//!
//! One trial sweeps a single band of length `n_max` and records the running
//! center value `R(n, n)`, so the per-`n` estimates within a trial share a
//! lattice and are correlated across `n`.
//!
//! Trial `t` draws from `ChaCha8Rng` keyed by `seed` on stream `t`; the
//! result therefore depends only on `(seed, t)` and never on scheduling.
//! Per-`n` sums are exact integers, so the reduction order is irrelevant.

use std::io::{Read, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{check_window, fit_affine, FitResult};
use crate::lattice::BandSweep;
use crate::propagation::ExactCurve;
use crate::transfer::ChainModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McModel {
    /// Two uniform random strings.
    String,
    /// Independent cells matching with probability `1/k`.
    Bernoulli,
}

impl McModel {
    pub fn name(&self) -> &'static str {
        match self {
            McModel::String => "string",
            McModel::Bernoulli => "bernoulli",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "string" => Ok(McModel::String),
            "bernoulli" => Ok(McModel::Bernoulli),
            _ => Err(Error::InvalidArgument(format!("unknown model {s:?}"))),
        }
    }

    fn matches_chain(&self, chain: ChainModel) -> bool {
        match self {
            McModel::String => chain == ChainModel::StringAugmented,
            McModel::Bernoulli => {
                matches!(chain, ChainModel::Bernoulli | ChainModel::BernoulliAugmented)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub model: McModel,
    pub k: u32,
    pub r: usize,
    pub n_max: usize,
    pub trials: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidArgument(format!("alphabet size {} < 2", self.k)));
        }
        if self.r == 0 {
            return Err(Error::InvalidArgument("reach must be at least 1".into()));
        }
        if self.trials == 0 || self.n_max == 0 {
            return Err(Error::InvalidArgument("trials and n_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Aggregated trial results.
#[derive(Debug, Clone, PartialEq)]
pub struct McCurve {
    pub config: McConfig,
    /// `sum_lengths[n - 1]` = sum over trials of `R(n, n)`.
    pub sum_lengths: Vec<u64>,
    /// Standard error of the mean at each `n`.
    pub stderr: Vec<f64>,
}

impl McCurve {
    pub fn n_max(&self) -> usize {
        self.sum_lengths.len()
    }

    pub fn mean(&self, n: usize) -> f64 {
        self.sum_lengths[n - 1] as f64 / self.config.trials as f64
    }
}

/// Match coins with probability `1/k`. A power-of-two `k` consumes
/// `log2 k` random bits per coin.
struct Coins {
    rng: ChaCha8Rng,
    k: u32,
    bits_per_coin: u32,
    buffer: u64,
    left: u32,
}

impl Coins {
    fn new(rng: ChaCha8Rng, k: u32) -> Self {
        let bits_per_coin = if k.is_power_of_two() { k.trailing_zeros() } else { 0 };
        Coins {
            rng,
            k,
            bits_per_coin,
            buffer: 0,
            left: 0,
        }
    }

    fn flip(&mut self) -> bool {
        if self.bits_per_coin == 0 {
            return self.rng.gen_range(0..self.k) == 0;
        }
        if self.left < self.bits_per_coin {
            self.buffer = self.rng.next_u64();
            self.left = 64 - 64 % self.bits_per_coin;
        }
        let mask = (1u64 << self.bits_per_coin) - 1;
        let hit = self.buffer & mask == 0;
        self.buffer >>= self.bits_per_coin;
        self.left -= self.bits_per_coin;
        hit
    }
}

/// The independent random stream of trial `t`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Running center values `R(1,1), .., R(n_max, n_max)` of one trial.
pub fn run_single_trial(config: &McConfig, trial: u64) -> Vec<u32> {
    let mut rng = trial_rng(config.seed, trial);
    let mut sweep = BandSweep::new(config.r);
    let mut out = Vec::with_capacity(config.n_max);
    match config.model {
        McModel::Bernoulli => {
            let mut coins = Coins::new(rng, config.k);
            for _ in 0..config.n_max {
                sweep.step(|_, _| coins.flip());
                out.push(sweep.center());
            }
        }
        McModel::String => {
            let u: Vec<u32> = (0..config.n_max).map(|_| rng.gen_range(0..config.k)).collect();
            let v: Vec<u32> = (0..config.n_max).map(|_| rng.gen_range(0..config.k)).collect();
            for _ in 0..config.n_max {
                sweep.step(|i, j| u[i - 1] == v[j - 1]);
                out.push(sweep.center());
            }
        }
    }
    out
}

pub fn run_trials(config: &McConfig) -> Result<McCurve> {
    config.validate()?;
    let n_max = config.n_max;
    let zero = || (vec![0u64; n_max], vec![0u64; n_max]);
    let (sums, squares) = (0..config.trials)
        .into_par_iter()
        .fold(zero, |(mut s, mut q), t| {
            for (idx, &len) in run_single_trial(config, t).iter().enumerate() {
                s[idx] += len as u64;
                q[idx] += len as u64 * len as u64;
            }
            (s, q)
        })
        .reduce(zero, |(mut s, mut q), (s2, q2)| {
            s.iter_mut().zip(s2).for_each(|(a, b)| *a += b);
            q.iter_mut().zip(q2).for_each(|(a, b)| *a += b);
            (s, q)
        });

    let t = config.trials as f64;
    let stderr = sums
        .iter()
        .zip(&squares)
        .map(|(&s, &q)| {
            if config.trials < 2 {
                return 0.0;
            }
            let mean = s as f64 / t;
            let var = ((q as f64 - t * mean * mean) / (t - 1.0)).max(0.0);
            (var / t).sqrt()
        })
        .collect();
    Ok(McCurve {
        config: *config,
        sum_lengths: sums,
        stderr,
    })
}

/// The variance-minimising affine extrapolation over `n_min..=n_max`.
pub fn fit_extrapolation(curve: &McCurve, n_min: usize, n_max: usize) -> Result<FitResult> {
    check_window(n_min, n_max, curve.n_max())?;
    let points: Vec<(usize, f64)> = (n_min..=n_max).map(|n| (n, curve.mean(n))).collect();
    fit_affine(&points)
}

/// `(1/N) sum_{n=1}^{N} (mean(n)/n - EL_n/n)^2` with `N = curve.n_max()`.
pub fn s_statistic(curve: &McCurve, exact: &ExactCurve) -> Result<f64> {
    let cfg = &curve.config;
    if !cfg.model.matches_chain(exact.model) || cfg.k != exact.k || cfg.r != exact.r {
        return Err(Error::ModelMismatch(format!(
            "simulation ({}, k={}, r={}) vs exact curve ({}, k={}, r={})",
            cfg.model.name(),
            cfg.k,
            cfg.r,
            exact.model.name(),
            exact.k,
            exact.r
        )));
    }
    let n_max = curve.n_max();
    if exact.n_max() < n_max {
        return Err(Error::LengthMismatch {
            left: n_max,
            right: exact.n_max(),
        });
    }
    let total: f64 = (1..=n_max)
        .map(|n| {
            let d = (curve.mean(n) - exact.el_f64(n)) / n as f64;
            d * d
        })
        .sum();
    Ok(total / n_max as f64)
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    model: String,
    k: u32,
    r: usize,
    n: usize,
    trials: u64,
    sum_length: u64,
    mean: f64,
    stderr: f64,
}

/// CSV with header `model,k,r,n,trials,sum_length,mean,stderr`.
pub fn write_curve_csv<W: Write>(curve: &McCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let cfg = &curve.config;
    for n in 1..=curve.n_max() {
        w.serialize(CurveRow {
            model: cfg.model.name().to_string(),
            k: cfg.k,
            r: cfg.r,
            n,
            trials: cfg.trials,
            sum_length: curve.sum_lengths[n - 1],
            mean: curve.mean(n),
            stderr: curve.stderr[n - 1],
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve written by [`write_curve_csv`]. The seed is not part of the
/// CSV and is supplied by the caller.
pub fn read_curve_csv<R: Read>(input: R, seed: u64) -> Result<McCurve> {
    let mut rows: Vec<CurveRow> = csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(Error::InvalidArgument("curve CSV has no rows".into()));
    }
    rows.sort_by_key(|row| row.n);
    let first = &rows[0];
    let config = McConfig {
        model: McModel::parse(&first.model)?,
        k: first.k,
        r: first.r,
        n_max: rows.len(),
        trials: first.trials,
        seed,
    };
    for (idx, row) in rows.iter().enumerate() {
        if row.n != idx + 1
            || row.model != first.model
            || row.k != first.k
            || row.r != first.r
            || row.trials != first.trials
        {
            return Err(Error::InvalidArgument(format!(
                "curve CSV row {} is inconsistent with a single run covering n = 1..",
                idx + 1
            )));
        }
    }
    Ok(McCurve {
        config,
        sum_lengths: rows.iter().map(|row| row.sum_length).collect(),
        stderr: rows.iter().map(|row| row.stderr).collect(),
    })
}

/// The fit JSON record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McFitRecord {
    pub model: McModel,
    pub k: u32,
    pub r: usize,
    pub gamma_hat: f64,
    pub a_hat: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
}

impl McFitRecord {
    pub fn new(curve: &McCurve, fit: &FitResult) -> Self {
        McFitRecord {
            model: curve.config.model,
            k: curve.config.k,
            r: curve.config.r,
            gamma_hat: fit.gamma_hat,
            a_hat: fit.a_hat,
            n_min: fit.n_min,
            n_max: fit.n_max,
            seed: curve.config.seed,
        }
    }
}
