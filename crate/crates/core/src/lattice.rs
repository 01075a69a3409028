//! Reference dynamic programs for `L(u, v)`, the reach-restricted `L_r(u, v)`,
//! and the banded lattice driven by an explicit match configuration.
//!
//! Lattice coordinates are 1-based: cell `(i, j)` pairs position `i` of the
//! first sequence with position `j` of the second, and row/column 0 is the
//! zero boundary.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A sequence over the alphabet `{0, .., k-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StringSeq {
    symbols: Vec<u32>,
    k: u32,
}

impl StringSeq {
    pub fn new(symbols: Vec<u32>, k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("alphabet size {k} < 2")));
        }
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= k) {
            return Err(Error::SymbolOutOfRange { symbol, k });
        }
        Ok(StringSeq { symbols, k })
    }

    /// Encodes two texts over the dense alphabet of the characters they use
    /// (first appearance order), with at least two letters.
    pub fn encode_pair(a: &str, b: &str) -> (StringSeq, StringSeq) {
        let mut letters: HashMap<char, u32> = HashMap::new();
        let mut code = |s: &str| -> Vec<u32> {
            s.chars()
                .map(|c| {
                    let next = letters.len() as u32;
                    *letters.entry(c).or_insert(next)
                })
                .collect()
        };
        let ua = code(a);
        let ub = code(b);
        let k = (letters.len() as u32).max(2);
        (StringSeq { symbols: ua, k }, StringSeq { symbols: ub, k })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Match indicators `eps(i, j)` for `1 <= i, j <= n`, `|i - j| <= r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpsilonBand {
    n: usize,
    r: usize,
    bits: Vec<bool>,
}

impl EpsilonBand {
    pub fn zeros(n: usize, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("reach must be at least 1".into()));
        }
        Ok(EpsilonBand {
            n,
            r,
            bits: vec![false; n * (2 * r + 1)],
        })
    }

    pub fn ones(n: usize, r: usize) -> Result<Self> {
        let mut band = Self::zeros(n, r)?;
        for (i, j) in band.cells().collect::<Vec<_>>() {
            band.set(i, j, true)?;
        }
        Ok(band)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Every in-band cell, row by row.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (n, r) = (self.n, self.r);
        (1..=n).flat_map(move |i| (i.saturating_sub(r).max(1)..=(i + r).min(n)).map(move |j| (i, j)))
    }

    pub fn cell_count(&self) -> usize {
        self.cells().count()
    }

    fn slot(&self, i: usize, j: usize) -> Result<usize> {
        if i == 0 || j == 0 || i > self.n || j > self.n || i.abs_diff(j) > self.r {
            return Err(Error::OutOfBand {
                i,
                j,
                r: self.r,
                n: self.n,
            });
        }
        Ok((i - 1) * (2 * self.r + 1) + (j + self.r - i))
    }

    pub fn get(&self, i: usize, j: usize) -> Result<bool> {
        Ok(self.bits[self.slot(i, j)?])
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) -> Result<()> {
        let s = self.slot(i, j)?;
        self.bits[s] = value;
        Ok(())
    }

    /// In-band lookup for callers that already respect the band.
    pub(crate) fn bit(&self, i: usize, j: usize) -> bool {
        self.bits[(i - 1) * (2 * self.r + 1) + (j + self.r - i)]
    }
}

/// Length plus the last section `R(n-r, n), .., R(n, n), .., R(n, n-r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpResult {
    pub length: u64,
    pub final_section: Vec<u64>,
}

/// Classic LCS length by the `D(i, j)` recurrence.
pub fn lcs_length(u: &StringSeq, v: &StringSeq) -> Result<usize> {
    if u.k != v.k {
        return Err(Error::AlphabetMismatch {
            left: u.k,
            right: v.k,
        });
    }
    let m = v.len();
    let mut prev = vec![0usize; m + 1];
    let mut cur = vec![0usize; m + 1];
    for &a in &u.symbols {
        for (j, &b) in v.symbols.iter().enumerate() {
            cur[j + 1] = if a == b {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// `L_r(u, v)`: the four-case recurrence evaluated row by row over the band.
pub fn rreach_string_length(u: &StringSeq, v: &StringSeq, r: usize) -> Result<usize> {
    if u.k != v.k {
        return Err(Error::AlphabetMismatch {
            left: u.k,
            right: v.k,
        });
    }
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if r == 0 {
        return Err(Error::InvalidArgument("reach must be at least 1".into()));
    }
    let (a, b) = (u.symbols(), v.symbols());
    Ok(rreach_table_length(u.len(), r, |i, j| a[i - 1] == b[j - 1]))
}

/// The four-case reach-`r` recurrence on a full `(n+1) x (n+1)` table, with
/// match indicators supplied by `eps(i, j)` for in-band cells.
pub fn rreach_table_length(n: usize, r: usize, eps: impl Fn(usize, usize) -> bool) -> usize {
    // Cells outside the band are never read by the recurrence.
    let mut table = vec![vec![0usize; n + 1]; n + 1];
    for i in 1..=n {
        for j in i.saturating_sub(r).max(1)..=(i + r).min(n) {
            table[i][j] = if eps(i, j) {
                table[i - 1][j - 1] + 1
            } else if i.abs_diff(j) < r {
                table[i][j - 1].max(table[i - 1][j])
            } else if j > i {
                table[i][j - 1]
            } else {
                table[i - 1][j]
            };
        }
    }
    table[n][n]
}

/// `eps(i, j) = [u(i) == v(j)]` on the band of reach `r`.
pub fn band_from_strings(u: &StringSeq, v: &StringSeq, r: usize) -> Result<EpsilonBand> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut band = EpsilonBand::zeros(u.len(), r)?;
    for (i, j) in band.cells().collect::<Vec<_>>() {
        band.set(i, j, u.symbols[i - 1] == v.symbols[j - 1])?;
    }
    Ok(band)
}

/// Sweeps the band section by section; `O(n r)` time, `O(r)` memory.
pub fn rreach_band_length(band: &EpsilonBand) -> DpResult {
    let mut sweep = BandSweep::new(band.r);
    for _ in 0..band.n {
        sweep.step(|i, j| band.bit(i, j));
    }
    DpResult {
        length: sweep.center() as u64,
        final_section: sweep.section_values().into_iter().map(u64::from).collect(),
    }
}

/// Incremental evaluator of the reach-`r` recurrence, one anti-diagonal
/// section per step.
///
/// After `m` steps, `col[i] = R(m - i, m)` and `row[i] = R(m, m - i)` for
/// `i = 0..=r`; indices that fall at or before the zero boundary hold 0.
#[derive(Debug, Clone)]
pub struct BandSweep {
    r: usize,
    m: usize,
    col: Vec<u32>,
    row: Vec<u32>,
    next_col: Vec<u32>,
    next_row: Vec<u32>,
}

impl BandSweep {
    pub fn new(r: usize) -> Self {
        assert!(r >= 1, "reach must be at least 1");
        BandSweep {
            r,
            m: 0,
            col: vec![0; r + 1],
            row: vec![0; r + 1],
            next_col: vec![0; r + 1],
            next_row: vec![0; r + 1],
        }
    }

    /// Starts from an arbitrary section at step `m`. `col[0]` must equal `row[0]`.
    pub fn from_section(r: usize, m: usize, col: Vec<u32>, row: Vec<u32>) -> Self {
        assert_eq!(col.len(), r + 1);
        assert_eq!(row.len(), r + 1);
        assert_eq!(col[0], row[0]);
        BandSweep {
            r,
            m,
            col,
            row,
            next_col: vec![0; r + 1],
            next_row: vec![0; r + 1],
        }
    }

    pub fn reach(&self) -> usize {
        self.r
    }

    /// Number of completed steps (the current center is `(m, m)`).
    pub fn steps(&self) -> usize {
        self.m
    }

    pub fn center(&self) -> u32 {
        self.col[0]
    }

    pub fn col(&self) -> &[u32] {
        &self.col
    }

    pub fn row(&self) -> &[u32] {
        &self.row
    }

    /// `R(m-r, m), .., R(m, m), .., R(m, m-r)`.
    pub fn section_values(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.col.iter().rev().copied().collect();
        out.extend_from_slice(&self.row[1..]);
        out
    }

    /// Advances to section `m + 1`, querying `eps(i, j)` for each new cell in
    /// the fixed order: column cells far corner first, then row cells far
    /// corner first, then the center.
    pub fn step(&mut self, mut eps: impl FnMut(usize, usize) -> bool) {
        let r = self.r;
        let m = self.m + 1;

        // Column cells (m - i, m), i = r..1.
        for i in (1..=r).rev() {
            self.next_col[i] = if i >= m {
                0
            } else if eps(m - i, m) {
                self.col[i] + 1
            } else if i < r {
                self.col[i - 1].max(self.next_col[i + 1])
            } else {
                self.col[r - 1]
            };
        }
        // Row cells (m, m - j), j = r..1.
        for j in (1..=r).rev() {
            self.next_row[j] = if j >= m {
                0
            } else if eps(m, m - j) {
                self.row[j] + 1
            } else if j < r {
                self.row[j - 1].max(self.next_row[j + 1])
            } else {
                self.row[r - 1]
            };
        }
        let center = if eps(m, m) {
            self.col[0] + 1
        } else {
            self.next_col[1].max(self.next_row[1])
        };
        self.next_col[0] = center;
        self.next_row[0] = center;

        std::mem::swap(&mut self.col, &mut self.next_col);
        std::mem::swap(&mut self.row, &mut self.next_row);
        self.m = m;
    }
}
