//! Resource caps shared by the exact engines.
//!
//! Every cap has a conservative default and an environment override so the
//! command-line tool can raise it without recompiling.

use std::env;

pub const ENV_MAX_R: &str = "RREACH_MAX_R";
pub const ENV_MAX_GAMMA_R: &str = "RREACH_MAX_GAMMA_R";
pub const ENV_MAX_ENUM: &str = "RREACH_MAX_ENUM";
pub const ENV_MAX_CELLS: &str = "RREACH_MAX_CELLS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest reach for which dense transition matrices are built.
    pub max_transfer_r: usize,
    /// Largest reach for which the characteristic slices are interpolated.
    pub max_gamma_r: usize,
    /// Largest number of string pairs enumerated by the oracle.
    pub max_enumeration: u64,
    /// Largest number of band cells enumerated by the Bernoulli oracle.
    pub max_band_cells: u32,
    /// Largest reach initialised by enumerating the full r x r square.
    pub max_bruteforce_init_r: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_transfer_r: 5,
            max_gamma_r: 3,
            max_enumeration: 100_000_000,
            max_band_cells: 25,
            max_bruteforce_init_r: 4,
        }
    }
}

impl Limits {
    /// Defaults, overridden by any of the `RREACH_MAX_*` variables that parse.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(v) = read_env(ENV_MAX_R) {
            limits.max_transfer_r = v as usize;
        }
        if let Some(v) = read_env(ENV_MAX_GAMMA_R) {
            limits.max_gamma_r = v as usize;
        }
        if let Some(v) = read_env(ENV_MAX_ENUM) {
            limits.max_enumeration = v;
        }
        if let Some(v) = read_env(ENV_MAX_CELLS) {
            limits.max_band_cells = v as u32;
        }
        limits
    }
}

fn read_env(name: &str) -> Option<u64> {
    env::var(name).ok()?.trim().parse().ok()
}
