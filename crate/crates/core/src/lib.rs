//! Exact and simulated expected lengths of reach-restricted longest common
//! subsequences, under both the random-string and the independent
//! (Bernoulli) matching models.

pub mod bernoulli;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod limits;
pub mod montecarlo;
pub mod oracle;
pub mod propagation;
pub mod rational;
pub mod string_model;
pub mod transfer;

pub use error::{Error, Result};
pub use limits::Limits;
pub use rational::{Rational, RationalMatrix};
