//! Evolutionary simulation of identity formation under pairwise matching.
//!
//! Genomes are bitstrings decoded into a type value and two Beta shape
//! genes; the Beta quantile of the type gives an identity on `[0, 1]`.
//! Individuals match in pairs under binary and nonbinary preference rules,
//! matching probability drives a genetic algorithm, and a companion module
//! checks the equilibrium structure of the underlying 2x2 coordination game.

pub mod beta_numerics;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod game_analysis;
pub mod genome;
pub mod harness;
pub mod interpreter;
pub mod matching;
pub mod stats;

pub use error::{Error, Result};
