//! Randomized evaluation of AND/OR game trees.
//!
//! The evaluator picks children of every gate in random order and stops as
//! soon as the gate's value is known; its cost is the number of leaves read.
//! This crate builds the stochastically worst inputs, computes exact cost
//! laws, simulates the associated two-type branching process and evaluates
//! the constants governing mean, variance, limit law and tails of the
//! worst-case cost for complete m-ary trees.
//!
//! Modules:
//! - [`tree`]: tree shapes, leaf vectors, deterministic and randomized evaluation
//! - [`worst_case`]: worst-case inputs by block substitution
//! - [`exact_dist`]: exact cost laws, dominance scans, convergence diagnostics
//! - [`branching`]: two-type branching process and Monte Carlo harness
//! - [`analytics`]: spectra, moments, tail constants, reference table

pub mod analytics;
pub mod branching;
mod config;
mod error;
pub mod exact_dist;
pub mod pmf;
pub mod rng;
pub mod tree;
pub mod worst_case;

pub use config::Caps;
pub use error::{Error, Result};
pub use pmf::{dominates, BivariatePmf, CostPmf, FloatPmf, Probability};
pub use tree::{root_value, snir_eval, EvalOutcome, LeafVector, TreeShape};
pub use worst_case::{worst_input, RootBit};
