//! Preference-biased reference points for decomposition-based
//! multi-objective optimization.
//!
//! - [`simplex`]: lattice generation and simplex projection
//! - [`nums`]: non-uniform mapping toward a region of interest
//! - [`problems`]: ZDT1 and DTLZ1-4 benchmarks with Pareto-front samplers
//! - [`operators`], [`stm`], [`moead`]: the stable-matching MOEA/D optimizer
//! - [`metrics`]: IGD, hypervolume and the R-metric preprocessing

pub mod dat;
pub mod error;
pub mod metrics;
pub mod moead;
pub mod nums;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod simplex;
pub mod stm;

pub use error::{Error, Result, TauBound};
pub use nums::{RoiSpec, Roi};
pub use simplex::{ReferencePoint, ReferenceSet};
