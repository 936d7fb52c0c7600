//! Principal eigenvalues, landscape functions and Green functions of the
//! discrete Anderson operator `-Δ_A + W` on finite subsets of `Z^d`, with
//! the scaling constants of its large-box asymptotics and a seeded Monte
//! Carlo harness.

pub mod error;
pub mod extremes;
pub mod harness;
pub mod landscape;
pub mod lattice;
pub mod operator;
pub mod output;
pub mod potential;
pub mod scales;

pub use error::{Error, Result};
pub use lattice::{Domain, LatticePoint};
pub use operator::{SchrodingerOperator, SpectralResult};
pub use potential::{ConditionTag, DistributionSpec, PotentialField};
