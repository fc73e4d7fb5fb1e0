//! Two-dimensional alternative quantum walk under Kraus decoherence.
//!
//! The walk alternates a Hadamard coin with conditional shifts along x and
//! then y. Noise acts on the x-substep, either by cutting x-links
//! ([`Model::BrokenLine`]) or by measuring the coin ([`Model::CoinMeasure`]).
//! Three engines compute the dynamics: exact density-matrix evolution,
//! Monte Carlo trajectories, and a momentum-space moment formalism that also
//! yields long-time diffusion coefficients.

pub mod channels;
pub mod correlations;
pub mod density;
pub mod error;
mod linalg;
pub mod model;
pub mod moments;
pub mod walk;

pub use density::{DensityOperator, Label, Subsystem};
pub use error::{Error, Result};
pub use model::Model;
pub use walk::{Coin, Lattice, MomentReport, PositionDistribution, PureLatticeState, WalkConfig};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
