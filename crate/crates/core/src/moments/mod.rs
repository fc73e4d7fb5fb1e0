//! Moment formalism in momentum space: coin operators as Bloch vectors,
//! superoperators per model, finite-time moments and long-time diffusion.

mod bloch;
mod diffusion;
mod finite;
mod quadrature;
mod superops;

pub use bloch::{pauli, BlochVector};
pub use diffusion::{diffusion_integrand, long_time_diffusion, DiffusionReport};
pub use finite::{finite_time_moments, moment_series};
pub use quadrature::{integrate_bz, pairwise_sum, recommended_grid, BzGrid};
pub use superops::{
    build_superops, superops_consistency, superops_fd_consistency, superops_finite_difference, superops_from_kraus,
    trace_identity_deviation, BlochSuperoperatorSet,
    Mat4, SuperopValues,
};
