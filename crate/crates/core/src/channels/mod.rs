//! Kraus families for the two noise models, the exact channel on density
//! operators and its trajectory unravelling.

mod exact;
mod family;
mod symbol;
mod trajectory;

pub use exact::{
    apply_channel_exact, apply_channel_grow, apply_stencil, family_stencils, stencil_consistency, ExactEvolution,
};
pub use family::{build_family, coherent_symbol, completeness_check, KrausFamily, KrausOperator};
pub use symbol::{Mat2, MomentumSymbol, SignConvention, Stencil};
pub use trajectory::{
    trajectory_run, MomentEstimate, ReducedOperators, TrajectoryEnsembleResult, TrajectoryOptions,
};
