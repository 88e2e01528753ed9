//! Precoder constructions: the full-power baseline, projected gradient
//! descent on the sum-MSE, aligned MRT, MRT and nullspace-directed SVD
//! directions with correlation-aware gain optimization, and the closed-form
//! two-user solution.

mod gradient;
mod heuristics;
mod nusvd;
mod two_user;

pub use gradient::{
    design_gradient, design_gradient_multistart, mse_gradient, project_feasible,
    projected_gradient, GradientConfig, GradientOutcome, PrecodingError,
};
pub use heuristics::{
    amrt, full_power, gradient_on_equivalent, mrt_directions, optimize_gains, DirectionSet,
    GainVector,
};
pub use nusvd::{nusvd_directions, NusvdOutcome};
pub use two_user::{
    asymptotic_mse_large_nr, asymptotic_mse_single_antenna, two_user_alpha, two_user_mse,
    two_user_mse_optimal_phase, two_user_optimal, TwoUserRegion, TwoUserSolution,
};
