//! Perron eigenpairs, the coupled power and derivative scheme, and dense
//! reference computations.

pub mod dense;
mod lowrank;
mod normalization;
pub mod objective;
pub mod operator;
mod power;

pub use dense::{
    certified_eigen_bound, drazin_dense, eigenprojector, log_convexity_check, perron_dense, solve_bordered, spectral_radius,
    CertifiedBound, DENSE_CAP,
};
pub use lowrank::{root_gradient, LowRankGradient};
pub use normalization::Normalization;
pub use objective::{FnObjective, NormObjective, Objective, TargetObjective};
pub use operator::{LinearOperator, Shifted};
pub use power::{
    assemble_j_g, default_cap, iterate_to_level, power_derivative_step, power_iterate, ChainRule, Identity,
    PerronState, Unsymmetric,
};
