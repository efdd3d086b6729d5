//! Optimization of scalar functions of web ranking vectors.
//!
//! A webmaster controls a few pages of a link graph. Some hyperlinks are
//! obligatory, some prohibited, and the remaining *facultative* ones may be
//! given any weight in `[0, 1]`. This crate searches for weights that
//! maximize a utility of the resulting ranking, for two ranking models:
//!
//! - **HITS authority**: the Perron vector of `AᵀA + ξeeᵀ` ([`hits`]).
//! - **HOTS**: the dual "temperature" vector of a maximum entropy flow
//!   problem on the graph ([`hots`]).
//!
//! The derivative of a function of a Perron vector with respect to the
//! matrix entries has rank one (`g = w uᵀ`), and the auxiliary vector `w`
//! can be iterated together with the power method at the same cost
//! ([`spectral::power_derivative_step`]). The [`optimizer`] couples these
//! inner iterations with a projected gradient outer loop that refines the
//! inner precision only when the line search needs it.
//!
//! ```text
//! graph      edge lists, CSR matrices, box projection
//! spectral   power method, derivative scheme, dense oracles
//! optimizer  Armijo rules, master loop, trajectories
//! hits       HITS adapter, thresholds, rounding
//! hots       theta, fixed point, Hessian, auxiliary vector, flows
//! perron     plain Perron vector adapter (M = A + ξeeᵀ)
//! cli        command line jobs
//! ```

pub mod check;
pub mod cli;
pub mod error;
pub mod graph;
pub mod hits;
pub mod hots;
pub mod optimizer;
pub mod perron;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{LinkGraph, SparseMatrix, WeightVector};
