//! Numerical laboratory for doubly warped product metrics over the cone
//! `C(S(S^3))`: metrics of the form
//!
//! ```text
//! g = dr^2 + a(r)^2 ( ds^2 + b(s)^2 g_{S^3}(r, s) )
//! ```
//!
//! where `g_{S^3}(r,s)` is a two-parameter family of diagonal right-invariant
//! metrics on the three-sphere, `<V_j, V_k> = e^{2 m_j(r,s)} delta_{jk}`.
//!
//! The crate provides
//!
//! * exact second-order jets of the warping profiles and metric functions
//!   ([`profiles`], [`fiber`], [`metric`]),
//! * closed-form Ricci curvature in the adapted frame plus an independent
//!   finite-difference oracle in exponential fiber coordinates ([`ricci`]),
//! * the two standing example spaces (a smoothly varying fiber family and a
//!   Hoelder-critical multi-scale family) with positivity certificates
//!   ([`examples`]),
//! * discrete sampling, metric graphs, shortest paths and excess fields
//!   ([`cloud`], [`graph`]),
//! * Gromov-Hausdorff estimates between finite metric spaces ([`gh`]),
//! * graph heat flow and parabolic approximation checks ([`heat`]),
//! * Jacobi-field and Hessian experiments along geodesics ([`jacobi`]),
//! * excess-based effective cut-locus experiments ([`cutlocus`]),
//! * deterministic serialization of distance matrices, CSV tables, SVG plots
//!   and JSON manifests ([`io`]).
//!
//! All randomness flows through seeded `ChaCha8` generators and all public
//! entry points are deterministic functions of their inputs, so every
//! experiment in the companion CLI reruns byte-identically.

pub mod cloud;
pub mod cone;
pub mod examples;
pub mod fiber;
pub mod fit;
pub mod gh;
pub mod graph;
pub mod halfplane;
pub mod heat;
pub mod jacobi;
pub mod metric;
pub mod profiles;
pub mod quat;
pub mod ricci;
pub mod synthetic;
pub mod util;

/// Errors reported by fallible constructors and experiment drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A cutoff ramp cannot absorb a unit rise under its derivative bound.
    #[error("cutoff infeasible: {0}")]
    CutoffInfeasible(String),
    /// Inputs violate a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An iterative solver failed to reach its tolerance.
    #[error("solver failed: {0}")]
    SolverFailed(String),
    /// A neighbor graph split into several components (sizes attached).
    #[error("graph disconnected; component sizes {0:?}")]
    Disconnected(Vec<usize>),
    /// File or formatting problem while reading/writing artifacts.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed artifact file (distance matrix, config, ...).
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
