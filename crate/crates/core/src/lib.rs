//! Spectral machinery for parabolic final value problems.
//!
//! The library works throughout with the Dirichlet Laplacian on an interval
//! or a rectangle, diagonalised in its sine eigenbasis. On that basis the
//! heat semigroup `e^{-tA}` acts mode by mode, which makes the classically
//! ill-posed backward problem fully explicit: recovering `u(0)` from the
//! final state `u(T)` amplifies mode `j` by `e^{T lambda_j}`, and final data
//! are solvable exactly when `u_T - y_f + z_g` lies in the domain of the
//! unbounded inverse `e^{TA}`.
//!
//! Modules:
//! - [`eigenbasis`]: eigensystems, quadrature, spectral projection and norms;
//! - [`semigroup`]: `e^{-tA}`, its unbounded inverse, graph norms and a
//!   numerical domain-membership diagnostic;
//! - [`forward`]: exact Duhamel solver for piecewise-linear sources, solution
//!   norms and stability checks;
//! - [`final_value`]: compatibility analysis and backward reconstruction;
//! - [`boundary`]: harmonic extension of Dirichlet data, the improper
//!   boundary-yield integral and the inhomogeneous forward solver;
//! - [`steering`]: explicit controls driving the source yield to a target;
//! - [`matrix_model`]: finite-dimensional non-selfadjoint models;
//! - [`diagnostics`]: instability tables, Weyl counts, conditioning reports.
//!
//! With the `parallel` feature (default) per-mode loops run on rayon.
//! All reductions use a fixed pairwise order, so results are bit-identical
//! with and without the feature and independent of thread count.

// negated comparisons like `!(t >= 0.0)` are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod diagnostics;
pub mod eigenbasis;
pub mod error;
mod exec;
pub mod final_value;
pub mod forward;
pub mod matrix_model;
pub mod semigroup;
pub mod steering;

pub use eigenbasis::{interval_basis, rectangle_basis, BasisId, DomainKind, EigenSystem, Space, SpectralVector};
pub use error::{FvpError, Result};
pub use final_value::{analyze, solve_fvp, CompatibilityReport, Thresholds};
pub use forward::{duhamel_solve, yield_map, ModalSignal, Trajectory};
pub use semigroup::{propagate, propagate_inverse, Verdict, DEFAULT_LOG_CAP};

/// Crate version, embedded in generated reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
