//! Variable-metric proximal point and primal-dual Douglas-Rachford splitting
//! with independent, adaptively chosen primal and dual stepsizes.
//!
//! * [`ppa`]: the degenerate variable-metric proximal point engine.
//! * [`pddr`]: preconditioned and primal-dual Douglas-Rachford iterations.
//! * [`adaptive`]: the safeguarded adaptive stepsize controller.
//! * [`spectral`]: eigenvalue analysis of the linear iteration.
//! * [`experiments`]: LAD, TV-denoising and random-matrix generators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod linear_map;
pub mod operators;
pub mod pddr;
pub mod ppa;
pub mod spectral;

pub use adaptive::{AdaptiveConfig, OmegaSchedule, StepsizePolicy};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, Vector};
pub use linear_map::LinearMap;
pub use operators::{ProxMap, RegularizationWeight};
pub use pddr::{solve, PdProblem, SolveOptions, SolveResult, SolveTrace, TraceRecord};
