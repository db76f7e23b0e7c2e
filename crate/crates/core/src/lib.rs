//! Polynomial-chaos surrogates for an elliptic Bayesian inverse problem.
//!
//! The crate builds truncated Hermite polynomial-chaos expansions of a
//! finite-element forward model by stochastic collocation, samples both the
//! exact and the surrogate posterior (implicit sampling and random-walk
//! Metropolis), and quantifies when the surrogate posterior degrades as data
//! become informative — including small-noise Kullback–Leibler curves on
//! closed-form toy problems.
//!
//! Modules:
//! - [`hermite`]: orthonormal Hermite basis, multi-indices, Gauss–Hermite
//!   tensor quadrature
//! - [`mesh`] / [`fem`]: triangulated unit-square mesh, P1 assembly of
//!   `−∇·(e^Y∇u) = f`, Jacobi-preconditioned CG, and the observation operator
//! - [`gauss_field`]: squared-exponential covariance and its truncated KL
//!   basis
//! - [`pce`]: collocation builder, evaluation, pointwise error diagnostics
//! - [`bayes`]: posteriors, synthetic data, small-noise KLD quadrature
//! - [`samplers`]: mode search, implicit sampling, Metropolis
//! - [`experiments`]: the CLI-facing harness with CSV/SVG outputs
//!
//! With the default `parallel` feature, collocation solves, importance
//! weights and sweep points run on rayon; disabling the feature gives a
//! dependency-light sequential build with identical outputs.

pub mod bayes;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod fem;
pub mod forward;
pub mod gauss_field;
pub mod hermite;
pub mod mesh;
pub mod pce;
pub mod samplers;

pub use error::{Error, Result};
