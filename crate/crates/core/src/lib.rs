//! Local discontinuous Galerkin (LDG) discretisation of the singularly
//! perturbed reaction-diffusion problem
//!
//! ```text
//!   -eps * Laplace(u) + b u = f   in (0,1)^2,     u = 0 on the boundary,
//! ```
//!
//! on piecewise-uniform Shishkin meshes, using layer-upwind numerical fluxes.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: Shishkin mesh construction and subregion classification.
//! - [`polybasis`]: Legendre modal basis and Gauss-Legendre quadrature.
//! - [`dgspace`]: discontinuous piecewise-Q^k fields, traces, jumps and averages.
//! - [`projectors`]: L2, Gauss-Radau and weighted local projectors.
//! - [`fluxes`]: layer-upwind flux tables.
//! - [`ldg`]: system assembly, direct solve and the bilinear form.
//! - [`norms`]: energy/balanced error norms, two-mesh errors, Shishkin rates.
//! - [`problems`]: built-in test problems.
//! - [`study`]: convergence studies and table output used by the `ldg-study` binary.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dgspace;
pub mod error;
pub mod fluxes;
pub mod ldg;
pub mod mesh;
pub mod norms;
pub mod polybasis;
pub mod problems;
pub mod projectors;
pub mod study;

pub use error::{Error, Result};

/// Scalar function of (x, y) shared across threads.
pub type ScalarFn = std::sync::Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
