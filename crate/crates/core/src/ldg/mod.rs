//! LDG discretization of `-eps Lap u + b u = f` on the unit square with
//! homogeneous Dirichlet data, written as the first-order system
//! `p = eps u_x`, `q = eps u_y`, `-p_x - q_y + b u = f`.
//!
//! The discrete unknowns `(U, P, Q)` are assembled monolithically into one
//! sparse system (rows indexed by the test fields `(v, s, r)` in the same
//! layout as the unknowns) and solved by a sparse direct factorization.

mod assembly;
mod bilinear;
mod solve;

pub use assembly::{assemble, AssemblyOptions, LinearSystem};
pub use bilinear::{bilinear_apply, energy_norm_sq};
pub use solve::{solve, SolveOutput};

use crate::error::{Error, Result};
use crate::ScalarFn;

/// Exact solution triple `(u, p = eps u_x, q = eps u_y)`.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub p: ScalarFn,
    pub q: ScalarFn,
}

/// A reaction-diffusion problem on the unit square.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub epsilon: f64,
    /// Reaction coefficient; must satisfy `b >= 2 beta^2 > 0`.
    pub b: ScalarFn,
    pub f: ScalarFn,
    pub exact: Option<ExactSolution>,
    /// Lower bound parameter used for the mesh transition point.
    pub beta: f64,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("epsilon", &self.epsilon)
            .field("beta", &self.beta)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Tolerance for the boundary check on exact solutions.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

impl ProblemSpec {
    /// Checks parameters and, by sampling, the positivity of `b` and the
    /// homogeneous boundary values of the exact solution.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        const SAMPLES: usize = 40;
        let mut b_min = f64::INFINITY;
        for iy in 0..=SAMPLES {
            for ix in 0..=SAMPLES {
                let (x, y) = (ix as f64 / SAMPLES as f64, iy as f64 / SAMPLES as f64);
                b_min = b_min.min((self.b)(x, y));
            }
        }
        if !(b_min > 0.0) {
            return Err(Error::InvalidParam(format!(
                "reaction coefficient must be positive, sampled minimum {b_min}"
            )));
        }
        if b_min < 2.0 * self.beta * self.beta * (1.0 - 1e-12) {
            log::warn!(
                "{}: sampled min b = {b_min} is below 2 beta^2 = {}",
                self.name,
                2.0 * self.beta * self.beta
            );
        }
        if let Some(exact) = &self.exact {
            const EDGE: usize = 100;
            for k in 0..=EDGE {
                let t = k as f64 / EDGE as f64;
                for (x, y) in [(0.0, t), (1.0, t), (t, 0.0), (t, 1.0)] {
                    let v = (exact.u)(x, y);
                    if !(v.abs() <= BOUNDARY_TOLERANCE) {
                        return Err(Error::InvalidParam(format!(
                            "exact solution is {v} at boundary point ({x}, {y})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
