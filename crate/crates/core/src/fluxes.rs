//! Layer-upwind numerical flux tables.
//!
//! On the fine part of the mesh the flux for `U` takes the trace from the
//! side facing the interior of the domain and the fluxes for `P`, `Q` take the
//! trace from the side facing the boundary; on the coarse part all three use
//! the central average. At the boundary `U` is replaced by the homogeneous
//! Dirichlet value and `P`, `Q` by their one-sided interior traces.
//!
//! Tables are plain data consumed by assembly, so other flux policies can be
//! added as new constructors of [`FluxTable`].

use serde::{Deserialize, Serialize};

use crate::dgspace::Axis;
use crate::error::{Error, Result};

/// Which trace a numerical flux uses on a mesh line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FluxChoice {
    /// Boundary datum zero.
    Zero,
    /// Trace from the left/lower element (`v^-`).
    MinusTrace,
    /// Trace from the right/upper element (`v^+`).
    PlusTrace,
    /// `(v^- + v^+) / 2`.
    Average,
}

impl FluxChoice {
    /// The same choice seen after reflecting the axis (`t -> 1 - t`).
    pub fn mirrored(self) -> Self {
        match self {
            FluxChoice::MinusTrace => FluxChoice::PlusTrace,
            FluxChoice::PlusTrace => FluxChoice::MinusTrace,
            other => other,
        }
    }

    /// Weights `(w_minus, w_plus)` of the two one-sided traces.
    pub fn weights(self) -> (f64, f64) {
        match self {
            FluxChoice::Zero => (0.0, 0.0),
            FluxChoice::MinusTrace => (1.0, 0.0),
            FluxChoice::PlusTrace => (0.0, 1.0),
            FluxChoice::Average => (0.5, 0.5),
        }
    }
}

/// Flux choices for the primal variable and its flux variable along one axis,
/// indexed by mesh line `0..=N`.
///
/// Along x the flux variable is `P`; along y it is `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FluxTable {
    primal: Vec<FluxChoice>,
    flux: Vec<FluxChoice>,
}

impl FluxTable {
    /// Layer-upwind table for `n` intervals.
    pub fn layer_upwind(n: usize) -> Self {
        let primal = (0..=n).map(|i| layer_upwind_u(i, n)).collect();
        let flux = (0..=n).map(|i| layer_upwind_p(i, n)).collect();
        Self { primal, flux }
    }

    pub fn n(&self) -> usize {
        self.primal.len() - 1
    }

    /// Choice for `U-hat` on mesh line `i`.
    pub fn primal(&self, i: usize) -> FluxChoice {
        self.primal[i]
    }

    /// Choice for `P-hat` (x lines) or `Q-hat` (y lines) on mesh line `i`.
    pub fn flux(&self, i: usize) -> FluxChoice {
        self.flux[i]
    }
}

fn layer_upwind_u(i: usize, n: usize) -> FluxChoice {
    if i == 0 || i == n {
        FluxChoice::Zero
    } else if i <= n / 4 {
        FluxChoice::MinusTrace
    } else if i < 3 * n / 4 {
        FluxChoice::Average
    } else {
        FluxChoice::PlusTrace
    }
}

fn layer_upwind_p(i: usize, n: usize) -> FluxChoice {
    if i <= n / 4 {
        FluxChoice::PlusTrace
    } else if i < 3 * n / 4 {
        FluxChoice::Average
    } else {
        FluxChoice::MinusTrace
    }
}

fn check(i: usize, n: usize) -> Result<()> {
    if i > n {
        Err(Error::OutOfRange { index: i, max: n })
    } else {
        Ok(())
    }
}

/// Layer-upwind choice for `U-hat` on mesh line `i` normal to `axis`.
pub fn flux_for_u(_axis: Axis, i: usize, n: usize) -> Result<FluxChoice> {
    check(i, n)?;
    Ok(layer_upwind_u(i, n))
}

/// Layer-upwind choice for `P-hat` on mesh line `i`.
pub fn flux_for_p(_axis: Axis, i: usize, n: usize) -> Result<FluxChoice> {
    check(i, n)?;
    Ok(layer_upwind_p(i, n))
}

/// Layer-upwind choice for `Q-hat`: the `P` table applied along y.
pub fn flux_for_q(axis: Axis, i: usize, n: usize) -> Result<FluxChoice> {
    flux_for_p(axis, i, n)
}
