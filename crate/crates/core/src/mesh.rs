//! Piecewise-uniform Shishkin mesh on the unit square.
//!
//! The 1D mesh has `N/4` fine intervals of width `4 tau / N` in each layer
//! strip `(0, tau)` and `(1 - tau, 1)` and `N/2` coarse intervals of width
//! `2 (1 - 2 tau) / N` in between. The 2D mesh is the tensor product of the
//! same 1D mesh in x and y.
//!
//! Element indices in this module are 1-based (`1..=N`) to match the usual
//! `K_ij = (x_{i-1}, x_i) x (y_{j-1}, y_j)` numbering; storage elsewhere is
//! 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs to [`build_shishkin`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    /// Number of mesh intervals per axis.
    pub n: usize,
    pub epsilon: f64,
    /// Transition-parameter multiplier.
    pub sigma: f64,
    /// Lower bound constant with `b >= 2 beta^2`.
    pub beta: f64,
    /// Polynomial degree the mesh is intended for; only used for the
    /// `sigma >= khat + 1` advisory check.
    pub degree: usize,
}

impl MeshParams {
    pub fn new(n: usize, epsilon: f64, sigma: f64, beta: f64, degree: usize) -> Self {
        Self {
            n,
            epsilon,
            sigma,
            beta,
            degree,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_multiple_of(4) {
            return Err(Error::InvalidN(self.n));
        }
        for (name, value) in [
            ("epsilon", self.epsilon),
            ("sigma", self.sigma),
            ("beta", self.beta),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// `khat = k + 1` for even `k`, `k` for odd `k`.
    pub fn khat(&self) -> usize {
        khat(self.degree)
    }

    /// Whether `sigma >= khat + 1`, the condition assumed by the error analysis.
    pub fn sigma_is_theory_safe(&self) -> bool {
        self.sigma >= (self.khat() + 1) as f64
    }

    /// The unclamped transition point `sigma sqrt(eps) ln N / beta`.
    pub fn raw_tau(&self) -> f64 {
        self.sigma * self.epsilon.sqrt() * (self.n as f64).ln() / self.beta
    }
}

pub fn khat(degree: usize) -> usize {
    if degree.is_multiple_of(2) {
        degree + 1
    } else {
        degree
    }
}

/// One of the three bands `(0, tau)`, `(tau, 1 - tau)`, `(1 - tau, 1)` along an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    Lower,
    Middle,
    Upper,
}

impl Band {
    /// 1, 2 or 3.
    pub fn index(self) -> usize {
        match self {
            Band::Lower => 1,
            Band::Middle => 2,
            Band::Upper => 3,
        }
    }

    fn of_element(i: usize, n: usize) -> Band {
        if i <= n / 4 {
            Band::Lower
        } else if i <= 3 * n / 4 {
            Band::Middle
        } else {
            Band::Upper
        }
    }
}

/// The nine subregions `Omega_{ab}`; the first digit is the x band, the second the y band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionId {
    Omega11,
    Omega21,
    Omega31,
    Omega12,
    Omega22,
    Omega32,
    Omega13,
    Omega23,
    Omega33,
}

impl RegionId {
    pub const ALL: [RegionId; 9] = [
        RegionId::Omega11,
        RegionId::Omega21,
        RegionId::Omega31,
        RegionId::Omega12,
        RegionId::Omega22,
        RegionId::Omega32,
        RegionId::Omega13,
        RegionId::Omega23,
        RegionId::Omega33,
    ];

    pub fn from_bands(x: Band, y: Band) -> Self {
        use Band::*;
        match (x, y) {
            (Lower, Lower) => RegionId::Omega11,
            (Middle, Lower) => RegionId::Omega21,
            (Upper, Lower) => RegionId::Omega31,
            (Lower, Middle) => RegionId::Omega12,
            (Middle, Middle) => RegionId::Omega22,
            (Upper, Middle) => RegionId::Omega32,
            (Lower, Upper) => RegionId::Omega13,
            (Middle, Upper) => RegionId::Omega23,
            (Upper, Upper) => RegionId::Omega33,
        }
    }

    /// Band along x; `Omega_i^x` groups regions by this value.
    pub fn x_band(self) -> Band {
        use RegionId::*;
        match self {
            Omega11 | Omega12 | Omega13 => Band::Lower,
            Omega21 | Omega22 | Omega23 => Band::Middle,
            Omega31 | Omega32 | Omega33 => Band::Upper,
        }
    }

    /// Band along y; `Omega_j^y` groups regions by this value.
    pub fn y_band(self) -> Band {
        use RegionId::*;
        match self {
            Omega11 | Omega21 | Omega31 => Band::Lower,
            Omega12 | Omega22 | Omega32 => Band::Middle,
            Omega13 | Omega23 | Omega33 => Band::Upper,
        }
    }

    /// Position in [`RegionId::ALL`].
    pub fn ordinal(self) -> usize {
        (self.y_band().index() - 1) * 3 + self.x_band().index() - 1
    }
}

impl std::fmt::Display for RegionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Omega{}{}", self.x_band().index(), self.y_band().index())
    }
}

/// Isotropic tensor-product Shishkin mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct ShishkinMesh {
    params: MeshParams,
    tau: f64,
    points: Vec<f64>,
    widths: Vec<f64>,
    /// Number of midpoint bisections applied to the mesh built from `params`.
    bisections: u32,
}

/// Builds the Shishkin mesh for `params`.
///
/// `tau = min(sigma sqrt(eps) ln N / beta, 1/4)`; large `eps` therefore gives a
/// uniform mesh. A `sigma` below `khat + 1` is accepted with a warning.
pub fn build_shishkin(params: MeshParams) -> Result<ShishkinMesh> {
    params.validate()?;
    if !params.sigma_is_theory_safe() {
        log::warn!(
            "sigma = {} is below khat + 1 = {} for degree {}",
            params.sigma,
            params.khat() + 1,
            params.degree
        );
    }
    let raw_tau = params.raw_tau();
    if raw_tau > 0.25 {
        log::debug!("transition point clamped to 1/4 (raw value {raw_tau:.4e}); mesh is uniform");
    }
    let tau = raw_tau.min(0.25);
    let n = params.n;
    let nf = n as f64;
    let points: Vec<f64> = (0..=n)
        .map(|i| {
            if i <= n / 4 {
                tau * ((4 * i) as f64 / nf)
            } else if i < 3 * n / 4 {
                tau + (1.0 - 2.0 * tau) * ((2 * i) as f64 / nf - 0.5)
            } else {
                // same value as the middle formula at i = 3N/4, but lands on 1 - tau exactly
                1.0 - 4.0 * tau * ((n - i) as f64 / nf)
            }
        })
        .collect();
    Ok(ShishkinMesh::from_parts(params, tau, points, 0))
}

impl ShishkinMesh {
    fn from_parts(params: MeshParams, tau: f64, points: Vec<f64>, bisections: u32) -> Self {
        let widths = points.windows(2).map(|w| w[1] - w[0]).collect();
        Self {
            params,
            tau,
            points,
            widths,
            bisections,
        }
    }

    pub fn params(&self) -> &MeshParams {
        &self.params
    }

    /// Intervals per axis.
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn bisections(&self) -> u32 {
        self.bisections
    }

    /// Mesh points `x_0 = 0 < ... < x_N = 1` (same in y).
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Element widths `h_1..h_N` stored 0-based.
    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Number of elements.
    pub fn num_elements(&self) -> usize {
        self.n() * self.n()
    }

    /// Fine width `4 tau / N`.
    pub fn fine_width(&self) -> f64 {
        4.0 * self.tau / self.n() as f64
    }

    /// Coarse width `2 (1 - 2 tau) / N`.
    pub fn coarse_width(&self) -> f64 {
        2.0 * (1.0 - 2.0 * self.tau) / self.n() as f64
    }

    /// Interval `(x_{i}, x_{i+1})` for the 0-based element index `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.points[i], self.points[i + 1])
    }

    /// Rectangle of the element with 0-based indices `(i, j)`.
    pub fn element_rect(&self, i: usize, j: usize) -> Rect {
        let (x0, x1) = self.interval(i);
        let (y0, y1) = self.interval(j);
        Rect { x0, x1, y0, y1 }
    }

    /// Subregion of the element `K_ij`, with 1-based `i, j`.
    pub fn classify(&self, i: usize, j: usize) -> Result<RegionId> {
        let n = self.n();
        for idx in [i, j] {
            if idx == 0 || idx > n {
                return Err(Error::OutOfRange { index: idx, max: n });
            }
        }
        Ok(RegionId::from_bands(
            Band::of_element(i, n),
            Band::of_element(j, n),
        ))
    }

    /// Region of the 0-based element `(i, j)`.
    pub fn region_of(&self, i: usize, j: usize) -> RegionId {
        let n = self.n();
        RegionId::from_bands(Band::of_element(i + 1, n), Band::of_element(j + 1, n))
    }

    /// 0-based index of the interval containing `t`. Points on interior mesh
    /// lines go to the element on their right unless `prefer_left` is set.
    pub fn locate(&self, t: f64, prefer_left: bool) -> Option<usize> {
        let n = self.n();
        if !(0.0..=1.0).contains(&t) {
            return None;
        }
        // first index with points[idx] > t (or >= t when preferring the left element)
        let idx = if prefer_left {
            self.points.partition_point(|&p| p < t)
        } else {
            self.points.partition_point(|&p| p <= t)
        };
        Some(idx.clamp(1, n) - 1)
    }

    /// Midpoint bisection: the mesh with `2N` intervals whose points are the
    /// old points plus the old midpoints. The transition point is unchanged.
    pub fn bisect(&self) -> ShishkinMesh {
        let mut points = Vec::with_capacity(2 * self.n() + 1);
        for w in self.points.windows(2) {
            points.push(w[0]);
            points.push(0.5 * (w[0] + w[1]));
        }
        points.push(*self.points.last().expect("mesh has points"));
        let params = MeshParams {
            n: 2 * self.params.n,
            ..self.params
        };
        ShishkinMesh::from_parts(params, self.tau, points, self.bisections + 1)
    }

    /// Whether `fine` is the midpoint bisection of `self`, up to `tol`.
    pub fn is_bisected_by(&self, fine: &ShishkinMesh, tol: f64) -> bool {
        if fine.n() != 2 * self.n() {
            return false;
        }
        self.points.windows(2).enumerate().all(|(i, w)| {
            (fine.points[2 * i] - w[0]).abs() <= tol
                && (fine.points[2 * i + 1] - 0.5 * (w[0] + w[1])).abs() <= tol
        }) && (fine.points[2 * self.n()] - 1.0).abs() <= tol
    }
}

/// Axis-aligned rectangle `(x0, x1) x (y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn hx(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn hy(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Physical point for reference coordinates `(xi, eta)` in `[-1, 1]^2`.
    pub fn map(&self, xi: f64, eta: f64) -> (f64, f64) {
        (
            0.5 * (self.x0 + self.x1) + 0.5 * self.hx() * xi,
            0.5 * (self.y0 + self.y1) + 0.5 * self.hy() * eta,
        )
    }

    /// Reference coordinates of a physical point.
    pub fn to_reference(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (2.0 * x - self.x0 - self.x1) / self.hx(),
            (2.0 * y - self.y0 - self.y1) / self.hy(),
        )
    }
}
