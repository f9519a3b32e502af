//! Local projectors onto polynomials: the L2 projector, the two Gauss-Radau
//! projectors, their tensor products on rectangles, the region-dispatched
//! composites used for error analysis, and a b-weighted L2 projector.
//!
//! All results are modal Legendre coefficients in the element layout of
//! [`crate::dgspace`] (`index = n (k + 1) + m`, `m` the x-degree).
//!
//! Radau projectors need point values at element endpoints, so inputs must be
//! finite on the closed element; anything else is rejected.

use std::sync::Arc;

use faer::{Mat, Side};
use rayon::prelude::*;

use crate::dgspace::{local_dim, DgScalarField};
use crate::error::{Error, Result};
use crate::mesh::{Band, Rect, RegionId, ShishkinMesh};
use crate::polybasis::{endpoint_value, gauss_legendre, legendre_values, QuadratureRule};
use crate::ScalarFn;

/// Largest accepted condition number of a mass-normalized weighted Gram matrix.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Default number of Gauss points per direction for projections: `k + 3`.
pub fn default_projection_points(degree: usize) -> usize {
    degree + 3
}

/// One-dimensional projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Projector1D {
    /// L2 projection.
    L2,
    /// Moments up to degree `k - 1` plus the value at the left endpoint.
    RadauPlus,
    /// Moments up to degree `k - 1` plus the value at the right endpoint.
    RadauMinus,
}

/// Projector on a rectangle.
#[derive(Clone)]
pub enum ProjectorKind {
    /// L2 projection.
    Pi,
    /// Left Radau in x, L2 in y.
    PixPlus,
    /// Right Radau in x, L2 in y.
    PixMinus,
    /// L2 in x, lower Radau in y.
    PiyPlus,
    /// L2 in x, upper Radau in y.
    PiyMinus,
    /// Left Radau in x, lower Radau in y.
    PixyPP,
    /// Left Radau in x, upper Radau in y.
    PixyPM,
    /// Right Radau in x, lower Radau in y.
    PixyMP,
    /// Right Radau in x, upper Radau in y.
    PixyMM,
    /// L2 projection weighted by the given positive coefficient.
    Weighted(ScalarFn),
}

impl std::fmt::Debug for ProjectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ProjectorKind::Pi => "Pi",
            ProjectorKind::PixPlus => "PixPlus",
            ProjectorKind::PixMinus => "PixMinus",
            ProjectorKind::PiyPlus => "PiyPlus",
            ProjectorKind::PiyMinus => "PiyMinus",
            ProjectorKind::PixyPP => "PixyPP",
            ProjectorKind::PixyPM => "PixyPM",
            ProjectorKind::PixyMP => "PixyMP",
            ProjectorKind::PixyMM => "PixyMM",
            ProjectorKind::Weighted(_) => "Weighted",
        };
        f.write_str(name)
    }
}

impl ProjectorKind {
    /// The nine tensor-product kinds.
    pub fn tensor_kinds() -> [ProjectorKind; 9] {
        use ProjectorKind::*;
        [
            Pi, PixPlus, PixMinus, PiyPlus, PiyMinus, PixyPP, PixyPM, PixyMP, PixyMM,
        ]
    }

    /// The 1D factors `(x, y)`, or `None` for the weighted projector.
    pub fn factors(&self) -> Option<(Projector1D, Projector1D)> {
        use Projector1D::*;
        Some(match self {
            ProjectorKind::Pi => (L2, L2),
            ProjectorKind::PixPlus => (RadauPlus, L2),
            ProjectorKind::PixMinus => (RadauMinus, L2),
            ProjectorKind::PiyPlus => (L2, RadauPlus),
            ProjectorKind::PiyMinus => (L2, RadauMinus),
            ProjectorKind::PixyPP => (RadauPlus, RadauPlus),
            ProjectorKind::PixyPM => (RadauPlus, RadauMinus),
            ProjectorKind::PixyMP => (RadauMinus, RadauPlus),
            ProjectorKind::PixyMM => (RadauMinus, RadauMinus),
            ProjectorKind::Weighted(_) => return None,
        })
    }
}

/// Region-dispatched composite projectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Composite {
    /// Used for `u`: Radau towards the interior in every layer region.
    I,
    /// Used for `p`: x-Radau towards the boundary in the x-layers, L2 elsewhere.
    J,
    /// Used for `q`: the y-analogue of `J`.
    K,
}

impl Composite {
    /// Projector applied on elements of `region`.
    pub fn kind_for(self, region: RegionId) -> ProjectorKind {
        use ProjectorKind::*;
        match self {
            Composite::I => match (region.x_band(), region.y_band()) {
                (Band::Lower, Band::Lower) => PixyMM,
                (Band::Middle, Band::Lower) => PiyMinus,
                (Band::Upper, Band::Lower) => PixyPM,
                (Band::Lower, Band::Middle) => PixMinus,
                (Band::Middle, Band::Middle) => Pi,
                (Band::Upper, Band::Middle) => PixPlus,
                (Band::Lower, Band::Upper) => PixyMP,
                (Band::Middle, Band::Upper) => PiyPlus,
                (Band::Upper, Band::Upper) => PixyPP,
            },
            Composite::J => match region.x_band() {
                Band::Lower => PixPlus,
                Band::Middle => Pi,
                Band::Upper => PixMinus,
            },
            Composite::K => match region.y_band() {
                Band::Lower => PiyPlus,
                Band::Middle => Pi,
                Band::Upper => PiyMinus,
            },
        }
    }
}

/// Applies a 1D projector to samples on `[-1, 1]`.
///
/// `values[i]` is the datum at `rule.nodes[i]`; `left`, `right` at `-1`, `1`.
pub fn project_samples_1d(
    kind: Projector1D,
    degree: usize,
    rule: &QuadratureRule,
    values: &[f64],
    left: f64,
    right: f64,
) -> Vec<f64> {
    let mut coeffs = vec![0.0; degree + 1];
    for ((&s, &w), &z) in rule.nodes.iter().zip(&rule.weights).zip(values) {
        let l = legendre_values(degree, s);
        for (c, lm) in coeffs.iter_mut().zip(&l) {
            *c += w * z * lm;
        }
    }
    for (m, c) in coeffs.iter_mut().enumerate() {
        *c *= 0.5 * (2 * m + 1) as f64;
    }
    match kind {
        Projector1D::L2 => {}
        Projector1D::RadauMinus => {
            let partial: f64 = coeffs[..degree].iter().sum();
            coeffs[degree] = right - partial;
        }
        Projector1D::RadauPlus => {
            let partial: f64 = coeffs[..degree]
                .iter()
                .enumerate()
                .map(|(m, c)| endpoint_value(m, true) * c)
                .sum();
            coeffs[degree] = endpoint_value(degree, true) * (left - partial);
        }
    }
    coeffs
}

fn require_finite(v: f64, what: &str, at: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParam(format!(
            "{what} is not finite at {at}; Radau projection needs endpoint values"
        )))
    }
}

/// Projects `z` on the interval `(a, b)` onto degree-`degree` Legendre modes.
pub fn project_1d(
    kind: Projector1D,
    z: impl Fn(f64) -> f64,
    degree: usize,
    interval: (f64, f64),
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let (a, b) = interval;
    if !(b > a) {
        return Err(Error::InvalidParam(format!("empty interval ({a}, {b})")));
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let values: Vec<f64> = rule.nodes.iter().map(|&s| z(mid + half * s)).collect();
    let (left, right) = match kind {
        Projector1D::L2 => (0.0, 0.0),
        _ => (
            require_finite(z(a), "datum", a)?,
            require_finite(z(b), "datum", b)?,
        ),
    };
    Ok(project_samples_1d(kind, degree, rule, &values, left, right))
}

/// Projects `z` on `rect`; returns `(k + 1)^2` coefficients.
///
/// Tensor kinds apply the y-projector to samples on lines of constant x
/// (quadrature nodes and both endpoints), then the x-projector to the
/// resulting coefficient profiles.
pub fn project_2d(
    kind: &ProjectorKind,
    z: impl Fn(f64, f64) -> f64,
    rect: &Rect,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let Some((px, py)) = kind.factors() else {
        let ProjectorKind::Weighted(b) = kind else {
            unreachable!("only the weighted kind lacks tensor factors")
        };
        return project_weighted(|x, y| b(x, y), z, rect, degree, rule);
    };
    let nq = rule.len();
    // sample abscissae: quadrature nodes, then -1, then 1
    let mut points = rule.nodes.clone();
    points.push(-1.0);
    points.push(1.0);

    let mut profiles = vec![vec![0.0; points.len()]; degree + 1];
    for (ia, &xi) in points.iter().enumerate() {
        let samples: Vec<f64> = points
            .iter()
            .map(|&eta| {
                let (x, y) = rect.map(xi, eta);
                z(x, y)
            })
            .collect();
        let endpoint_needed = px != Projector1D::L2 && ia >= nq;
        for &v in &samples[..nq] {
            require_finite(v, "datum", xi)?;
        }
        if py != Projector1D::L2 || endpoint_needed {
            require_finite(samples[nq], "datum", -1.0)?;
            require_finite(samples[nq + 1], "datum", 1.0)?;
        }
        let cy = project_samples_1d(py, degree, rule, &samples[..nq], samples[nq], samples[nq + 1]);
        for (n, c) in cy.into_iter().enumerate() {
            profiles[n][ia] = c;
        }
    }

    let mut out = vec![0.0; local_dim(degree)];
    for (n, prof) in profiles.iter().enumerate() {
        let cx = project_samples_1d(px, degree, rule, &prof[..nq], prof[nq], prof[nq + 1]);
        out[n * (degree + 1)..(n + 1) * (degree + 1)].copy_from_slice(&cx);
    }
    Ok(out)
}

/// Like [`project_2d`] with an `n`-point rule, failing with
/// `QuadratureInsufficient` when an `n + 2`-point rule changes any
/// coefficient by more than `tolerance` (relative to the largest one).
pub fn project_2d_checked(
    kind: &ProjectorKind,
    z: impl Fn(f64, f64) -> f64,
    rect: &Rect,
    degree: usize,
    points: usize,
    tolerance: f64,
) -> Result<Vec<f64>> {
    let coarse = project_2d(kind, &z, rect, degree, &gauss_legendre(points))?;
    let fine = project_2d(kind, &z, rect, degree, &gauss_legendre(points + 2))?;
    let scale = fine.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let discrepancy = coarse
        .iter()
        .zip(&fine)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale;
    if discrepancy > tolerance {
        Err(Error::QuadratureInsufficient {
            points,
            discrepancy,
        })
    } else {
        Ok(coarse)
    }
}

/// Weighted L2 projection: `<b P z, v> = <b z, v>` for all `v` in `Q^k(rect)`.
pub fn project_weighted(
    b: impl Fn(f64, f64) -> f64,
    z: impl Fn(f64, f64) -> f64,
    rect: &Rect,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let dim = local_dim(degree);
    let tab: Vec<Vec<f64>> = rule.nodes.iter().map(|&s| legendre_values(degree, s)).collect();
    // basis scaled to unit reference mass so conditioning reflects b only
    let scale: Vec<f64> = (0..dim)
        .map(|idx| {
            let (m, n) = (idx % (degree + 1), idx / (degree + 1));
            (0.25 * ((2 * m + 1) * (2 * n + 1)) as f64).sqrt()
        })
        .collect();
    let mut gram = Mat::<f64>::zeros(dim, dim);
    let mut rhs = vec![0.0; dim];
    let mut phi = vec![0.0; dim];
    for (iy, (&eta, &wy)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        for (ix, (&xi, &wx)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let (x, y) = rect.map(xi, eta);
            let bw = b(x, y);
            let zv = z(x, y);
            if !(bw.is_finite() && zv.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "non-finite coefficient or datum at ({x}, {y})"
                )));
            }
            let w = wx * wy * bw;
            for (idx, p) in phi.iter_mut().enumerate() {
                *p = scale[idx] * tab[ix][idx % (degree + 1)] * tab[iy][idx / (degree + 1)];
            }
            for a in 0..dim {
                rhs[a] += w * zv * phi[a];
                for c in 0..dim {
                    gram[(a, c)] += w * phi[a] * phi[c];
                }
            }
        }
    }
    let eig = gram
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::SingularGram {
            condition: f64::INFINITY,
        })?;
    let s = eig.S().column_vector();
    let (lo, hi) = (0..dim).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
        (lo.min(s[i]), hi.max(s[i].abs()))
    });
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= GRAM_CONDITION_LIMIT) {
        return Err(Error::SingularGram { condition });
    }
    let u = eig.U();
    let mut out = vec![0.0; dim];
    for e in 0..dim {
        let proj: f64 = (0..dim).map(|a| u[(a, e)] * rhs[a]).sum::<f64>() / s[e];
        for (a, o) in out.iter_mut().enumerate() {
            *o += u[(a, e)] * proj;
        }
    }
    for (o, sc) in out.iter_mut().zip(&scale) {
        *o *= sc;
    }
    Ok(out)
}

/// Applies `kind` on every element of `mesh`.
pub fn project_field(
    kind: &ProjectorKind,
    z: &(dyn Fn(f64, f64) -> f64 + Sync),
    mesh: &Arc<ShishkinMesh>,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<DgScalarField> {
    project_by_element(|_| kind.clone(), z, mesh, degree, rule)
}

/// Applies the composite projector `which` on every element of `mesh`.
pub fn composite_project(
    which: Composite,
    z: &(dyn Fn(f64, f64) -> f64 + Sync),
    mesh: &Arc<ShishkinMesh>,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<DgScalarField> {
    project_by_element(|region| which.kind_for(region), z, mesh, degree, rule)
}

fn project_by_element(
    select: impl Fn(RegionId) -> ProjectorKind + Sync,
    z: &(dyn Fn(f64, f64) -> f64 + Sync),
    mesh: &Arc<ShishkinMesh>,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<DgScalarField> {
    let n = mesh.n();
    let blocks: Vec<Vec<f64>> = (0..n * n)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e % n, e / n);
            let kind = select(mesh.region_of(i, j));
            project_2d(&kind, z, &mesh.element_rect(i, j), degree, rule)
        })
        .collect::<Result<_>>()?;
    DgScalarField::from_coeffs(mesh.clone(), degree, blocks.concat())
}
