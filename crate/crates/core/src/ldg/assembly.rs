//! Element-by-element assembly of the LDG matrix.
//!
//! Volume couplings and all edge integrals use closed-form modal formulas;
//! only the `b`-weighted mass and the load vector use quadrature.

use std::sync::Arc;

use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;

use crate::dgspace::{local_dim, DofLayout};
use crate::error::{Error, Result};
use crate::fluxes::FluxTable;
use crate::mesh::ShishkinMesh;
use crate::polybasis::{
    default_quadrature_points, derivative_pairing, endpoint_value, gauss_legendre, QuadratureRule,
    Tabulation,
};

use super::ProblemSpec;

/// Quadrature settings for the `b`- and `f`-weighted integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Gauss points per direction.
    pub quad_points: usize,
}

impl AssemblyOptions {
    /// `max(5, k + 2)` points per direction.
    pub fn for_degree(degree: usize) -> Self {
        Self {
            quad_points: default_quadrature_points(degree),
        }
    }

    pub fn rule(&self) -> QuadratureRule {
        gauss_legendre(self.quad_points)
    }
}

/// Assembled LDG system `A x = rhs`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
    /// `|diag(A)|` with zeros replaced by one.
    pub scaling: Vec<f64>,
    pub layout: DofLayout,
    pub mesh: Arc<ShishkinMesh>,
    pub degree: usize,
    pub epsilon: f64,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::InconsistentDims(format!(
                "vector of length {} for a system of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let sym = self.matrix.symbolic();
        let col_ptr = sym.col_ptr();
        let row_idx = sym.row_idx();
        let val = self.matrix.val();
        let mut out = vec![0.0; self.dim()];
        for (c, &xc) in x.iter().enumerate() {
            for p in col_ptr[c]..col_ptr[c + 1] {
                out[row_idx[p]] += val[p] * xc;
            }
        }
        Ok(out)
    }

    /// `z^T A w`, which equals the bilinear form `B(w; z)`.
    pub fn bilinear(&self, w: &[f64], z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::InconsistentDims(format!(
                "vector of length {} for a system of dimension {}",
                z.len(),
                self.dim()
            )));
        }
        let aw = self.apply(w)?;
        Ok(aw.iter().zip(z).map(|(a, b)| a * b).sum())
    }

    /// Largest number of stored entries in any row.
    pub fn max_row_nnz(&self) -> usize {
        let mut counts = vec![0usize; self.dim()];
        for &r in self.matrix.symbolic().row_idx() {
            counts[r] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }
}

struct ElementGeometry {
    i: usize,
    j: usize,
    hx: f64,
    hy: f64,
}

/// Assembles the LDG system for `problem` on `mesh` with degree-`degree` elements.
pub fn assemble(
    problem: &ProblemSpec,
    mesh: &Arc<ShishkinMesh>,
    degree: usize,
    options: AssemblyOptions,
) -> Result<LinearSystem> {
    if mesh.params().degree != degree {
        return Err(Error::InconsistentDims(format!(
            "mesh built for degree {} but assembling degree {degree}",
            mesh.params().degree
        )));
    }
    if options.quad_points == 0 {
        return Err(Error::InvalidParam("quadrature needs at least one point".into()));
    }
    problem.validate()?;
    let n = mesh.n();
    let layout = DofLayout::new(n, degree);
    let table = FluxTable::layer_upwind(n);
    let rule = options.rule();
    let tab = Tabulation::new(degree, &rule);

    let per_element: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, f64)>)> = (0..n * n)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e % n, e / n);
            let rect = mesh.element_rect(i, j);
            let geo = ElementGeometry {
                i,
                j,
                hx: rect.hx(),
                hy: rect.hy(),
            };
            let mut entries = Vec::new();
            let mut loads = Vec::new();
            weighted_terms(problem, &rect, &geo, degree, &layout, &rule, &tab, &mut entries, &mut loads);
            coupling_terms(&geo, n, degree, problem.epsilon, &layout, &table, &mut entries);
            (entries, loads)
        })
        .collect();

    let dim = layout.total();
    let mut rhs = vec![0.0; dim];
    let mut triplets = Vec::new();
    for (entries, loads) in per_element {
        triplets.extend(entries);
        for (r, v) in loads {
            rhs[r] += v;
        }
    }
    let merged = merge_triplets(triplets);
    let mut scaling = vec![1.0; dim];
    for &(r, c, v) in &merged {
        if r == c && v != 0.0 {
            scaling[r] = v.abs();
        }
    }
    let trips: Vec<Triplet<usize, usize, f64>> =
        merged.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let matrix = SparseColMat::try_new_from_triplets(dim, dim, &trips)
        .map_err(|e| Error::InconsistentDims(format!("sparse matrix construction failed: {e:?}")))?;
    Ok(LinearSystem {
        matrix,
        rhs,
        scaling,
        layout,
        mesh: mesh.clone(),
        degree,
        epsilon: problem.epsilon,
    })
}

/// Sorts by (column, row) and sums duplicates, dropping exact zeros.
fn merge_triplets(mut t: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    t.sort_by_key(|&(r, c, _)| (c, r));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
    for (r, c, v) in t {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|&(_, _, v)| v != 0.0);
    out
}

/// `<b U, v>` and `<f, v>` by tensor Gauss quadrature.
#[allow(clippy::too_many_arguments)]
fn weighted_terms(
    problem: &ProblemSpec,
    rect: &crate::mesh::Rect,
    geo: &ElementGeometry,
    degree: usize,
    layout: &DofLayout,
    rule: &QuadratureRule,
    tab: &Tabulation,
    entries: &mut Vec<(usize, usize, f64)>,
    loads: &mut Vec<(usize, f64)>,
) {
    let dim = local_dim(degree);
    let kp = degree + 1;
    let jac = 0.25 * geo.hx * geo.hy;
    let mut mass = vec![0.0; dim * dim];
    let mut load = vec![0.0; dim];
    let mut phi = vec![0.0; dim];
    for (iy, (&eta, &wy)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        for (ix, (&xi, &wx)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let (x, y) = rect.map(xi, eta);
            let w = wx * wy * jac;
            let bw = w * (problem.b)(x, y);
            let fw = w * (problem.f)(x, y);
            for (idx, p) in phi.iter_mut().enumerate() {
                *p = tab.values[ix][idx % kp] * tab.values[iy][idx / kp];
            }
            for a in 0..dim {
                load[a] += fw * phi[a];
                let ba = bw * phi[a];
                for c in 0..dim {
                    mass[a * dim + c] += ba * phi[c];
                }
            }
        }
    }
    let (i, j) = (geo.i, geo.j);
    for a in 0..dim {
        let row = layout.index(0, i, j, a % kp, a / kp);
        loads.push((row, load[a]));
        for c in 0..dim {
            let col = layout.index(0, i, j, c % kp, c / kp);
            entries.push((row, col, mass[a * dim + c]));
        }
    }
}

/// Field indices in the layout.
const U: usize = 0;
const P: usize = 1;
const Q: usize = 2;

/// The `eps^{-1}` masses, derivative couplings and flux terms of one element.
fn coupling_terms(
    geo: &ElementGeometry,
    n: usize,
    degree: usize,
    epsilon: f64,
    layout: &DofLayout,
    table: &FluxTable,
    entries: &mut Vec<(usize, usize, f64)>,
) {
    let (i, j) = (geo.i, geo.j);
    let kp = degree + 1;
    let inv_eps = 1.0 / epsilon;
    for nn in 0..kp {
        for m in 0..kp {
            let norm_x = geo.hx / (2 * m + 1) as f64;
            let norm_y = geo.hy / (2 * nn + 1) as f64;
            let row_v = layout.index(U, i, j, m, nn);
            let row_s = layout.index(P, i, j, m, nn);
            let row_r = layout.index(Q, i, j, m, nn);

            entries.push((row_s, row_s, inv_eps * norm_x * norm_y));
            entries.push((row_r, row_r, inv_eps * norm_x * norm_y));

            // <P, v_x>, <U, s_x>, <Q, v_y>, <U, r_y>
            for a in 0..kp {
                let dx = derivative_pairing(a, m) * norm_y;
                if dx != 0.0 {
                    entries.push((row_v, layout.index(P, i, j, a, nn), dx));
                    entries.push((row_s, layout.index(U, i, j, a, nn), dx));
                }
                let dy = derivative_pairing(a, nn) * norm_x;
                if dy != 0.0 {
                    entries.push((row_v, layout.index(Q, i, j, m, a), dy));
                    entries.push((row_r, layout.index(U, i, j, m, a), dy));
                }
            }

            // x-lines: right line i+1 (test trace v^-), left line i (test trace v^+)
            let left_sign = endpoint_value(m, true);
            for (line, test_trace, sign) in [(i + 1, 1.0, -1.0), (i, left_sign, 1.0)] {
                let (pm, pp) = table.flux(line).weights();
                let (um, up) = table.primal(line).weights();
                for a in 0..kp {
                    let plus_trace = endpoint_value(a, true);
                    let coef = sign * test_trace * norm_y;
                    // minus side is element line-1, plus side is element line
                    if line >= 1 {
                        let col_p = layout.index(P, line - 1, j, a, nn);
                        let col_u = layout.index(U, line - 1, j, a, nn);
                        push(entries, row_v, col_p, coef * pm);
                        push(entries, row_s, col_u, coef * um);
                    }
                    if line < n {
                        let col_p = layout.index(P, line, j, a, nn);
                        let col_u = layout.index(U, line, j, a, nn);
                        push(entries, row_v, col_p, coef * pp * plus_trace);
                        push(entries, row_s, col_u, coef * up * plus_trace);
                    }
                }
            }

            // y-lines, same pattern with Q and the tangential x-modes
            let low_sign = endpoint_value(nn, true);
            for (line, test_trace, sign) in [(j + 1, 1.0, -1.0), (j, low_sign, 1.0)] {
                let (qm, qp) = table.flux(line).weights();
                let (um, up) = table.primal(line).weights();
                for a in 0..kp {
                    let plus_trace = endpoint_value(a, true);
                    let coef = sign * test_trace * norm_x;
                    if line >= 1 {
                        let col_q = layout.index(Q, i, line - 1, m, a);
                        let col_u = layout.index(U, i, line - 1, m, a);
                        push(entries, row_v, col_q, coef * qm);
                        push(entries, row_r, col_u, coef * um);
                    }
                    if line < n {
                        let col_q = layout.index(Q, i, line, m, a);
                        let col_u = layout.index(U, i, line, m, a);
                        push(entries, row_v, col_q, coef * qp * plus_trace);
                        push(entries, row_r, col_u, coef * up * plus_trace);
                    }
                }
            }
        }
    }
}

fn push(entries: &mut Vec<(usize, usize, f64)>, row: usize, col: usize, v: f64) {
    if v != 0.0 {
        entries.push((row, col, v));
    }
}
