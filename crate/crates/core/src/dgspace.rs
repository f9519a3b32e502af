//! Discontinuous piecewise-`Q^k` fields on a Shishkin mesh.
//!
//! Coefficient layout (the solver's unknown ordering depends on it):
//! element index `e = j * N + i` for the 0-based element `(i, j)`, then the
//! y-degree `n`, then the x-degree `m`; so the coefficient of
//! `l_m(x) l_n(y)` on element `e` sits at `e (k+1)^2 + n (k+1) + m`.
//! Triples are stored field-major: all of `U`, then `P`, then `Q`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{build_shishkin, ShishkinMesh};
use crate::polybasis::{endpoint_value, gauss_legendre, legendre_derivatives, legendre_values};

/// Coordinate direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Which one-sided limit to take on a mesh line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// From below / the left.
    Minus,
    /// From above / the right.
    Plus,
}

/// Edge of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeSide {
    Left,
    Right,
    Bottom,
    Top,
}

impl EdgeSide {
    /// Edges normal to `axis`: (low, high).
    pub fn pair(axis: Axis) -> (EdgeSide, EdgeSide) {
        match axis {
            Axis::X => (EdgeSide::Left, EdgeSide::Right),
            Axis::Y => (EdgeSide::Bottom, EdgeSide::Top),
        }
    }
}

/// Number of local coefficients `(k+1)^2`.
pub fn local_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// Offset of `l_m(x) l_n(y)` inside an element block.
#[inline]
pub fn local_index(degree: usize, m: usize, n: usize) -> usize {
    n * (degree + 1) + m
}

/// Global ordering of the unknowns of a triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofLayout {
    pub n: usize,
    pub degree: usize,
}

impl DofLayout {
    pub fn new(n: usize, degree: usize) -> Self {
        Self { n, degree }
    }

    pub fn field_len(&self) -> usize {
        self.n * self.n * local_dim(self.degree)
    }

    /// `3 N^2 (k+1)^2`.
    pub fn total(&self) -> usize {
        3 * self.field_len()
    }

    pub fn element(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Global index of `(field, element (i,j), m, n)`; `field` is 0 for U, 1 for P, 2 for Q.
    #[inline]
    pub fn index(&self, field: usize, i: usize, j: usize, m: usize, n: usize) -> usize {
        field * self.field_len()
            + self.element(i, j) * local_dim(self.degree)
            + local_index(self.degree, m, n)
    }
}

/// Member of the discontinuous space `V_N` of degree `k`.
#[derive(Clone, Debug)]
pub struct DgScalarField {
    mesh: Arc<ShishkinMesh>,
    degree: usize,
    coeffs: Vec<f64>,
}

impl PartialEq for DgScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.coeffs == other.coeffs && *self.mesh == *other.mesh
    }
}

impl DgScalarField {
    pub fn zeros(mesh: Arc<ShishkinMesh>, degree: usize) -> Self {
        let len = mesh.num_elements() * local_dim(degree);
        Self {
            mesh,
            degree,
            coeffs: vec![0.0; len],
        }
    }

    pub fn from_coeffs(mesh: Arc<ShishkinMesh>, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = mesh.num_elements() * local_dim(degree);
        if coeffs.len() != expected {
            return Err(Error::InconsistentDims(format!(
                "field needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self {
            mesh,
            degree,
            coeffs,
        })
    }

    /// Field with `c[m][n]` given per element by `f(i, j, m, n)`.
    pub fn from_modal_fn(
        mesh: Arc<ShishkinMesh>,
        degree: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let n_el = mesh.n();
        let mut coeffs = Vec::with_capacity(mesh.num_elements() * local_dim(degree));
        for j in 0..n_el {
            for i in 0..n_el {
                for n in 0..=degree {
                    for m in 0..=degree {
                        coeffs.push(f(i, j, m, n));
                    }
                }
            }
        }
        Self {
            mesh,
            degree,
            coeffs,
        }
    }

    pub fn mesh(&self) -> &Arc<ShishkinMesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    fn block(&self, i: usize, j: usize) -> std::ops::Range<usize> {
        let ld = local_dim(self.degree);
        let e = j * self.mesh.n() + i;
        e * ld..(e + 1) * ld
    }

    /// Coefficients of the 0-based element `(i, j)`.
    pub fn element_coeffs(&self, i: usize, j: usize) -> &[f64] {
        &self.coeffs[self.block(i, j)]
    }

    pub fn element_coeffs_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let r = self.block(i, j);
        &mut self.coeffs[r]
    }

    /// Value at reference coordinates `(xi, eta)` of element `(i, j)`.
    pub fn eval_local(&self, i: usize, j: usize, xi: f64, eta: f64) -> f64 {
        let lx = legendre_values(self.degree, xi);
        let ly = legendre_values(self.degree, eta);
        self.sum_with(i, j, &lx, &ly)
    }

    /// Value with pre-tabulated basis values in x and y.
    pub fn sum_with(&self, i: usize, j: usize, lx: &[f64], ly: &[f64]) -> f64 {
        let c = self.element_coeffs(i, j);
        let kp = self.degree + 1;
        ly.iter()
            .enumerate()
            .map(|(n, &vy)| {
                let row = &c[n * kp..(n + 1) * kp];
                vy * row.iter().zip(lx).map(|(a, b)| a * b).sum::<f64>()
            })
            .sum()
    }

    /// Physical gradient at reference coordinates of element `(i, j)`.
    pub fn grad_local(&self, i: usize, j: usize, xi: f64, eta: f64) -> (f64, f64) {
        let rect = self.mesh.element_rect(i, j);
        let lx = legendre_values(self.degree, xi);
        let ly = legendre_values(self.degree, eta);
        let dx = legendre_derivatives(self.degree, xi);
        let dy = legendre_derivatives(self.degree, eta);
        (
            self.sum_with(i, j, &dx, &ly) * 2.0 / rect.hx(),
            self.sum_with(i, j, &lx, &dy) * 2.0 / rect.hy(),
        )
    }

    /// Point value; points on mesh lines are taken from the element above/right
    /// of the line (or below/left at `x = 1`, `y = 1`).
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_sided(x, y, Side::Plus, Side::Plus)
    }

    /// Point value with explicit one-sided limits on mesh lines.
    pub fn eval_sided(&self, x: f64, y: f64, x_side: Side, y_side: Side) -> Result<f64> {
        let i = self
            .mesh
            .locate(x, x_side == Side::Minus)
            .ok_or(Error::OutOfDomain { x, y })?;
        let j = self
            .mesh
            .locate(y, y_side == Side::Minus)
            .ok_or(Error::OutOfDomain { x, y })?;
        let (xi, eta) = self.mesh.element_rect(i, j).to_reference(x, y);
        Ok(self.eval_local(i, j, xi, eta))
    }

    /// Modal coefficients (tangential Legendre basis) of the trace on one edge of `(i, j)`.
    pub fn trace(&self, i: usize, j: usize, side: EdgeSide) -> Vec<f64> {
        let c = self.element_coeffs(i, j);
        let k = self.degree;
        let mut out = vec![0.0; k + 1];
        for n in 0..=k {
            for m in 0..=k {
                let v = c[local_index(k, m, n)];
                match side {
                    EdgeSide::Right => out[n] += v,
                    EdgeSide::Left => out[n] += endpoint_value(m, true) * v,
                    EdgeSide::Top => out[m] += v,
                    EdgeSide::Bottom => out[m] += endpoint_value(n, true) * v,
                }
            }
        }
        out
    }

    /// One-sided traces `(v^-, v^+)` on segment `line` of mesh line `interface`
    /// normal to `axis`; `None` where the side lies outside the domain.
    pub fn one_sided_traces(
        &self,
        axis: Axis,
        interface: usize,
        line: usize,
    ) -> Result<(Option<Vec<f64>>, Option<Vec<f64>>)> {
        let n = self.mesh.n();
        if interface > n {
            return Err(Error::OutOfRange {
                index: interface,
                max: n,
            });
        }
        if line >= n {
            return Err(Error::OutOfRange {
                index: line,
                max: n - 1,
            });
        }
        let (low, high) = EdgeSide::pair(axis);
        let elem = |a: usize| match axis {
            Axis::X => (a, line),
            Axis::Y => (line, a),
        };
        let minus = (interface > 0).then(|| {
            let (i, j) = elem(interface - 1);
            self.trace(i, j, high)
        });
        let plus = (interface < n).then(|| {
            let (i, j) = elem(interface);
            self.trace(i, j, low)
        });
        Ok((minus, plus))
    }

    fn edge_interval(&self, line: usize) -> (f64, f64) {
        self.mesh.interval(line)
    }

    /// Jump `v^+ - v^-`, with `v^+` at the first mesh line and `-v^-` at the last.
    pub fn jump(&self, axis: Axis, interface: usize, line: usize) -> Result<EdgeTrace> {
        let (minus, plus) = self.one_sided_traces(axis, interface, line)?;
        let k = self.degree;
        let coeffs = match (minus, plus) {
            (Some(a), Some(b)) => b.iter().zip(&a).map(|(p, m)| p - m).collect(),
            (None, Some(b)) => b,
            (Some(a), None) => a.iter().map(|v| -v).collect(),
            (None, None) => vec![0.0; k + 1],
        };
        Ok(EdgeTrace {
            axis,
            interface,
            line,
            interval: self.edge_interval(line),
            coeffs,
        })
    }

    /// Average `(v^+ + v^-)/2`, with the one-sided trace on the boundary.
    pub fn average(&self, axis: Axis, interface: usize, line: usize) -> Result<EdgeTrace> {
        let (minus, plus) = self.one_sided_traces(axis, interface, line)?;
        let k = self.degree;
        let coeffs = match (minus, plus) {
            (Some(a), Some(b)) => b.iter().zip(&a).map(|(p, m)| 0.5 * (p + m)).collect(),
            (None, Some(b)) => b,
            (Some(a), None) => a,
            (None, None) => vec![0.0; k + 1],
        };
        Ok(EdgeTrace {
            axis,
            interface,
            line,
            interval: self.edge_interval(line),
            coeffs,
        })
    }

    /// Re-expands the field on the midpoint bisection `fine` of its mesh.
    pub fn refine_to(&self, fine: Arc<ShishkinMesh>) -> Result<DgScalarField> {
        if !self.mesh.is_bisected_by(&fine, 1e-15) {
            return Err(Error::MeshNotNested(
                "target mesh is not the bisection of the field's mesh".into(),
            ));
        }
        let k = self.degree;
        let rule = gauss_legendre(k + 1);
        let tab: Vec<Vec<f64>> = rule.nodes.iter().map(|&s| legendre_values(k, s)).collect();
        let mut out = DgScalarField::zeros(fine, k);
        for jc in 0..out.mesh.n() {
            for ic in 0..out.mesh.n() {
                // child reference node s maps to parent coordinate (s + offset)/2
                let off_x = if ic % 2 == 0 { -1.0 } else { 1.0 };
                let off_y = if jc % 2 == 0 { -1.0 } else { 1.0 };
                let mut local = vec![0.0; local_dim(k)];
                for (qy, (&sy, &wy)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                    for (qx, (&sx, &wx)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                        let v = self.eval_local(ic / 2, jc / 2, 0.5 * (sx + off_x), 0.5 * (sy + off_y));
                        for n in 0..=k {
                            for m in 0..=k {
                                local[local_index(k, m, n)] +=
                                    wx * wy * v * tab[qx][m] * tab[qy][n];
                            }
                        }
                    }
                }
                let c = out.element_coeffs_mut(ic, jc);
                for n in 0..=k {
                    for m in 0..=k {
                        let idx = local_index(k, m, n);
                        c[idx] = local[idx] * ((2 * m + 1) * (2 * n + 1)) as f64 / 4.0;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Serialisable snapshot of this field.
    pub fn to_dump(&self, name: &str) -> FieldDump {
        let p = self.mesh.params();
        FieldDump {
            name: name.to_string(),
            n: p.n,
            degree: self.degree,
            mesh_degree: p.degree,
            epsilon: p.epsilon,
            sigma: p.sigma,
            beta: p.beta,
            tau: self.mesh.tau(),
            bisections: self.mesh.bisections(),
            layout: LAYOUT_TAG.to_string(),
            coeffs: self.coeffs.clone(),
        }
    }

    /// Rebuilds a field from a dump; the mesh is reconstructed from the header.
    pub fn from_dump(dump: &FieldDump) -> Result<Self> {
        if dump.layout != LAYOUT_TAG {
            return Err(Error::InvalidParam(format!(
                "unsupported coefficient layout '{}'",
                dump.layout
            )));
        }
        let base_n = dump.n >> dump.bisections;
        let mut mesh = build_shishkin(crate::mesh::MeshParams::new(
            base_n,
            dump.epsilon,
            dump.sigma,
            dump.beta,
            dump.mesh_degree,
        ))?;
        for _ in 0..dump.bisections {
            mesh = mesh.bisect();
        }
        if mesh.n() != dump.n || (mesh.tau() - dump.tau).abs() > 1e-15 {
            return Err(Error::InconsistentDims(
                "dump header does not reproduce its mesh".into(),
            ));
        }
        DgScalarField::from_coeffs(Arc::new(mesh), dump.degree, dump.coeffs.clone())
    }
}

impl DgScalarField {
    /// `self + alpha * other` on the same mesh.
    pub fn axpy(&self, alpha: f64, other: &DgScalarField) -> Result<DgScalarField> {
        if self.degree != other.degree || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::InconsistentDims("fields differ in shape".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(DgScalarField {
            mesh: self.mesh.clone(),
            degree: self.degree,
            coeffs,
        })
    }
}

const LAYOUT_TAG: &str = "element=j*N+i;y-degree;x-degree";

/// JSON snapshot of a field: header plus coefficients in the documented layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDump {
    pub name: String,
    pub n: usize,
    pub degree: usize,
    /// Degree the mesh was built for (it fixes `k-hat` in the transition point).
    pub mesh_degree: usize,
    pub epsilon: f64,
    pub sigma: f64,
    pub beta: f64,
    pub tau: f64,
    pub bisections: u32,
    pub layout: String,
    pub coeffs: Vec<f64>,
}

/// Edge polynomial in the tangential Legendre basis of one mesh-line segment.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTrace {
    /// Normal direction of the mesh line.
    pub axis: Axis,
    /// Mesh-line index `0..=N`.
    pub interface: usize,
    /// 0-based segment index along the line.
    pub line: usize,
    /// Physical extent of the segment.
    pub interval: (f64, f64),
    pub coeffs: Vec<f64>,
}

impl EdgeTrace {
    /// Value at the physical tangential coordinate `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = self.interval;
        let s = (2.0 * t - a - b) / (b - a);
        legendre_values(self.coeffs.len() - 1, s)
            .iter()
            .zip(&self.coeffs)
            .map(|(l, c)| l * c)
            .sum()
    }

    /// Inner product with another trace on the same segment (diagonal in the modal basis).
    pub fn inner(&self, other: &EdgeTrace) -> f64 {
        let h = self.interval.1 - self.interval.0;
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(n, (a, b))| a * b * h / (2 * n + 1) as f64)
            .sum()
    }
}

/// The discrete triple `(U, P, Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DgTriple {
    pub u: DgScalarField,
    pub p: DgScalarField,
    pub q: DgScalarField,
}

impl DgTriple {
    pub fn new(u: DgScalarField, p: DgScalarField, q: DgScalarField) -> Result<Self> {
        let same = |a: &DgScalarField, b: &DgScalarField| {
            a.degree == b.degree && (Arc::ptr_eq(&a.mesh, &b.mesh) || *a.mesh == *b.mesh)
        };
        if !same(&u, &p) || !same(&u, &q) {
            return Err(Error::InconsistentDims(
                "triple components must share mesh and degree".into(),
            ));
        }
        Ok(Self { u, p, q })
    }

    pub fn zeros(mesh: Arc<ShishkinMesh>, degree: usize) -> Self {
        Self {
            u: DgScalarField::zeros(mesh.clone(), degree),
            p: DgScalarField::zeros(mesh.clone(), degree),
            q: DgScalarField::zeros(mesh, degree),
        }
    }

    pub fn mesh(&self) -> &Arc<ShishkinMesh> {
        self.u.mesh()
    }

    pub fn degree(&self) -> usize {
        self.u.degree()
    }

    pub fn layout(&self) -> DofLayout {
        DofLayout::new(self.mesh().n(), self.degree())
    }

    pub fn fields(&self) -> [&DgScalarField; 3] {
        [&self.u, &self.p, &self.q]
    }

    /// Field-major coefficient vector.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layout().total());
        for f in self.fields() {
            out.extend_from_slice(f.coeffs());
        }
        out
    }

    pub fn from_vector(mesh: Arc<ShishkinMesh>, degree: usize, v: &[f64]) -> Result<Self> {
        let layout = DofLayout::new(mesh.n(), degree);
        if v.len() != layout.total() {
            return Err(Error::InconsistentDims(format!(
                "triple needs {} coefficients, got {}",
                layout.total(),
                v.len()
            )));
        }
        let len = layout.field_len();
        Ok(Self {
            u: DgScalarField::from_coeffs(mesh.clone(), degree, v[..len].to_vec())?,
            p: DgScalarField::from_coeffs(mesh.clone(), degree, v[len..2 * len].to_vec())?,
            q: DgScalarField::from_coeffs(mesh, degree, v[2 * len..].to_vec())?,
        })
    }

    pub fn refine_to(&self, fine: Arc<ShishkinMesh>) -> Result<DgTriple> {
        Ok(DgTriple {
            u: self.u.refine_to(fine.clone())?,
            p: self.p.refine_to(fine.clone())?,
            q: self.q.refine_to(fine)?,
        })
    }

    pub fn to_dumps(&self) -> [FieldDump; 3] {
        [
            self.u.to_dump("U"),
            self.p.to_dump("P"),
            self.q.to_dump("Q"),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::MeshParams;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh(n: usize) -> Arc<ShishkinMesh> {
        Arc::new(build_shishkin(MeshParams::new(n, 1e-4, 2.0, 1.0, 2)).unwrap())
    }

    fn random_field(mesh: Arc<ShishkinMesh>, k: usize, seed: u64) -> DgScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DgScalarField::from_modal_fn(mesh, k, |_, _, _, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn layout_sizes() {
        let m = mesh(8);
        let f = DgScalarField::zeros(m.clone(), 2);
        assert_eq!(f.coeffs().len(), 64 * 9);
        let layout = DofLayout::new(8, 2);
        assert_eq!(layout.total(), 3 * 64 * 9);
        assert_eq!(layout.index(1, 3, 2, 1, 2), 64 * 9 + (2 * 8 + 3) * 9 + 2 * 3 + 1);
        assert!(DgScalarField::from_coeffs(m, 2, vec![0.0; 5]).is_err());
    }

    #[test]
    fn constant_field_evaluates_to_one() {
        let f = DgScalarField::from_modal_fn(mesh(8), 1, |_, _, m, n| {
            if m == 0 && n == 0 {
                1.0
            } else {
                0.0
            }
        });
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.77), (1.0, 1.0), (0.5, 0.001)] {
            assert_relative_eq!(f.eval(x, y).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert!(matches!(f.eval(1.2, 0.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn linear_interpolant_on_uniform_mesh() {
        // tau clamps to 1/4 for eps = 1: uniform mesh; x = mid + (h/2) l_1 on each element
        let m = Arc::new(build_shishkin(MeshParams::new(8, 1.0, 1.0, 1.0, 1)).unwrap());
        let f = DgScalarField::from_modal_fn(m.clone(), 1, |i, _, mm, nn| {
            let (a, b) = m.interval(i);
            match (mm, nn) {
                (0, 0) => 0.5 * (a + b),
                (1, 0) => 0.5 * (b - a),
                _ => 0.0,
            }
        });
        assert_relative_eq!(f.eval(0.25, 0.6).unwrap(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(f.eval(0.61, 0.1).unwrap(), 0.61, epsilon = 1e-15);
    }

    #[test]
    fn right_edge_value_of_first_mode() {
        let m = mesh(8);
        let f = DgScalarField::from_modal_fn(m.clone(), 2, |i, j, mm, nn| {
            if i == 0 && j == 0 && mm == 1 && nn == 0 {
                1.0
            } else {
                0.0
            }
        });
        let r = m.element_rect(0, 0);
        let v = f
            .eval_sided(r.x1, 0.5 * (r.y0 + r.y1), Side::Minus, Side::Plus)
            .unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn jumps_and_averages() {
        let m = mesh(8);
        // piecewise constants: 1 left of x_3, 3 right of it
        let f = DgScalarField::from_modal_fn(m.clone(), 1, |i, _, mm, nn| {
            if mm == 0 && nn == 0 {
                if i < 3 {
                    1.0
                } else {
                    3.0
                }
            } else {
                0.0
            }
        });
        let jmp = f.jump(Axis::X, 3, 4).unwrap();
        assert_relative_eq!(jmp.eval(0.5), 2.0, epsilon = 1e-15);
        let avg = f.average(Axis::X, 3, 4).unwrap();
        assert_relative_eq!(avg.eval(0.5), 2.0, epsilon = 1e-15);
        assert_relative_eq!(f.jump(Axis::X, 2, 4).unwrap().eval(0.5), 0.0);

        let five = DgScalarField::from_modal_fn(m.clone(), 1, |_, _, mm, nn| {
            if mm == 0 && nn == 0 {
                5.0
            } else {
                0.0
            }
        });
        assert_relative_eq!(five.jump(Axis::X, 0, 2).unwrap().eval(0.3), 5.0);
        assert_relative_eq!(five.average(Axis::Y, 0, 2).unwrap().eval(0.3), 5.0);
        assert_relative_eq!(five.jump(Axis::Y, 8, 2).unwrap().eval(0.3), -5.0);
        let seven = DgScalarField::from_modal_fn(m, 1, |_, _, mm, nn| {
            if mm == 0 && nn == 0 {
                7.0
            } else {
                0.0
            }
        });
        assert_relative_eq!(seven.average(Axis::X, 8, 7).unwrap().eval(0.99), 7.0);
        assert!(seven.jump(Axis::X, 9, 0).is_err());
        assert!(seven.jump(Axis::X, 1, 8).is_err());
    }

    #[test]
    fn continuous_field_has_no_jumps() {
        let m = Arc::new(build_shishkin(MeshParams::new(8, 1.0, 1.0, 1.0, 1)).unwrap());
        // v(x,y) = x y, represented exactly
        let f = DgScalarField::from_modal_fn(m.clone(), 1, |i, j, mm, nn| {
            let (a, b) = m.interval(i);
            let (c, d) = m.interval(j);
            let xs = [0.5 * (a + b), 0.5 * (b - a)];
            let ys = [0.5 * (c + d), 0.5 * (d - c)];
            xs[mm] * ys[nn]
        });
        for iface in 1..8 {
            for line in 0..8 {
                for axis in [Axis::X, Axis::Y] {
                    let jmp = f.jump(axis, iface, line).unwrap();
                    assert!(jmp.coeffs.iter().all(|c| c.abs() < 1e-15));
                    let avg = f.average(axis, iface, line).unwrap();
                    let t = 0.5 * (jmp.interval.0 + jmp.interval.1);
                    let pos = m.points()[iface];
                    let expected = pos * t;
                    assert_relative_eq!(avg.eval(t), expected, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn product_jump_identity() {
        let m = mesh(8);
        let v = random_field(m.clone(), 2, 1);
        let r = random_field(m.clone(), 2, 2);
        let rule = gauss_legendre(4);
        for iface in 1..8 {
            for line in [0, 3, 7] {
                let jv = v.jump(Axis::X, iface, line).unwrap();
                let jr = r.jump(Axis::X, iface, line).unwrap();
                let av = v.average(Axis::X, iface, line).unwrap();
                let ar = r.average(Axis::X, iface, line).unwrap();
                let (vm, vp) = v.one_sided_traces(Axis::X, iface, line).unwrap();
                let (rm, rp) = r.one_sided_traces(Axis::X, iface, line).unwrap();
                let (a, b) = jv.interval;
                for &s in &rule.nodes {
                    let t = 0.5 * (a + b) + 0.5 * (b - a) * s;
                    let ev = |c: &[f64]| {
                        legendre_values(2, s)
                            .iter()
                            .zip(c)
                            .map(|(l, x)| l * x)
                            .sum::<f64>()
                    };
                    let lhs = ev(vp.as_ref().unwrap()) * ev(rp.as_ref().unwrap())
                        - ev(vm.as_ref().unwrap()) * ev(rm.as_ref().unwrap());
                    let rhs = av.eval(t) * jr.eval(t) + ar.eval(t) * jv.eval(t);
                    assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} {rhs}");
                }
            }
        }
    }

    #[test]
    fn modal_trace_matches_dense_evaluation() {
        let m = mesh(8);
        let f = random_field(m.clone(), 3, 7);
        let rule = gauss_legendre(5);
        for (i, j) in [(0, 0), (3, 5), (7, 7)] {
            for side in [EdgeSide::Left, EdgeSide::Right, EdgeSide::Bottom, EdgeSide::Top] {
                let t = f.trace(i, j, side);
                for &s in &rule.nodes {
                    let dense = match side {
                        EdgeSide::Left => f.eval_local(i, j, -1.0, s),
                        EdgeSide::Right => f.eval_local(i, j, 1.0, s),
                        EdgeSide::Bottom => f.eval_local(i, j, s, -1.0),
                        EdgeSide::Top => f.eval_local(i, j, s, 1.0),
                    };
                    let modal: f64 = legendre_values(3, s).iter().zip(&t).map(|(a, b)| a * b).sum();
                    assert!((dense - modal).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn refinement_is_exact() {
        let m = mesh(8);
        let f = random_field(m.clone(), 2, 11);
        let fine = Arc::new(m.bisect());
        let g = f.refine_to(fine.clone()).unwrap();
        for &(x, y) in &[(0.01, 0.3), (0.77, 0.999), (0.5, 0.5)] {
            assert_relative_eq!(f.eval(x, y).unwrap(), g.eval(x, y).unwrap(), epsilon = 1e-12);
        }
        assert!(f.refine_to(mesh(16)).is_err());
    }

    #[test]
    fn dump_roundtrip() {
        let m = Arc::new(mesh(8).bisect());
        let f = random_field(m, 1, 3);
        let json = serde_json::to_string(&f.to_dump("U")).unwrap();
        let back: FieldDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back.name, "U");
        assert_eq!(DgScalarField::from_dump(&back).unwrap(), f);
    }

    #[test]
    fn triple_shape_checks() {
        let a = DgScalarField::zeros(mesh(8), 1);
        let b = DgScalarField::zeros(mesh(8), 2);
        assert!(DgTriple::new(a.clone(), a.clone(), b).is_err());
        let t = DgTriple::new(a.clone(), a.clone(), a).unwrap();
        let v = t.to_vector();
        assert_eq!(v.len(), 3 * 64 * 4);
        assert_eq!(DgTriple::from_vector(t.mesh().clone(), 1, &v).unwrap(), t);
    }
}
