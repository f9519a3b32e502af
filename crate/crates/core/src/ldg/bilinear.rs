//! Direct evaluation of the LDG bilinear form by pointwise quadrature.
//!
//! This path shares no code with assembly beyond the flux tables: fields are
//! evaluated point by point and every integral, including the edge integrals,
//! is a Gauss sum.

use crate::dgspace::{DgScalarField, DgTriple};
use crate::error::{Error, Result};
use crate::fluxes::{FluxChoice, FluxTable};
use crate::polybasis::{gauss_legendre, QuadratureRule};

use super::ProblemSpec;

fn check_compatible(w: &DgTriple, z: &DgTriple) -> Result<()> {
    if w.degree() != z.degree() || **w.mesh() != **z.mesh() {
        return Err(Error::InconsistentDims(
            "bilinear form needs both triples on the same mesh and degree".into(),
        ));
    }
    Ok(())
}

/// Flux value from the two one-sided traces; missing sides count as zero.
fn flux_value(choice: FluxChoice, minus: f64, plus: f64) -> f64 {
    let (wm, wp) = choice.weights();
    wm * minus + wp * plus
}

/// `B(w; z)` with the layer-upwind fluxes, using `rule` on elements and an
/// edge rule exact for products of degree `2k`.
pub fn bilinear_apply(
    problem: &ProblemSpec,
    w: &DgTriple,
    z: &DgTriple,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_compatible(w, z)?;
    let mesh = w.mesh().clone();
    let n = mesh.n();
    let eps = problem.epsilon;
    let [wu, wp, wq] = w.fields();
    let [zv, zs, zr] = z.fields();

    let mut volume = 0.0;
    for j in 0..n {
        for i in 0..n {
            let rect = mesh.element_rect(i, j);
            let jac = 0.25 * rect.hx() * rect.hy();
            for (xi, eta, wt) in rule.tensor_points() {
                let (x, y) = rect.map(xi, eta);
                let u = wu.eval_local(i, j, xi, eta);
                let p = wp.eval_local(i, j, xi, eta);
                let q = wq.eval_local(i, j, xi, eta);
                let v = zv.eval_local(i, j, xi, eta);
                let s = zs.eval_local(i, j, xi, eta);
                let r = zr.eval_local(i, j, xi, eta);
                let (v_x, v_y) = zv.grad_local(i, j, xi, eta);
                let (s_x, _) = zs.grad_local(i, j, xi, eta);
                let (_, r_y) = zr.grad_local(i, j, xi, eta);
                let integrand = (problem.b)(x, y) * u * v
                    + (p * s + q * r) / eps
                    + u * s_x
                    + p * v_x
                    + u * r_y
                    + q * v_y;
                volume += wt * jac * integrand;
            }
        }
    }

    let table = FluxTable::layer_upwind(n);
    let edge_rule = gauss_legendre(w.degree() + 2);
    let mut edges = 0.0;
    for line in 0..=n {
        for cell in 0..n {
            // x-line `line`, y-interval `cell`; then y-line `line`, x-interval `cell`
            edges += edge_sum(&table, line, n, &edge_rule, mesh.widths()[cell], |side, t| {
                let i = if side { line } else { line.wrapping_sub(1) };
                let xi = if side { -1.0 } else { 1.0 };
                [wu, wp, zs, zv].map(|f| f.eval_local(i, cell, xi, t))
            });
            edges += edge_sum(&table, line, n, &edge_rule, mesh.widths()[cell], |side, t| {
                let j = if side { line } else { line.wrapping_sub(1) };
                let eta = if side { -1.0 } else { 1.0 };
                [wu, wq, zr, zv].map(|f| f.eval_local(cell, j, t, eta))
            });
        }
    }
    Ok(volume + edges)
}

/// `int (U-hat [[s]] + P-hat [[v]])` over one edge, where `traces(plus, t)`
/// returns `[U, P, s, v]` from the plus (`true`) or minus side at tangential
/// reference coordinate `t`, and `[[s]] = s^+ - s^-`.
fn edge_sum(
    table: &FluxTable,
    line: usize,
    n: usize,
    rule: &QuadratureRule,
    length: f64,
    traces: impl Fn(bool, f64) -> [f64; 4],
) -> f64 {
    let mut sum = 0.0;
    for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let minus = if line >= 1 { traces(false, t) } else { [0.0; 4] };
        let plus = if line < n { traces(true, t) } else { [0.0; 4] };
        let u_hat = flux_value(table.primal(line), minus[0], plus[0]);
        let p_hat = flux_value(table.flux(line), minus[1], plus[1]);
        let jump_s = plus[2] - minus[2];
        let jump_v = plus[3] - minus[3];
        sum += wt * (u_hat * jump_s + p_hat * jump_v);
    }
    0.5 * length * sum
}

fn weighted_norm_sq(field: &DgScalarField, weight: impl Fn(f64, f64) -> f64, rule: &QuadratureRule) -> f64 {
    let mesh = field.mesh();
    let n = mesh.n();
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..n {
            let rect = mesh.element_rect(i, j);
            let jac = 0.25 * rect.hx() * rect.hy();
            for (xi, eta, wt) in rule.tensor_points() {
                let (x, y) = rect.map(xi, eta);
                let v = field.eval_local(i, j, xi, eta);
                total += wt * jac * weight(x, y) * v * v;
            }
        }
    }
    total
}

/// `eps^{-1} (||s||^2 + ||r||^2) + ||b^{1/2} v||^2` by quadrature.
pub fn energy_norm_sq(problem: &ProblemSpec, z: &DgTriple, rule: &QuadratureRule) -> f64 {
    let [v, s, r] = z.fields();
    (weighted_norm_sq(s, |_, _| 1.0, rule) + weighted_norm_sq(r, |_, _| 1.0, rule)) / problem.epsilon
        + weighted_norm_sq(v, |x, y| (problem.b)(x, y), rule)
}
