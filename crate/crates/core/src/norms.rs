//! Error functionals: energy and balanced norms, L2 and sampled L-infinity
//! errors, the two-mesh surrogate, and convergence rates in `N^{-1} ln N`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dgspace::{DgScalarField, DgTriple};
use crate::error::{Error, Result};
use crate::ldg::ExactSolution;
use crate::mesh::RegionId;
use crate::polybasis::{legendre_values, QuadratureRule};

/// Error norms of one discrete solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `(eps^{-1} (||e_p||^2 + ||e_q||^2) + ||b^{1/2} e_u||^2)^{1/2}`.
    pub energy: f64,
    /// As `energy` with weight `eps^{-3/2}` on the flux errors.
    pub balanced: f64,
    pub l2_u: f64,
    /// Largest `|e_u|` over the quadrature nodes (a lower bound of the sup).
    pub linf_u: f64,
    pub epsilon: f64,
    pub n: usize,
    pub degree: usize,
    pub sigma: f64,
    pub quad_points: usize,
}

/// Squared element contributions `[||e_u||_b^2, ||e_u||^2, ||e_p||^2 + ||e_q||^2]`
/// and the element max of `|e_u|`.
#[derive(Clone, Copy, Default)]
struct Partial {
    sums: [f64; 3],
    max: f64,
}

/// Sum by recursive halving, independent of thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn finish(partials: Vec<Partial>, epsilon: f64, w: &DgTriple, rule: &QuadratureRule) -> ErrorReport {
    let column = |k: usize| pairwise_sum(&partials.iter().map(|p| p.sums[k]).collect::<Vec<_>>());
    let (bu, u2, flux) = (column(0), column(1), column(2));
    let linf_u = partials.iter().fold(0.0f64, |m, p| m.max(p.max));
    let params = w.mesh().params();
    ErrorReport {
        energy: (flux / epsilon + bu).sqrt(),
        balanced: (flux / epsilon.powf(1.5) + bu).sqrt(),
        l2_u: u2.sqrt(),
        linf_u,
        epsilon,
        n: w.mesh().n(),
        degree: w.degree(),
        sigma: params.sigma,
        quad_points: rule.len(),
    }
}

/// Errors of `w` against an exact triple, by elementwise tensor quadrature.
pub fn error_norms(
    w: &DgTriple,
    exact: &ExactSolution,
    b: &(dyn Fn(f64, f64) -> f64 + Sync),
    epsilon: f64,
    rule: &QuadratureRule,
) -> ErrorReport {
    let mesh = w.mesh().clone();
    let n = mesh.n();
    let k = w.degree();
    let tab: Vec<Vec<f64>> = rule.nodes.iter().map(|&s| legendre_values(k, s)).collect();
    let [wu, wp, wq] = w.fields();
    let partials: Vec<Partial> = (0..n * n)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e % n, e / n);
            let rect = mesh.element_rect(i, j);
            let jac = 0.25 * rect.hx() * rect.hy();
            let mut part = Partial::default();
            for (iy, &wy) in rule.weights.iter().enumerate() {
                for (ix, &wx) in rule.weights.iter().enumerate() {
                    let (x, y) = rect.map(rule.nodes[ix], rule.nodes[iy]);
                    let eu = (exact.u)(x, y) - wu.sum_with(i, j, &tab[ix], &tab[iy]);
                    let ep = (exact.p)(x, y) - wp.sum_with(i, j, &tab[ix], &tab[iy]);
                    let eq = (exact.q)(x, y) - wq.sum_with(i, j, &tab[ix], &tab[iy]);
                    let wt = wx * wy * jac;
                    part.sums[0] += wt * b(x, y) * eu * eu;
                    part.sums[1] += wt * eu * eu;
                    part.sums[2] += wt * (ep * ep + eq * eq);
                    part.max = part.max.max(eu.abs());
                }
            }
            part
        })
        .collect();
    finish(partials, epsilon, w, rule)
}

/// Norms of `coarse - fine`, integrated on the mesh of `fine`, which must be
/// the midpoint bisection of the mesh of `coarse`.
pub fn two_mesh_error(
    coarse: &DgTriple,
    fine: &DgTriple,
    b: &(dyn Fn(f64, f64) -> f64 + Sync),
    epsilon: f64,
    rule: &QuadratureRule,
) -> Result<ErrorReport> {
    let cmesh = coarse.mesh().clone();
    let fmesh = fine.mesh().clone();
    if !cmesh.is_bisected_by(&fmesh, 1e-14) {
        return Err(Error::MeshNotNested(format!(
            "mesh with {} intervals is not the bisection of the mesh with {}",
            fmesh.n(),
            cmesh.n()
        )));
    }
    let nf = fmesh.n();
    let kc = coarse.degree();
    let kf = fine.degree();
    let tab_f: Vec<Vec<f64>> = rule.nodes.iter().map(|&s| legendre_values(kf, s)).collect();
    let [cu, cp, cq] = coarse.fields();
    let [fu, fp, fq] = fine.fields();
    let partials: Vec<Partial> = (0..nf * nf)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e % nf, e / nf);
            let (pi, pj) = (i / 2, j / 2);
            let rect = fmesh.element_rect(i, j);
            let parent = cmesh.element_rect(pi, pj);
            let jac = 0.25 * rect.hx() * rect.hy();
            let mut part = Partial::default();
            for (iy, &wy) in rule.weights.iter().enumerate() {
                for (ix, &wx) in rule.weights.iter().enumerate() {
                    let (x, y) = rect.map(rule.nodes[ix], rule.nodes[iy]);
                    let (xi, eta) = parent.to_reference(x, y);
                    let lx = legendre_values(kc, xi);
                    let ly = legendre_values(kc, eta);
                    let eu = cu.sum_with(pi, pj, &lx, &ly) - fu.sum_with(i, j, &tab_f[ix], &tab_f[iy]);
                    let ep = cp.sum_with(pi, pj, &lx, &ly) - fp.sum_with(i, j, &tab_f[ix], &tab_f[iy]);
                    let eq = cq.sum_with(pi, pj, &lx, &ly) - fq.sum_with(i, j, &tab_f[ix], &tab_f[iy]);
                    let wt = wx * wy * jac;
                    part.sums[0] += wt * b(x, y) * eu * eu;
                    part.sums[1] += wt * eu * eu;
                    part.sums[2] += wt * (ep * ep + eq * eq);
                    part.max = part.max.max(eu.abs());
                }
            }
            part
        })
        .collect();
    let mut report = finish(partials, epsilon, coarse, rule);
    report.n = cmesh.n();
    Ok(report)
}

/// `max |z - field|` over the elements whose region passes `keep`, sampled
/// at the tensor grid of the rule nodes together with the element corners
/// and edge midpoints of the reference square.
pub fn linf_error_where(
    field: &DgScalarField,
    z: &(dyn Fn(f64, f64) -> f64 + Sync),
    keep: impl Fn(RegionId) -> bool + Sync,
    rule: &QuadratureRule,
) -> f64 {
    let mesh = field.mesh().clone();
    let n = mesh.n();
    let mut samples = rule.nodes.clone();
    samples.extend([-1.0, 0.0, 1.0]);
    let k = field.degree();
    let tab: Vec<Vec<f64>> = samples.iter().map(|&s| legendre_values(k, s)).collect();
    (0..n * n)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e % n, e / n);
            if !keep(mesh.region_of(i, j)) {
                return 0.0;
            }
            let rect = mesh.element_rect(i, j);
            let mut m = 0.0f64;
            for (iy, &eta) in samples.iter().enumerate() {
                for (ix, &xi) in samples.iter().enumerate() {
                    let (x, y) = rect.map(xi, eta);
                    m = m.max((z(x, y) - field.sum_with(i, j, &tab[ix], &tab[iy])).abs());
                }
            }
            m
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// `ln(e_N / e_2N) / ln(2 ln N / ln 2N)`.
pub fn rate_shishkin(e_n: f64, e_2n: f64, n: usize) -> Result<f64> {
    if !(e_n > 0.0 && e_2n > 0.0) {
        return Err(Error::NonpositiveError { e_n, e_2n });
    }
    if n < 2 {
        return Err(Error::InvalidN(n));
    }
    let nf = n as f64;
    Ok((e_n / e_2n).ln() / (2.0 * nf.ln() / (2.0 * nf).ln()).ln())
}

/// Least-squares slope of `ln e` against `ln(N^{-1} ln N)`.
pub fn fitted_order(ns: &[usize], errors: &[f64]) -> Result<f64> {
    if ns.len() != errors.len() || ns.len() < 2 {
        return Err(Error::InvalidParam(
            "a fitted order needs at least two (N, error) pairs".into(),
        ));
    }
    if let Some(&e) = errors.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::NonpositiveError { e_n: e, e_2n: e });
    }
    let xs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let nf = n as f64;
            (nf.ln() / nf).ln()
        })
        .collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_shishkin, MeshParams};
    use crate::polybasis::gauss_legendre;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn zero_exact() -> ExactSolution {
        ExactSolution {
            u: Arc::new(|_, _| 0.0),
            p: Arc::new(|_, _| 0.0),
            q: Arc::new(|_, _| 0.0),
        }
    }

    fn mesh(n: usize, k: usize, eps: f64) -> Arc<crate::mesh::ShishkinMesh> {
        Arc::new(build_shishkin(MeshParams::new(n, eps, (k + 2) as f64, 1.0, k)).unwrap())
    }

    #[test]
    fn constant_unit_u() {
        let m = mesh(8, 1, 1e-4);
        let mut w = DgTriple::zeros(m.clone(), 1);
        w.u = DgScalarField::from_modal_fn(m, 1, |_, _, a, c| if a + c == 0 { 1.0 } else { 0.0 });
        let r = error_norms(&w, &zero_exact(), &|_, _| 2.0, 1e-4, &gauss_legendre(5));
        assert_relative_eq!(r.energy, 2f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(r.balanced, 2f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(r.l2_u, 1.0, max_relative = 1e-13);
        assert_relative_eq!(r.linf_u, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn flux_weights() {
        let eps: f64 = 1e-6;
        let m = mesh(8, 0, eps);
        let mut w = DgTriple::zeros(m.clone(), 0);
        w.p = DgScalarField::from_modal_fn(m, 0, |_, _, _, _| eps.powf(0.75));
        let r = error_norms(&w, &zero_exact(), &|_, _| 2.0, eps, &gauss_legendre(5));
        assert_relative_eq!(r.balanced, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.energy, eps.powf(0.25), max_relative = 1e-12);
        assert!(r.balanced >= r.energy);
    }

    #[test]
    fn two_mesh_of_refined_copy_is_zero() {
        let m = mesh(8, 2, 1e-8);
        let fine = Arc::new(m.bisect());
        let w = DgTriple::new(
            DgScalarField::from_modal_fn(m.clone(), 2, |i, j, a, c| ((i + 2 * j + a) as f64).sin() + c as f64),
            DgScalarField::from_modal_fn(m.clone(), 2, |i, j, a, c| ((i * j + a * c) as f64).cos()),
            DgScalarField::from_modal_fn(m.clone(), 2, |i, _, a, _| (i + a) as f64 * 0.1),
        )
        .unwrap();
        let wf = w.refine_to(fine).unwrap();
        let r = two_mesh_error(&w, &wf, &|_, _| 2.0, 1e-8, &gauss_legendre(5)).unwrap();
        assert!(r.l2_u < 1e-12, "{r:?}");
        assert!(r.energy < 1e-8, "{r:?}");
        assert!(r.linf_u < 1e-10, "{}", r.linf_u);
    }

    #[test]
    fn two_mesh_rejects_unrelated_meshes() {
        let a = DgTriple::zeros(mesh(8, 1, 1e-8), 1);
        let b = DgTriple::zeros(mesh(16, 1, 1e-8), 1);
        let err = two_mesh_error(&a, &b, &|_, _| 2.0, 1e-8, &gauss_legendre(5)).unwrap_err();
        assert!(matches!(err, Error::MeshNotNested(_)));
    }

    #[test]
    fn shishkin_rate_examples() {
        let model = |n: usize| {
            let nf = n as f64;
            (nf.ln() / nf).powi(2)
        };
        assert_relative_eq!(rate_shishkin(model(8), model(16), 8).unwrap(), 2.0, epsilon = 1e-13);
        assert_eq!(rate_shishkin(0.3, 0.3, 8).unwrap(), 0.0);
        let r = rate_shishkin(2.1412e-1, 1.1264e-1, 8).unwrap();
        assert!((r - 1.5842).abs() < 5e-4, "{r}");
        assert!(matches!(rate_shishkin(0.0, 1.0, 8), Err(Error::NonpositiveError { .. })));
    }

    #[test]
    fn fitted_order_of_model() {
        let ns = [8, 16, 32, 64];
        let es: Vec<f64> = ns.iter().map(|&n| 3.0 * ((n as f64).ln() / n as f64).powi(3)).collect();
        assert_relative_eq!(fitted_order(&ns, &es).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn pairwise_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        assert_relative_eq!(pairwise_sum(&v), v.iter().sum::<f64>(), max_relative = 1e-14);
    }
}
