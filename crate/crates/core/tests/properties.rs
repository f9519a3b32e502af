//! Property-based invariants across modules.

use std::sync::Arc;

use proptest::prelude::*;
use shishkin_ldg::dgspace::{local_dim, DgScalarField, DgTriple};
use shishkin_ldg::ldg::{bilinear_apply, energy_norm_sq, AssemblyOptions};
use shishkin_ldg::mesh::{build_shishkin, MeshParams, Rect};
use shishkin_ldg::norms::{pairwise_sum, rate_shishkin};
use shishkin_ldg::polybasis::{gauss_legendre, legendre_values};
use shishkin_ldg::problems::example2;
use shishkin_ldg::projectors::{default_projection_points, project_2d, ProjectorKind};
use shishkin_ldg::study::sci;

fn eval_modal(c: &[f64], k: usize, xi: f64, eta: f64) -> f64 {
    let lx = legendre_values(k, xi);
    let ly = legendre_values(k, eta);
    (0..=k)
        .flat_map(|n| (0..=k).map(move |m| (m, n)))
        .map(|(m, n)| c[n * (k + 1) + m] * lx[m] * ly[n])
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rate_recovers_power_of_shishkin_variable(p in 0.1f64..5.0, c in 1e-6f64..1e3, e in 2u32..10) {
        let n = 1usize << e;
        let g = |n: usize| (n as f64).ln() / n as f64;
        let r = rate_shishkin(c * g(n).powf(p), c * g(2 * n).powf(p), n).unwrap();
        prop_assert!((r - p).abs() < 1e-10);
    }

    #[test]
    fn scientific_format_round_trips(v in 1e-300f64..1e300) {
        let s = sci(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-5 * v);
        prop_assert_eq!(s.split_once('E').unwrap().0.len(), 6);
    }

    #[test]
    fn pairwise_sum_matches_naive(values in prop::collection::vec(-1e3f64..1e3, 0..300)) {
        let naive: f64 = values.iter().sum();
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise_sum(&values) - naive).abs() <= 1e-12 * scale);
    }

    #[test]
    fn projectors_reproduce_tensor_polynomials(
        k in 0usize..4,
        which in 0usize..9,
        seed in prop::collection::vec(-1.0f64..1.0, 16),
        x0 in 0.0f64..0.9, hx in 1e-5f64..0.1, y0 in 0.0f64..0.9, hy in 1e-5f64..0.1,
    ) {
        let rect = Rect { x0, x1: x0 + hx, y0, y1: y0 + hy };
        let c = &seed[..local_dim(k)];
        let z = |x: f64, y: f64| {
            let (xi, eta) = rect.to_reference(x, y);
            eval_modal(c, k, xi, eta)
        };
        let kind = ProjectorKind::tensor_kinds()[which].clone();
        let got = project_2d(&kind, z, &rect, k, &gauss_legendre(default_projection_points(k))).unwrap();
        for (g, e) in got.iter().zip(c) {
            prop_assert!((g - e).abs() <= 1e-11);
        }
    }

    #[test]
    fn energy_identity_holds_for_random_triples(
        k in 0usize..3,
        log_eps in -10.0f64..0.0,
        coeffs in prop::collection::vec(-1.0f64..1.0, 3 * 64 * 9),
    ) {
        let eps = 10f64.powf(log_eps);
        let mesh = Arc::new(build_shishkin(MeshParams::new(8, eps, (k + 1) as f64, 1.0, k)).unwrap());
        let len = 64 * local_dim(k);
        let field = |f: usize| DgScalarField::from_coeffs(mesh.clone(), k, coeffs[f * len..(f + 1) * len].to_vec()).unwrap();
        let z = DgTriple::new(field(0), field(1), field(2)).unwrap();
        let problem = example2(eps);
        let rule = AssemblyOptions::for_degree(k).rule();
        let b = bilinear_apply(&problem, &z, &z, &rule).unwrap();
        let e = energy_norm_sq(&problem, &z, &rule);
        prop_assert!((b - e).abs() <= 1e-11 * e);
    }

    #[test]
    fn shishkin_mesh_is_symmetric(e in 3u32..9, log_eps in -12.0f64..0.0, k in 0usize..4) {
        let n = 1usize << e;
        let m = build_shishkin(MeshParams::new(n, 10f64.powf(log_eps), (k + 1) as f64, 1.0, k)).unwrap();
        let pts = m.points();
        for i in 0..=n {
            prop_assert!((pts[i] + pts[n - i] - 1.0).abs() <= 1e-14);
        }
    }
}
