//! Built-in test problems.
//!
//! - `example1`: `-eps Lap u + 2u = f` with a known solution that has an
//!   exponential layer along every edge.
//! - `example2`: variable reaction coefficient, smooth source, no known solution.
//! - `polynomial`: `u = x(1-x) y(1-y)`, reproduced exactly for `k >= 2`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ldg::{ExactSolution, ProblemSpec};

/// The 1D factor `g(t) = (e^{-t/s} - e^{-(1-t)/s}) / (1 - e^{-1/s}) - cos(pi t)`,
/// `s = sqrt(eps)`, with its eps-scaled derivatives.
///
/// `g(0) = g(1) = 0` and `g(1 - t) = -g(t)`.
#[derive(Clone, Copy, Debug)]
pub struct LayerFactor {
    epsilon: f64,
    sqrt_eps: f64,
    denom: f64,
}

impl LayerFactor {
    pub fn new(epsilon: f64) -> Self {
        let sqrt_eps = epsilon.sqrt();
        // e^{-40} is below double precision relative to 1
        let denom = if sqrt_eps < 1.0 / 40.0 {
            1.0
        } else {
            -(-1.0 / sqrt_eps).exp_m1()
        };
        Self {
            epsilon,
            sqrt_eps,
            denom,
        }
    }

    fn exps(&self, t: f64) -> (f64, f64) {
        ((-t / self.sqrt_eps).exp(), (-(1.0 - t) / self.sqrt_eps).exp())
    }

    pub fn value(&self, t: f64) -> f64 {
        let (e0, e1) = self.exps(t);
        (e0 - e1) / self.denom - (PI * t).cos()
    }

    /// `eps g'(t)`.
    pub fn eps_first(&self, t: f64) -> f64 {
        let (e0, e1) = self.exps(t);
        -self.sqrt_eps * (e0 + e1) / self.denom + self.epsilon * PI * (PI * t).sin()
    }

    /// `eps g''(t)`.
    pub fn eps_second(&self, t: f64) -> f64 {
        let (e0, e1) = self.exps(t);
        (e0 - e1) / self.denom + self.epsilon * PI * PI * (PI * t).cos()
    }
}

/// Constant-coefficient problem (`b = 2`) with the product layer solution `g(x) g(y)`.
pub fn example1(epsilon: f64) -> ProblemSpec {
    let g = LayerFactor::new(epsilon);
    let u = move |x: f64, y: f64| g.value(x) * g.value(y);
    let p = move |x: f64, y: f64| g.eps_first(x) * g.value(y);
    let q = move |x: f64, y: f64| g.value(x) * g.eps_first(y);
    let f = move |x: f64, y: f64| {
        let (gx, gy) = (g.value(x), g.value(y));
        -(g.eps_second(x) * gy + gx * g.eps_second(y)) + 2.0 * gx * gy
    };
    ProblemSpec {
        name: "example1".into(),
        epsilon,
        b: Arc::new(|_, _| 2.0),
        f: Arc::new(f),
        exact: Some(ExactSolution {
            u: Arc::new(u),
            p: Arc::new(p),
            q: Arc::new(q),
        }),
        beta: 1.0,
    }
}

/// Variable-coefficient problem `b = 1 + x^2 y^2 e^{xy/2}`, `f = tanh((x+1)(y+1))`.
pub fn example2(epsilon: f64) -> ProblemSpec {
    ProblemSpec {
        name: "example2".into(),
        epsilon,
        b: Arc::new(|x, y| 1.0 + x * x * y * y * (0.5 * x * y).exp()),
        f: Arc::new(|x, y| ((x + 1.0) * (y + 1.0)).tanh()),
        exact: None,
        beta: std::f64::consts::FRAC_1_SQRT_2,
    }
}

/// `u = x(1-x) y(1-y)` with constant reaction coefficient `b_const`.
pub fn polynomial_problem(epsilon: f64, b_const: f64) -> ProblemSpec {
    let bump = |t: f64| t * (1.0 - t);
    let u = move |x: f64, y: f64| bump(x) * bump(y);
    let p = move |x: f64, y: f64| epsilon * (1.0 - 2.0 * x) * bump(y);
    let q = move |x: f64, y: f64| epsilon * bump(x) * (1.0 - 2.0 * y);
    let f = move |x: f64, y: f64| 2.0 * epsilon * (bump(x) + bump(y)) + b_const * bump(x) * bump(y);
    ProblemSpec {
        name: "polynomial".into(),
        epsilon,
        b: Arc::new(move |_, _| b_const),
        f: Arc::new(f),
        exact: Some(ExactSolution {
            u: Arc::new(u),
            p: Arc::new(p),
            q: Arc::new(q),
        }),
        beta: (0.5 * b_const).sqrt(),
    }
}

/// Names accepted by [`by_name`].
pub const CATALOG: [&str; 3] = ["example1", "example2", "polynomial"];

/// Looks up a built-in problem; `polynomial` uses `b = 2`.
pub fn by_name(name: &str, epsilon: f64) -> Result<ProblemSpec> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    match name {
        "example1" => Ok(example1(epsilon)),
        "example2" => Ok(example2(epsilon)),
        "polynomial" => Ok(polynomial_problem(epsilon, 2.0)),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // 8th-order central differences
    fn d2(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        const C: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
        let mut s = C[0] * f(t);
        for (k, c) in C.iter().enumerate().skip(1) {
            let off = k as f64 * h;
            s += c * (f(t + off) + f(t - off));
        }
        s / (h * h)
    }

    fn d1(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        C.iter()
            .enumerate()
            .map(|(k, c)| {
                let off = (k + 1) as f64 * h;
                c * (f(t + off) - f(t - off))
            })
            .sum::<f64>()
            / h
    }

    fn residual_check(problem: &ProblemSpec, seed: u64) {
        let exact = problem.exact.as_ref().unwrap();
        let eps = problem.epsilon;
        let h = 0.05 * eps.sqrt().min(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..25 {
            let x: f64 = rng.random_range(0.01..0.99);
            let y: f64 = rng.random_range(0.01..0.99);
            let uxx = d2(&|t| (exact.u)(t, y), x, h);
            let uyy = d2(&|t| (exact.u)(x, t), y, h);
            let u = (exact.u)(x, y);
            let b = (problem.b)(x, y);
            let f = (problem.f)(x, y);
            let res = -eps * (uxx + uyy) + b * u - f;
            let scale = f.abs() + (b * u).abs() + (eps * (uxx + uyy)).abs();
            assert!(res.abs() <= 1e-9 * scale.max(1e-300), "x={x} y={y} res={res}");

            let ux = d1(&|t| (exact.u)(t, y), x, h);
            let uy = d1(&|t| (exact.u)(x, t), y, h);
            let p = (exact.p)(x, y);
            let q = (exact.q)(x, y);
            assert!((p - eps * ux).abs() <= 1e-6 * (p.abs() + eps * ux.abs()).max(1e-300));
            assert!((q - eps * uy).abs() <= 1e-6 * (q.abs() + eps * uy.abs()).max(1e-300));
        }
    }

    #[test]
    fn example1_solves_its_equation() {
        for (k, eps) in [1.0, 1e-2, 1e-4, 1e-8].into_iter().enumerate() {
            residual_check(&example1(eps), k as u64);
        }
    }

    #[test]
    fn example1_near_layers() {
        // sample inside the layer strip where the exponentials matter
        let eps = 1e-6;
        let p = example1(eps);
        let exact = p.exact.as_ref().unwrap();
        let h = 0.05 * eps.sqrt();
        for &x in &[2e-3, 5e-3, 0.997] {
            let y = 0.4;
            let lap = d2(&|t| (exact.u)(t, y), x, h) + d2(&|t| (exact.u)(x, t), y, h);
            let res = -eps * lap + 2.0 * (exact.u)(x, y) - (p.f)(x, y);
            assert!(res.abs() < 1e-9 * (p.f)(x, y).abs().max(1.0));
        }
    }

    #[test]
    fn polynomial_solves_its_equation() {
        for eps in [1.0, 1e-4, 1e-8] {
            residual_check(&polynomial_problem(eps, 3.0), 9);
        }
    }

    #[test]
    fn example1_boundary_and_antisymmetry() {
        for eps in [1.0, 1e-4, 1e-8, 1e-12] {
            let p = example1(eps);
            let u = &p.exact.as_ref().unwrap().u;
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                assert!(u(0.0, t).abs() < 1e-12);
                assert!(u(1.0, t).abs() < 1e-12);
                assert!(u(t, 0.0).abs() < 1e-12);
                assert!(u(t, 1.0).abs() < 1e-12);
                // reflecting x negates the solution
                let y = 0.3 + 0.01 * k as f64;
                assert_relative_eq!(u(1.0 - t, y), -u(t, y), epsilon = 1e-12);
            }
            assert!(p.validate().is_ok());
        }
    }

    #[test]
    fn polynomial_values() {
        let eps = 1e-3;
        let b = 2.5;
        let p = polynomial_problem(eps, b);
        assert_relative_eq!((p.f)(0.5, 0.5), eps + b / 16.0, max_relative = 1e-15);
        let e = p.exact.as_ref().unwrap();
        assert_relative_eq!((e.p)(0.0, 0.3), eps * 0.3 * 0.7, max_relative = 1e-15);
        assert_eq!((e.u)(0.0, 0.4), 0.0);
        assert_eq!((e.u)(0.7, 1.0), 0.0);
    }

    #[test]
    fn example2_data() {
        let p = example2(1e-8);
        assert_eq!((p.b)(0.0, 0.0), 1.0);
        assert_relative_eq!((p.b)(1.0, 1.0), 1.0 + 0.5f64.exp(), max_relative = 1e-15);
        assert_relative_eq!((p.b)(1.0, 1.0), 2.6487212707, max_relative = 1e-10);
        assert!(p.exact.is_none());
        assert_relative_eq!(p.beta, 0.5f64.sqrt());
    }

    #[test]
    fn catalog_lookup() {
        for name in CATALOG {
            assert_eq!(by_name(name, 1e-4).unwrap().name, name);
        }
        assert!(matches!(by_name("nope", 1e-4), Err(Error::UnknownProblem(_))));
        assert!(by_name("example1", 0.0).is_err());
    }
}
