//! Legendre modal basis and Gauss-Legendre quadrature.
//!
//! On the reference interval `[-1, 1]` the basis is the classical Legendre
//! family `l_m`, with `l_m(1) = 1`, `l_m(-1) = (-1)^m` and
//! `int l_m^2 = 2 / (2m + 1)`. On a physical interval `(a, b)` the basis is the
//! affine pull-back, so `||l_m||^2 = (b - a) / (2m + 1)`.

use crate::mesh::Rect;

/// Legendre polynomial `l_m(s)` by the three-term recurrence.
pub fn legendre_eval(m: usize, s: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..m {
        let next = ((2 * j + 1) as f64 * s * cur - j as f64 * prev) / (j + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Values `l_0(s), ..., l_k(s)`.
pub fn legendre_values(k: usize, s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(s);
    }
    for j in 1..k {
        let next = ((2 * j + 1) as f64 * s * out[j] - j as f64 * out[j - 1]) / (j + 1) as f64;
        out.push(next);
    }
    out
}

/// Derivatives `l_0'(s), ..., l_k'(s)` via `l_{m+1}' = l_{m-1}' + (2m+1) l_m`,
/// which stays accurate at the endpoints.
pub fn legendre_derivatives(k: usize, s: f64) -> Vec<f64> {
    let values = legendre_values(k, s);
    let mut out = vec![0.0; k + 1];
    if k >= 1 {
        out[1] = 1.0;
    }
    for m in 1..k {
        out[m + 1] = out[m - 1] + (2 * m + 1) as f64 * values[m];
    }
    out
}

/// `int_{-1}^{1} l_a(s) l_b'(s) ds`: 2 when `a < b` and `b - a` is odd, else 0.
pub fn derivative_pairing(a: usize, b: usize) -> f64 {
    if a < b && (b - a) % 2 == 1 {
        2.0
    } else {
        0.0
    }
}

/// `l_m` at the reference endpoint `s = -1` (`left`) or `s = 1`.
pub fn endpoint_value(m: usize, left: bool) -> f64 {
    if left && m % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Legendre basis of degree `k` on the physical interval `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegendreBasis1D {
    pub degree: usize,
    pub a: f64,
    pub b: f64,
}

impl LegendreBasis1D {
    pub fn new(degree: usize, a: f64, b: f64) -> Self {
        Self { degree, a, b }
    }

    pub fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn eval(&self, m: usize, x: f64) -> f64 {
        legendre_eval(m, self.to_reference(x))
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        legendre_values(self.degree, self.to_reference(x))
    }

    /// `||l_m||^2` over `(a, b)`.
    pub fn norm_sq(&self, m: usize) -> f64 {
        (self.b - self.a) / (2 * m + 1) as f64
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_{-1}^{1} f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }

    /// `int_a^b f`.
    pub fn integrate_interval(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|s| f(mid + half * s))
    }

    /// Tensor points `(xi, eta, w_xi * w_eta)` on `[-1, 1]^2`, eta-major.
    pub fn tensor_points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.nodes.iter().zip(&self.weights).flat_map(move |(&eta, &wy)| {
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(move |(&xi, &wx)| (xi, eta, wx * wy))
        })
    }
}

/// Default points per direction: `max(5, k + 2)`.
pub fn default_quadrature_points(degree: usize) -> usize {
    (degree + 2).max(5)
}

/// `n`-point Gauss-Legendre rule; nodes ascending and symmetric about 0.
///
/// # Panics
/// If `n == 0`.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1, "a quadrature rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev node as starting guess, descending in i
        let mut s = (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos();
        let mut deriv = 1.0;
        for _ in 0..100 {
            let (p, dp) = value_and_derivative(n, s);
            deriv = dp;
            let step = p / dp;
            s -= step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = value_and_derivative(n, s);
        if dp.is_finite() {
            deriv = dp;
        }
        let w = 2.0 / ((1.0 - s * s) * deriv * deriv);
        nodes[n - 1 - i] = s;
        nodes[i] = -s;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

fn value_and_derivative(n: usize, s: f64) -> (f64, f64) {
    let values = legendre_values(n, s);
    let derivs = legendre_derivatives(n, s);
    (values[n], derivs[n])
}

/// Tensor-product quadrature of `f(x, y)` over `rect`.
pub fn integrate_element(f: impl Fn(f64, f64) -> f64, rect: &Rect, rule: &QuadratureRule) -> f64 {
    let jac = 0.25 * rect.hx() * rect.hy();
    rule.tensor_points()
        .map(|(xi, eta, w)| {
            let (x, y) = rect.map(xi, eta);
            w * f(x, y)
        })
        .sum::<f64>()
        * jac
}

/// Basis values and derivatives tabulated at the nodes of a rule, `[node][m]`.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
}

impl Tabulation {
    pub fn new(degree: usize, rule: &QuadratureRule) -> Self {
        Self {
            values: rule.nodes.iter().map(|&s| legendre_values(degree, s)).collect(),
            derivatives: rule
                .nodes
                .iter()
                .map(|&s| legendre_derivatives(degree, s))
                .collect(),
        }
    }
}
