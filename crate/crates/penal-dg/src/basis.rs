//! Gauss-Lobatto quadrature and Lagrange interpolation machinery on the
//! reference interval [-1, 1].

use crate::{Error, Result};

/// Gauss-Lobatto rule of a given polynomial order together with the Lagrange
/// derivative matrix on its nodes.
///
/// For order `N` there are `N + 1` nodes including both endpoints. The rule
/// integrates polynomials up to degree `2N - 1` exactly and the derivative
/// matrix differentiates polynomials up to degree `N` exactly at the nodes.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub order: usize,
    /// Nodes in ascending order, `nodes[0] = -1`, `nodes[N] = +1`.
    pub nodes: Vec<f64>,
    /// Positive quadrature weights, summing to 2.
    pub weights: Vec<f64>,
    /// `deriv[i][j] = l_j'(nodes[i])`.
    pub deriv: Vec<Vec<f64>>,
}

impl QuadratureRule {
    pub fn n_nodes(&self) -> usize {
        self.order + 1
    }

    /// Apply the derivative matrix to nodal values.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n_nodes();
        assert_eq!(values.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.deriv[i][j] * values[j];
            }
            out[i] = acc;
        }
        out
    }
}

/// Legendre polynomial `P_n(x)` and its first derivative.
///
/// The derivative uses `(1 - x^2) P_n'(x) = n (P_{n-1}(x) - x P_n(x))`,
/// valid in the open interval.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (p_prev - x * p) / (1.0 - x * x);
    (p, dp)
}

/// Legendre polynomial value only (stable at the endpoints).
fn legendre(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    p
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Interior Gauss-Lobatto node: a root of `P_N'` found by Newton iteration
/// from a Chebyshev-Lobatto initial guess.
fn interior_node(order: usize, guess: f64) -> f64 {
    let nf = (order * (order + 1)) as f64;
    let mut x = guess;
    for _ in 0..NEWTON_MAX_ITER {
        let (p, dp) = legendre_with_deriv(order, x);
        // P_N'' from the Legendre ODE: (1-x^2) P'' = 2x P' - N(N+1) P.
        let d2p = (2.0 * x * dp - nf * p) / (1.0 - x * x);
        let step = dp / d2p;
        x -= step;
        if step.abs() <= NEWTON_TOL {
            break;
        }
    }
    x
}

/// Construct the `(N+1)`-point Gauss-Lobatto rule of order `N >= 1`.
pub fn gauss_lobatto_rule(order: usize) -> Result<QuadratureRule> {
    if order < 1 {
        return Err(Error::InvalidOrder(order));
    }
    let n = order + 1;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[order] = 1.0;
    for i in 1..order {
        let guess = -(std::f64::consts::PI * i as f64 / order as f64).cos();
        nodes[i] = interior_node(order, guess);
    }
    // Symmetrize the interior nodes pairwise; the midpoint of an even-order
    // rule is exactly zero.
    for i in 1..=(order - 1) / 2 {
        let avg = 0.5 * (nodes[i] - nodes[order - i]);
        nodes[i] = avg;
        nodes[order - i] = -avg;
    }
    if order % 2 == 0 {
        nodes[order / 2] = 0.0;
    }

    let scale = 2.0 / (order as f64 * (order as f64 + 1.0));
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let p = legendre(order, x);
            scale / (p * p)
        })
        .collect();

    let deriv = lagrange_derivative_matrix(&nodes)?;
    Ok(QuadratureRule {
        order,
        nodes,
        weights,
        deriv,
    })
}

/// Barycentric weights `lambda_j = 1 / prod_{i != j} (x_j - x_i)`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for i in 0..n {
            if i != j {
                w[j] *= nodes[j] - nodes[i];
            }
        }
        w[j] = 1.0 / w[j];
    }
    w
}

/// Evaluate the cardinal polynomial `l_j(x)` in barycentric form.
pub fn lagrange_cardinal(nodes: &[f64], bary: &[f64], j: usize, x: f64) -> f64 {
    // On a node the cardinal property is exact.
    for (i, &xi) in nodes.iter().enumerate() {
        if x == xi {
            return if i == j { 1.0 } else { 0.0 };
        }
    }
    let mut denom = 0.0;
    for (k, &xk) in nodes.iter().enumerate() {
        denom += bary[k] / (x - xk);
    }
    (bary[j] / (x - nodes[j])) / denom
}

/// Lagrange derivative matrix with entry `(i, j) = l_j'(nodes[i])`.
///
/// Uses the barycentric formula; the diagonal is set by the negative-sum
/// trick so every row sums to zero exactly.
pub fn lagrange_derivative_matrix(nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = nodes.len();
    for w in nodes.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::DegenerateNodes);
        }
    }
    let bary = barycentric_weights(nodes);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                d[i][j] = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                row_sum += d[i][j];
            }
        }
        d[i][i] = -row_sum;
    }
    Ok(d)
}
