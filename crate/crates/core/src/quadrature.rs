//! Gauss–Legendre rules and a node-doubling driver.

use crate::error::{Error, Result};

pub const START_NODES: usize = 8;
pub const MAX_NODES: usize = 512;
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * pn - p0) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(node, weight)` pairs of the `n`-point rule mapped to `[a, b]`.
pub fn rule_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(&x, &w)| (mid + half * x, half * w)).collect()
}

/// Evaluates `eval` on rules with 8, 16, … nodes over `[a, b]` until two
/// successive results differ by at most `tol` under `dist`.
/// Returns the last result and its node count.
pub fn integrate_doubling<T>(
    a: f64,
    b: f64,
    tol: f64,
    mut eval: impl FnMut(&[(f64, f64)]) -> Result<T>,
    dist: impl Fn(&T, &T) -> f64,
) -> Result<(T, usize)> {
    let mut n = START_NODES;
    let mut prev = eval(&rule_on(a, b, n))?;
    let mut change = f64::INFINITY;
    while n < MAX_NODES {
        n *= 2;
        let next = eval(&rule_on(a, b, n))?;
        change = dist(&prev, &next);
        prev = next;
        if change <= tol {
            return Ok((prev, n));
        }
    }
    Err(Error::Quadrature { nodes: n, change })
}
