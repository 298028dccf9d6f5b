//! Clenshaw-Curtis quadrature and a small adaptive integrator.
//!
//! The closed rule of order n (n+1 points at the Chebyshev extrema
//! `cos(j pi / n)`) integrates polynomials of degree <= n exactly and
//! converges geometrically on analytic integrands; the moment precompute
//! refines it by doubling (steep high-mode power factors near the origin
//! can push individual subintervals to high orders). The adaptive routine is oracle plumbing for
//! tests and cross-checks.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::orthopoly::QuadratureRule;

/// Clenshaw-Curtis rule of order n on [-1, 1]: n+1 nodes `cos(j pi / n)`,
/// j = 0..=n (decreasing), n even.
pub fn clenshaw_curtis(order: usize) -> Result<QuadratureRule> {
    if order < 2 || order % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "clenshaw_curtis: order must be even and >= 2, got {order}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, QuadratureRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(rule) = guard.get(&order) {
        return Ok(rule.clone());
    }
    let n = order;
    let nodes: Vec<f64> = (0..=n)
        .map(|j| (j as f64 * std::f64::consts::PI / n as f64).cos())
        .collect();
    let weights: Vec<f64> = (0..=n)
        .map(|j| {
            let cj = if j == 0 || j == n { 1.0 } else { 2.0 };
            let mut s = 1.0;
            for m in 1..=n / 2 {
                let bm = if m == n / 2 { 1.0 } else { 2.0 };
                s -= bm * (2.0 * m as f64 * j as f64 * std::f64::consts::PI / n as f64).cos()
                    / (4.0 * (m * m) as f64 - 1.0);
            }
            cj * s / n as f64
        })
        .collect();
    let rule = QuadratureRule { nodes, weights };
    guard.insert(order, rule.clone());
    Ok(rule)
}

/// Integrate a complex-valued function over [a, b] by doubling the
/// Clenshaw-Curtis order until two refinements agree, bisecting when the
/// order cap is reached. Intended for oracles, not hot paths.
pub fn adaptive<F: Fn(f64) -> Complex64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    adaptive_depth(f, a, b, tol, 0)
}

fn apply_rule<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, order: usize) -> Complex64 {
    let rule = clenshaw_curtis(order).unwrap();
    let mid = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut acc = Complex64::default();
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += f(mid + hw * x) * w;
    }
    acc * hw
}

fn adaptive_depth<F: Fn(f64) -> Complex64 + Copy>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    if b <= a {
        return Complex64::default();
    }
    let mut prev = apply_rule(&f, a, b, 8);
    let mut order = 16;
    while order <= 256 {
        let cur = apply_rule(&f, a, b, order);
        if (cur - prev).norm() <= tol * cur.norm().max(1.0) {
            return cur;
        }
        prev = cur;
        order *= 2;
    }
    if depth >= 24 {
        return prev;
    }
    let mid = 0.5 * (a + b);
    adaptive_depth(f, a, mid, tol, depth + 1) + adaptive_depth(f, mid, b, tol, depth + 1)
}
