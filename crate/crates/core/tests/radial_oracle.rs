//! The radial stage against brute-force quadrature of the kernel integral
//!
//! ```text
//! K_n(a) = -(2n+1) k^3 int_0^R h_n(k max(a,rho)) j_n(k min(a,rho)) I_n(rho) rho^2 drho
//! ```
//!
//! with the unscaled Bessel functions assembled independently of the moment
//! and sweep machinery. This pins the distribution of every constant and
//! double-factorial factor across the moments and the sweep assembly.

use num_complex::Complex64;

use axiscat::besselmod::{jtilde_column, ytilde_column};
use axiscat::quad::adaptive;
use axiscat::radialkernel::{
    fit_radial, precompute_moments, radial_sweep, BesselNodeTable, RadialGrid,
};

fn double_factorial(n: i64) -> f64 {
    // (2n+1)!! style products for small n only
    let mut p = 1.0;
    let mut k = n;
    while k > 1 {
        p *= k as f64;
        k -= 2;
    }
    p
}

fn jn(n: usize, z: f64) -> f64 {
    let jt = jtilde_column(n, z).unwrap()[n];
    z.powi(n as i32) * jt / double_factorial(2 * n as i64 + 1)
}

fn yn(n: usize, z: f64) -> f64 {
    let yt = ytilde_column(n, z).unwrap()[n];
    -double_factorial(2 * n as i64 - 1) * yt / z.powi(n as i32 + 1)
}

fn hn(n: usize, z: f64) -> Complex64 {
    Complex64::new(jn(n, z), yn(n, z))
}

/// Brute-force K_n(a) for a density I_n supported on [0, r_sup].
fn kernel_oracle(
    n: usize,
    a: f64,
    k: f64,
    r_sup: f64,
    density: impl Fn(f64) -> f64 + Copy,
) -> Complex64 {
    let split = a.min(r_sup);
    let inner = adaptive(
        |rho| Complex64::new(jn(n, k * rho) * density(rho) * rho * rho, 0.0),
        0.0,
        split,
        1e-12,
    );
    let outer = adaptive(
        |rho| hn(n, k * rho) * density(rho) * rho * rho,
        split,
        r_sup,
        1e-12,
    );
    let total = hn(n, k * a) * inner + jn(n, k * a) * outer;
    -(2.0 * n as f64 + 1.0) * k * k * k * total
}

#[test]
fn sweep_reproduces_kernel_integral() {
    // I_n(rho) = rho^2 on [0, 1], zero beyond; F = 4, 4x4 grid, k = 1
    let k = 1.0;
    let grid = RadialGrid::build(4.0, 4, 4).unwrap();
    let f_max = 4;
    let moments = precompute_moments(&grid, f_max, k, 1).unwrap();
    let bessel = BesselNodeTable::build(&grid, k, f_max).unwrap();
    let density = |rho: f64| if rho <= 1.0 { rho * rho } else { 0.0 };
    let samples: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&r| Complex64::new(density(r), 0.0))
        .collect();
    let coeffs = fit_radial(&grid, &samples).unwrap();
    for n in 0..=f_max {
        let mut fast = vec![Complex64::default(); grid.node_count()];
        radial_sweep(&grid, &moments, n, &coeffs, &bessel, &mut fast).unwrap();
        let oracle: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&a| kernel_oracle(n, a, k, 1.0, density))
            .collect();
        let scale = oracle.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (g, (&f, &o)) in fast.iter().zip(&oracle).enumerate() {
            assert!(
                (f - o).norm() <= 1e-8 * scale,
                "n={n} node {g}: sweep {f} vs oracle {o} (scale {scale:.3e})"
            );
        }
    }
}

#[test]
fn sweep_error_halves_at_the_interpolation_order() {
    // smooth global density: the kernel error should drop by ~2^{N_d} when
    // the interval count doubles
    let k = 1.0;
    let n = 2usize;
    let density = |rho: f64| (-rho).exp() * (2.0 * rho).sin();
    let sup_err = |n_i: usize| -> f64 {
        let grid = RadialGrid::build(4.0, n_i, 4).unwrap();
        let moments = precompute_moments(&grid, n, k, 1).unwrap();
        let bessel = BesselNodeTable::build(&grid, k, n).unwrap();
        let samples: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::new(density(r), 0.0))
            .collect();
        let coeffs = fit_radial(&grid, &samples).unwrap();
        let mut fast = vec![Complex64::default(); grid.node_count()];
        radial_sweep(&grid, &moments, n, &coeffs, &bessel, &mut fast).unwrap();
        grid.nodes()
            .iter()
            .zip(&fast)
            .map(|(&a, &f)| (f - kernel_oracle(n, a, k, 4.0, density)).norm())
            .fold(0.0, f64::max)
    };
    let coarse = sup_err(4);
    let fine = sup_err(8);
    let order = (coarse / fine).log2();
    assert!(
        (order - 4.0).abs() < 1.5,
        "observed radial order {order} (errors {coarse:.3e} -> {fine:.3e})"
    );
}
