//! Shared oracle helpers for the integration tests: unscaled spherical
//! Bessel functions assembled from the modified columns, and a brute-force
//! dense application of the integral operator.

use num_complex::Complex64;

use axiscat::besselmod::{jtilde_column, ytilde_column};
use axiscat::operator::{OperatorContext, SolverConfig};
use axiscat::orthopoly;
use axiscat::quad::adaptive;
use axiscat::radialkernel::{eval_radial_fit, fit_radial, RadialGrid};
use axiscat::scatterers::Scatterer;

pub fn double_factorial(n: i64) -> f64 {
    let mut p = 1.0;
    let mut k = n;
    while k > 1 {
        p *= k as f64;
        k -= 2;
    }
    p
}

pub fn jn(n: usize, z: f64) -> f64 {
    let jt = jtilde_column(n, z).unwrap()[n];
    z.powi(n as i32) * jt / double_factorial(2 * n as i64 + 1)
}

pub fn yn(n: usize, z: f64) -> f64 {
    let yt = ytilde_column(n, z).unwrap()[n];
    -double_factorial(2 * n as i64 - 1) * yt / z.powi(n as i32 + 1)
}

pub fn hn(n: usize, z: f64) -> Complex64 {
    Complex64::new(jn(n, z), yn(n, z))
}

/// Brute-force radial kernel for a complex density given as a per-interval
/// Chebyshev fit: adaptive quadrature of
/// `-(2n+1) k^3 int h_n(k rho_>) j_n(k rho_<) I(rho) rho^2 drho`
/// over the intervals where the fit is nonzero, split at the target radius.
pub fn kernel_bruteforce(
    grid: &RadialGrid,
    n: usize,
    a: f64,
    k: f64,
    fit: &[Complex64],
) -> Complex64 {
    let mut total = Complex64::default();
    for j in 0..grid.interval_count() {
        let c = &fit[j * grid.nodes_per_interval()..(j + 1) * grid.nodes_per_interval()];
        if c.iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        let (lo, hi) = grid.interval_bounds(j);
        let mut pieces = vec![lo, hi];
        if a > lo && a < hi {
            pieces = vec![lo, a, hi];
        }
        for w in pieces.windows(2) {
            let (p0, p1) = (w[0], w[1]);
            let part = adaptive(
                |rho| {
                    let dens = eval_radial_fit(grid, fit, rho);
                    let kernel = if rho <= a {
                        hn(n, k * a) * jn(n, k * rho)
                    } else {
                        hn(n, k * rho) * jn(n, k * a)
                    };
                    kernel * dens * rho * rho
                },
                p0,
                p1,
                1e-12,
            );
            total += part;
        }
    }
    -(2.0 * n as f64 + 1.0) * k * k * k * total
}

/// Angular integrals `I_n = int u(t) m(t) P_n(t) dt` by Gauss-Legendre
/// quadrature from mode vectors.
pub fn angular_bruteforce(
    u_modes: &[Complex64],
    m_modes: &[Complex64],
    f: usize,
) -> Vec<Complex64> {
    let deg = u_modes.len() + m_modes.len() + f;
    let rule = orthopoly::gauss_legendre((deg / 2 + 2).max(16)).unwrap();
    let top = (u_modes.len().max(m_modes.len())).max(f + 1) - 1;
    let mut out = vec![Complex64::default(); f + 1];
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let col = orthopoly::legendre_column(top, t);
        let ut: Complex64 = u_modes.iter().enumerate().map(|(i, &c)| c * col[i]).sum();
        let mt: Complex64 = m_modes.iter().enumerate().map(|(i, &c)| c * col[i]).sum();
        let um = ut * mt * w;
        for (n, o) in out.iter_mut().enumerate() {
            *o += um * col[n];
        }
    }
    out
}

/// Apply `A = I - (i/2) K` by brute force: direct angular quadrature at
/// every node, the same per-interval fit as the fast path, and adaptive
/// radial quadrature. Shares no code with the moment/sweep machinery.
pub fn apply_bruteforce(
    ctx: &OperatorContext,
    cfg: &SolverConfig,
    scatterer: &Scatterer,
    v: &[Complex64],
) -> Vec<Complex64> {
    let grid = &ctx.grid;
    let f = cfg.f;
    let n_modes = f + 1;
    let n_nodes = grid.node_count();
    let k = cfg.wavenumber;
    // angular stage
    let mut i_all = vec![Complex64::default(); n_modes * n_nodes];
    for g in 0..n_nodes {
        let m_modes = scatterer
            .contrast_coeffs(grid.nodes()[g], 2 * f)
            .unwrap();
        let u_modes = &v[g * n_modes..(g + 1) * n_modes];
        let i_n = angular_bruteforce(u_modes, &m_modes, f);
        for n in 0..n_modes {
            i_all[n * n_nodes + g] = i_n[n];
        }
    }
    // radial stage
    let mut out = v.to_vec();
    let half_i = Complex64::new(0.0, 0.5);
    for n in 0..n_modes {
        let samples = &i_all[n * n_nodes..(n + 1) * n_nodes];
        let fit = fit_radial(grid, samples).unwrap();
        for g in 0..n_nodes {
            let kk = kernel_bruteforce(grid, n, grid.nodes()[g], k, &fit);
            out[g * n_modes + n] -= half_i * kk;
        }
    }
    out
}
