//! Radial discretization: the interval grid, per-interval Chebyshev fits,
//! precomputed moment tables, and the sweep recurrences that assemble the
//! radial integral K_n at every node in O(1) amortized work per node.
//!
//! With `j` indexing intervals and `s` subintervals, the moments are
//!
//! ```text
//! alpha_{j,s,n,m} = int (rho/b_hi)^{n+1} jt_n(k rho) T_m^j(rho) k^2 rho drho
//! beta_{j,s,n,m}  = int (b_lo/rho)^n    yt_n(k rho) T_m^j(rho) k^2 rho drho
//! gamma_{j,s,n,m} = int (k rho)^n/(2n+1)!! jt_n(k rho) T_m^j(rho) rho^2 drho
//! ```
//!
//! over the subinterval `[b_lo, b_hi]` (boundaries are the interval endpoints
//! and the Chebyshev nodes), with `T_m^j` the Chebyshev polynomial scaled to
//! the whole interval. The prefix sweep accumulates the `rho < rho_target`
//! part of the kernel from the alphas, the suffix sweep the `rho > rho_target`
//! part from the betas, and the gammas give the full-domain accumulator of
//! the remaining separable term:
//!
//! ```text
//! K_n(rho_g) = i (s(rho_g) + q(rho_g)) - k^3 (k rho_g)^n/(2n-1)!! jt_n(k rho_g) aleph_n
//! ```
//!
//! The recurrences here carry the sums in the "divided by the local Bessel
//! value" form, so only geometric ratios (all <= 1) appear; no division by a
//! Bessel value is ever performed.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::besselmod;
use crate::error::{Error, Result};
use crate::fct;
use crate::quad;

/// Partition of [0, R_max] into equal intervals carrying Chebyshev nodes.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    r_max: f64,
    n_i: usize,
    n_d: usize,
    /// All nodes, globally ascending; node (j, t) at index j * n_d + t.
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn build(r_max: f64, n_i: usize, n_d: usize) -> Result<RadialGrid> {
        if r_max <= 0.0 || n_i == 0 || n_d == 0 {
            return Err(Error::InvalidArgument(format!(
                "RadialGrid::build: need r_max > 0 and positive counts, got \
                 r_max = {r_max}, n_i = {n_i}, n_d = {n_d}"
            )));
        }
        let cheb = crate::orthopoly::chebyshev_nodes(n_d)?;
        let width = r_max / n_i as f64;
        let mut nodes = Vec::with_capacity(n_i * n_d);
        for j in 0..n_i {
            let mid = (j as f64 + 0.5) * width;
            let hw = 0.5 * width;
            // chebyshev_nodes is decreasing; nodes ascend within the interval
            for t in 0..n_d {
                nodes.push(mid - hw * cheb[t]);
            }
        }
        Ok(RadialGrid {
            r_max,
            n_i,
            n_d,
            nodes,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn interval_count(&self) -> usize {
        self.n_i
    }

    pub fn nodes_per_interval(&self) -> usize {
        self.n_d
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, j: usize, t: usize) -> f64 {
        self.nodes[j * self.n_d + t]
    }

    pub fn interval_bounds(&self, j: usize) -> (f64, f64) {
        let width = self.r_max / self.n_i as f64;
        (j as f64 * width, (j + 1) as f64 * width)
    }

    /// Subinterval boundaries of interval j: endpoints plus the nodes.
    fn boundary(&self, j: usize, s: usize) -> f64 {
        let (lo, hi) = self.interval_bounds(j);
        if s == 0 {
            lo
        } else if s == self.n_d + 1 {
            hi
        } else {
            self.node(j, s - 1)
        }
    }

    /// Which interval contains rho (clamped to the domain).
    pub fn interval_of(&self, rho: f64) -> usize {
        let width = self.r_max / self.n_i as f64;
        ((rho / width) as usize).min(self.n_i - 1)
    }
}

/// Complex Legendre-mode coefficients at every radial node; the solver's
/// state vector. Node-major layout: entry (g, n) at `g * n_modes + n`.
#[derive(Debug, Clone)]
pub struct ModalField {
    pub n_modes: usize,
    pub n_nodes: usize,
    pub data: Vec<Complex64>,
}

impl ModalField {
    pub fn zeros(n_modes: usize, n_nodes: usize) -> ModalField {
        ModalField {
            n_modes,
            n_nodes,
            data: vec![Complex64::default(); n_modes * n_nodes],
        }
    }

    pub fn node(&self, g: usize) -> &[Complex64] {
        &self.data[g * self.n_modes..(g + 1) * self.n_modes]
    }

    pub fn node_mut(&mut self, g: usize) -> &mut [Complex64] {
        &mut self.data[g * self.n_modes..(g + 1) * self.n_modes]
    }

    /// Reconstruct the field at node `g`, polar angle with cosine `ct`.
    pub fn eval_at_node(&self, g: usize, ct: f64) -> Complex64 {
        let modes = self.node(g);
        let mut acc = modes[0];
        if self.n_modes == 1 {
            return acc;
        }
        let mut pm1 = 1.0;
        let mut p = ct;
        acc += modes[1] * ct;
        for n in 2..self.n_modes {
            let kf = (n - 1) as f64;
            let next = ((2.0 * kf + 1.0) * ct * p - kf * pm1) / (kf + 1.0);
            pm1 = p;
            p = next;
            acc += modes[n] * p;
        }
        acc
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for c in self.data.iter_mut() {
            *c *= factor;
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: Complex64, other: &ModalField) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    /// Conjugated inner product `<self, other>`.
    pub fn inner(&self, other: &ModalField) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Per-interval Chebyshev interpolation of one mode's samples.
///
/// `samples[g]` are values at the global nodes; the result holds `n_d`
/// coefficients per interval (interval-major, `coeffs[j * n_d + m]`).
pub fn fit_radial(grid: &RadialGrid, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let (n_i, n_d) = (grid.n_i, grid.n_d);
    if samples.len() != n_i * n_d {
        return Err(Error::InvalidArgument(format!(
            "fit_radial: expected {} samples, got {}",
            n_i * n_d,
            samples.len()
        )));
    }
    let mut coeffs = Vec::with_capacity(n_i * n_d);
    let mut scratch = vec![Complex64::default(); n_d];
    for j in 0..n_i {
        // grid nodes ascend in rho; chebyshev_nodes order is descending x
        for t in 0..n_d {
            scratch[t] = samples[j * n_d + (n_d - 1 - t)];
        }
        coeffs.extend_from_slice(&fct::fct(&scratch)?);
    }
    Ok(coeffs)
}

/// Evaluate a per-interval fit at an arbitrary radius in [0, R_max].
pub fn eval_radial_fit(grid: &RadialGrid, coeffs: &[Complex64], rho: f64) -> Complex64 {
    let j = grid.interval_of(rho);
    let (lo, hi) = grid.interval_bounds(j);
    let x = (rho - 0.5 * (lo + hi)) / (0.5 * (hi - lo));
    let c = &coeffs[j * grid.n_d..(j + 1) * grid.n_d];
    // direct Chebyshev recurrence
    let mut acc = c[0];
    let mut tm1 = 1.0;
    let mut t = x;
    if grid.n_d > 1 {
        acc += c[1] * x;
    }
    for m in 2..grid.n_d {
        let next = 2.0 * x * t - tm1;
        tm1 = t;
        t = next;
        acc += c[m] * next;
    }
    acc
}

/// Modified Bessel values at every grid node, for all modes up to `n_max`.
/// Node-major: entry (g, n) at `g * (n_max + 1) + n`.
#[derive(Debug, Clone)]
pub struct BesselNodeTable {
    pub n_max: usize,
    jt: Vec<f64>,
    yt: Vec<f64>,
}

impl BesselNodeTable {
    pub fn build(grid: &RadialGrid, wavenumber: f64, n_max: usize) -> Result<BesselNodeTable> {
        let stride = n_max + 1;
        let mut jt = Vec::with_capacity(grid.node_count() * stride);
        let mut yt = Vec::with_capacity(grid.node_count() * stride);
        for &rho in grid.nodes() {
            jt.extend_from_slice(&besselmod::jtilde_column(n_max, wavenumber * rho)?);
            yt.extend_from_slice(&besselmod::ytilde_column(n_max, wavenumber * rho)?);
        }
        Ok(BesselNodeTable { n_max, jt, yt })
    }

    #[inline]
    pub fn jt(&self, g: usize, n: usize) -> f64 {
        self.jt[g * (self.n_max + 1) + n]
    }

    #[inline]
    pub fn yt(&self, g: usize, n: usize) -> f64 {
        self.yt[g * (self.n_max + 1) + n]
    }
}

/// Precomputed radial moments alpha, beta, gamma (real in exact arithmetic,
/// stored as f64) for all intervals, subintervals, modes and Chebyshev
/// degrees.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub r_max: f64,
    pub wavenumber: f64,
    pub n_i: usize,
    pub n_d: usize,
    pub f_max: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

impl MomentTable {
    #[inline]
    fn idx(&self, j: usize, s: usize, n: usize, m: usize) -> usize {
        ((j * (self.n_d + 1) + s) * (self.f_max + 1) + n) * self.n_d + m
    }

    #[inline]
    pub fn alpha(&self, j: usize, s: usize, n: usize, m: usize) -> f64 {
        self.alpha[self.idx(j, s, n, m)]
    }

    #[inline]
    pub fn beta(&self, j: usize, s: usize, n: usize, m: usize) -> f64 {
        self.beta[self.idx(j, s, n, m)]
    }

    #[inline]
    pub fn gamma(&self, j: usize, s: usize, n: usize, m: usize) -> f64 {
        self.gamma[self.idx(j, s, n, m)]
    }

    pub fn matches(&self, grid: &RadialGrid, f_max: usize, wavenumber: f64) -> bool {
        self.r_max == grid.r_max
            && self.n_i == grid.n_i
            && self.n_d == grid.n_d
            && self.f_max >= f_max
            && self.wavenumber == wavenumber
    }
}

/// One subinterval's moment blocks at a fixed quadrature order.
/// Blocks are (f_max+1) x n_d, mode-major.
fn subinterval_blocks(
    a: f64,
    b: f64,
    interval_mid: f64,
    interval_hw: f64,
    wavenumber: f64,
    f_max: usize,
    n_d: usize,
    order: usize,
) -> Result<[Vec<f64>; 3]> {
    let len = (f_max + 1) * n_d;
    let mut alpha = vec![0.0; len];
    let mut beta = vec![0.0; len];
    let mut gamma = vec![0.0; len];
    if b - a <= 0.0 {
        return Ok([alpha, beta, gamma]);
    }
    let rule = quad::clenshaw_curtis(order)?;
    let mid = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let nq = rule.nodes.len();
    let mut rho_q = vec![0.0; nq];
    let mut w_q = vec![0.0; nq];
    let mut tm = vec![0.0; nq * n_d];
    let mut jt_cols = Vec::with_capacity(nq);
    let mut yt_cols = Vec::with_capacity(nq);
    for q in 0..nq {
        let rho = mid + hw * rule.nodes[q];
        rho_q[q] = rho;
        w_q[q] = hw * rule.weights[q];
        let x = (rho - interval_mid) / interval_hw;
        tm[q * n_d] = 1.0;
        if n_d > 1 {
            tm[q * n_d + 1] = x;
        }
        for m in 2..n_d {
            tm[q * n_d + m] = 2.0 * x * tm[q * n_d + m - 1] - tm[q * n_d + m - 2];
        }
        jt_cols.push(besselmod::jtilde_column(f_max, wavenumber * rho)?);
        yt_cols.push(besselmod::ytilde_column(f_max, wavenumber * rho)?);
    }
    let k2 = wavenumber * wavenumber;
    // running power factors per quadrature node
    let mut p_alpha: Vec<f64> = rho_q.iter().map(|&r| r / b).collect(); // (rho/b)^{n+1}
    let mut p_beta = vec![1.0; nq]; // (a/rho)^n
    let mut p_gamma = vec![1.0; nq]; // (k rho)^n / (2n+1)!!
    for n in 0..=f_max {
        for q in 0..nq {
            let f_a = w_q[q] * p_alpha[q] * jt_cols[q][n] * k2 * rho_q[q];
            let f_b = w_q[q] * p_beta[q] * yt_cols[q][n] * k2 * rho_q[q];
            let f_g = w_q[q] * p_gamma[q] * jt_cols[q][n] * rho_q[q] * rho_q[q];
            for m in 0..n_d {
                let t = tm[q * n_d + m];
                alpha[n * n_d + m] += f_a * t;
                beta[n * n_d + m] += f_b * t;
                gamma[n * n_d + m] += f_g * t;
            }
        }
        let nf = n as f64;
        for q in 0..nq {
            p_alpha[q] *= rho_q[q] / b;
            p_beta[q] *= if rho_q[q] > 0.0 { a / rho_q[q] } else { 0.0 };
            p_gamma[q] *= wavenumber * rho_q[q] / (2.0 * nf + 3.0);
        }
    }
    Ok([alpha, beta, gamma])
}

/// Refine one subinterval until successive Clenshaw-Curtis orders agree to
/// 1e-13 relative (with an absolute floor tied to the block scale).
fn subinterval_moments_adaptive(
    grid: &RadialGrid,
    j: usize,
    s: usize,
    wavenumber: f64,
    f_max: usize,
) -> Result<[Vec<f64>; 3]> {
    let a = grid.boundary(j, s);
    let b = grid.boundary(j, s + 1);
    let (lo, hi) = grid.interval_bounds(j);
    let (mid, hw) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let n_d = grid.n_d;
    if b - a <= 0.0 {
        let len = (f_max + 1) * n_d;
        return Ok([vec![0.0; len], vec![0.0; len], vec![0.0; len]]);
    }
    let mut prev = subinterval_blocks(a, b, mid, hw, wavenumber, f_max, n_d, 8)?;
    let mut order = 16;
    loop {
        let cur = subinterval_blocks(a, b, mid, hw, wavenumber, f_max, n_d, order)?;
        let mut worst = (0.0f64, 0usize, 0usize);
        for fam in 0..3 {
            let scale = cur[fam].iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            for (i, (&new, &old)) in cur[fam].iter().zip(&prev[fam]).enumerate() {
                let d = (new - old).abs();
                // relative gate, with an absolute floor at the family's
                // roundoff plateau
                let gate = (1e-13 * new.abs()).max(1e-14 * scale).max(1e-300);
                if d > gate {
                    let rel = d / new.abs().max(1e-14 * scale).max(1e-300);
                    if rel > worst.0 {
                        worst = (rel, i / n_d, i % n_d);
                    }
                }
            }
        }
        if worst.0 == 0.0 {
            return Ok(cur);
        }
        if order >= 1024 {
            return Err(Error::QuadratureDivergence {
                interval: j,
                subinterval: s,
                mode: worst.1,
                degree: worst.2,
                rel_change: worst.0,
            });
        }
        prev = cur;
        order *= 2;
    }
}

/// Precompute the full moment table. `threads` > 1 distributes subintervals
/// over that many OS threads (results are identical regardless).
pub fn precompute_moments(
    grid: &RadialGrid,
    f_max: usize,
    wavenumber: f64,
    threads: usize,
) -> Result<MomentTable> {
    if wavenumber <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "precompute_moments: wavenumber must be positive, got {wavenumber}"
        )));
    }
    let (n_i, n_d) = (grid.n_i, grid.n_d);
    let block = (f_max + 1) * n_d;
    let n_sub = n_i * (n_d + 1);
    let mut alpha = vec![0.0; n_sub * block];
    let mut beta = vec![0.0; n_sub * block];
    let mut gamma = vec![0.0; n_sub * block];

    let work = |range: std::ops::Range<usize>,
                alpha: &mut [f64],
                beta: &mut [f64],
                gamma: &mut [f64]|
     -> Result<()> {
        for (offset, sub) in range.enumerate() {
            let (j, s) = (sub / (n_d + 1), sub % (n_d + 1));
            let [a, b, g] = subinterval_moments_adaptive(grid, j, s, wavenumber, f_max)?;
            alpha[offset * block..(offset + 1) * block].copy_from_slice(&a);
            beta[offset * block..(offset + 1) * block].copy_from_slice(&b);
            gamma[offset * block..(offset + 1) * block].copy_from_slice(&g);
        }
        Ok(())
    };

    if threads <= 1 {
        work(0..n_sub, &mut alpha, &mut beta, &mut gamma)?;
    } else {
        let chunk = n_sub.div_ceil(threads);
        let results: Vec<Result<()>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            let mut a_rest: &mut [f64] = &mut alpha;
            let mut b_rest: &mut [f64] = &mut beta;
            let mut g_rest: &mut [f64] = &mut gamma;
            let mut start = 0;
            while start < n_sub {
                let end = (start + chunk).min(n_sub);
                let take = (end - start) * block;
                let (a_head, a_tail) = a_rest.split_at_mut(take);
                let (b_head, b_tail) = b_rest.split_at_mut(take);
                let (g_head, g_tail) = g_rest.split_at_mut(take);
                a_rest = a_tail;
                b_rest = b_tail;
                g_rest = g_tail;
                let range = start..end;
                handles.push(scope.spawn(move || work(range, a_head, b_head, g_head)));
                start = end;
            }
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for r in results {
            r?;
        }
    }

    Ok(MomentTable {
        r_max: grid.r_max,
        wavenumber,
        n_i,
        n_d,
        f_max,
        alpha,
        beta,
        gamma,
    })
}

/// Assemble `K_n` at every node from the per-interval fit coefficients of
/// `I_n` via the prefix/suffix sweeps and the gamma accumulator.
pub fn radial_sweep(
    grid: &RadialGrid,
    moments: &MomentTable,
    n: usize,
    fit_coeffs: &[Complex64],
    bessel: &BesselNodeTable,
    out: &mut [Complex64],
) -> Result<()> {
    let (n_i, n_d) = (grid.n_i, grid.n_d);
    if moments.r_max != grid.r_max || moments.n_i != n_i || moments.n_d != n_d || n > moments.f_max
    {
        return Err(Error::CacheMismatch(format!(
            "radial_sweep: moment table does not cover grid/mode (n = {n}, table f_max = {})",
            moments.f_max
        )));
    }
    if fit_coeffs.len() != n_i * n_d || out.len() != n_i * n_d || bessel.n_max < n {
        return Err(Error::InvalidArgument(
            "radial_sweep: mismatched buffer sizes".into(),
        ));
    }
    let k = moments.wavenumber;
    // per-subinterval dot products mu, zeta, xi
    let n_sub = n_d + 1;
    let mut mu = vec![Complex64::default(); n_i * n_sub];
    let mut zeta = vec![Complex64::default(); n_i * n_sub];
    let mut aleph = Complex64::default();
    for j in 0..n_i {
        let c = &fit_coeffs[j * n_d..(j + 1) * n_d];
        for s in 0..n_sub {
            let mut acc_mu = Complex64::default();
            let mut acc_zeta = Complex64::default();
            let mut acc_xi = Complex64::default();
            for (m, &cm) in c.iter().enumerate() {
                acc_mu += cm * moments.alpha(j, s, n, m);
                acc_zeta += cm * moments.beta(j, s, n, m);
                acc_xi += cm * moments.gamma(j, s, n, m);
            }
            mu[j * n_sub + s] = acc_mu;
            zeta[j * n_sub + s] = acc_zeta;
            aleph += acc_xi;
        }
    }

    let np1 = (n + 1) as i32;
    let ni32 = n as i32;
    // prefix sweep: S normalized to the current node
    let mut s_acc = Complex64::default();
    for j in 0..n_i {
        for t in 0..n_d {
            let g = j * n_d + t;
            let cur = grid.node(j, t);
            if t == 0 {
                if j == 0 {
                    s_acc = mu[0];
                } else {
                    let prev = grid.node(j - 1, n_d - 1);
                    let (_, prev_hi) = grid.interval_bounds(j - 1);
                    s_acc = (s_acc * (prev / prev_hi).powi(np1) + mu[(j - 1) * n_sub + n_d])
                        * (prev_hi / cur).powi(np1)
                        + mu[j * n_sub];
                }
            } else {
                let prev = grid.node(j, t - 1);
                s_acc = s_acc * (prev / cur).powi(np1) + mu[j * n_sub + t];
            }
            out[g] = bessel.yt(g, n) * s_acc;
        }
    }
    // suffix sweep, descending
    let mut q_acc = Complex64::default();
    for j in (0..n_i).rev() {
        let (_, hi) = grid.interval_bounds(j);
        for t in (0..n_d).rev() {
            let g = j * n_d + t;
            let cur = grid.node(j, t);
            if t == n_d - 1 {
                if j == n_i - 1 {
                    q_acc = zeta[j * n_sub + n_d];
                } else {
                    let next = grid.node(j + 1, 0);
                    q_acc = (q_acc * (hi / next).powi(ni32) + zeta[(j + 1) * n_sub])
                        * (cur / hi).powi(ni32)
                        + zeta[j * n_sub + n_d];
                }
            } else {
                let next = grid.node(j, t + 1);
                q_acc = q_acc * (cur / next).powi(ni32) + zeta[j * n_sub + t + 1];
            }
            out[g] += bessel.jt(g, n) * q_acc;
        }
    }
    // assemble: K = i (s + q) - k^3 (k rho)^n/(2n-1)!! jt aleph
    let i_unit = Complex64::new(0.0, 1.0);
    let k3 = k * k * k;
    for (g, val) in out.iter_mut().enumerate() {
        let rho = grid.nodes[g];
        let mut d = 1.0f64;
        for t in 0..n {
            d *= k * rho / (2.0 * t as f64 + 1.0);
        }
        *val = i_unit * *val - k3 * d * bessel.jt(g, n) * aleph;
    }
    Ok(())
}

// -------------------------------------------------------------------------
// Moment cache file.
//
// Layout (all little-endian):
//   bytes 0..8    magic "AXMOM001"
//   f64           r_max
//   f64           wavenumber
//   u64           n_i
//   u64           n_d
//   u64           f_max
//   u64           FNV-1a hash of the payload bytes
//   payload       alpha, beta, gamma in [j][s][n][m] order, each moment as
//                 two f64 (re, im); the imaginary parts are zero.
// -------------------------------------------------------------------------

const MOMENT_MAGIC: &[u8; 8] = b"AXMOM001";

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl MomentTable {
    fn payload_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity((self.alpha.len() * 3) * 16);
        for fam in [&self.alpha, &self.beta, &self.gamma] {
            for &v in fam.iter() {
                out.extend_from_slice(&v.to_le_bytes());
                out.extend_from_slice(&0.0f64.to_le_bytes());
            }
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let payload = self.payload_bytes();
        let mut f = std::fs::File::create(path)?;
        f.write_all(MOMENT_MAGIC)?;
        f.write_all(&self.r_max.to_le_bytes())?;
        f.write_all(&self.wavenumber.to_le_bytes())?;
        f.write_all(&(self.n_i as u64).to_le_bytes())?;
        f.write_all(&(self.n_d as u64).to_le_bytes())?;
        f.write_all(&(self.f_max as u64).to_le_bytes())?;
        f.write_all(&fnv1a(&payload).to_le_bytes())?;
        f.write_all(&payload)?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<MomentTable> {
        let mut f = std::fs::File::open(path)?;
        let mut head = [0u8; 8 + 16 + 32];
        f.read_exact(&mut head)?;
        if &head[..8] != MOMENT_MAGIC {
            return Err(Error::CacheMismatch(format!(
                "{}: bad magic",
                path.display()
            )));
        }
        let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(head[o..o + 8].try_into().unwrap());
        let r_max = f64_at(8);
        let wavenumber = f64_at(16);
        let n_i = u64_at(24) as usize;
        let n_d = u64_at(32) as usize;
        let f_max = u64_at(40) as usize;
        let hash = u64_at(48);
        let count = n_i * (n_d + 1) * (f_max + 1) * n_d;
        let mut payload = vec![0u8; count * 3 * 16];
        f.read_exact(&mut payload)?;
        if fnv1a(&payload) != hash {
            return Err(Error::CacheMismatch(format!(
                "{}: payload hash mismatch",
                path.display()
            )));
        }
        let read_family = |fam: usize| -> Vec<f64> {
            (0..count)
                .map(|i| {
                    let o = (fam * count + i) * 16;
                    f64::from_le_bytes(payload[o..o + 8].try_into().unwrap())
                })
                .collect()
        };
        Ok(MomentTable {
            r_max,
            wavenumber,
            n_i,
            n_d,
            f_max,
            alpha: read_family(0),
            beta: read_family(1),
            gamma: read_family(2),
        })
    }
}

/// Cache file name for a parameter set.
pub fn cache_file_name(r_max: f64, n_i: usize, n_d: usize, f_max: usize, k: f64) -> String {
    let mut key = Vec::new();
    key.extend_from_slice(&r_max.to_le_bytes());
    key.extend_from_slice(&k.to_le_bytes());
    key.extend_from_slice(&(n_i as u64).to_le_bytes());
    key.extend_from_slice(&(n_d as u64).to_le_bytes());
    key.extend_from_slice(&(f_max as u64).to_le_bytes());
    format!("moments-{:016x}.bin", fnv1a(&key))
}

/// Load a cached table if `dir` holds a matching one, else compute (and
/// write it back when a directory is given).
pub fn load_or_compute(
    dir: Option<&Path>,
    grid: &RadialGrid,
    f_max: usize,
    wavenumber: f64,
    threads: usize,
) -> Result<MomentTable> {
    let path: Option<PathBuf> = dir.map(|d| {
        d.join(cache_file_name(
            grid.r_max,
            grid.n_i,
            grid.n_d,
            f_max,
            wavenumber,
        ))
    });
    if let Some(p) = &path {
        if p.exists() {
            let table = MomentTable::read_from(p)?;
            if table.matches(grid, f_max, wavenumber) {
                return Ok(table);
            }
            return Err(Error::CacheMismatch(format!(
                "{}: header does not match requested parameters",
                p.display()
            )));
        }
    }
    let table = precompute_moments(grid, f_max, wavenumber, threads)?;
    if let Some(p) = &path {
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
        table.write_to(p)?;
    }
    Ok(table)
}
