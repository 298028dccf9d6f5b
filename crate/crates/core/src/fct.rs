//! Fast Chebyshev analysis and synthesis at the Chebyshev (Gauss) points
//! `x_j = cos((2j+1) pi / (2N))`, j = 0..N-1 (decreasing order).
//!
//! `fct` maps samples to Chebyshev coefficients, `ifct` synthesizes samples
//! from coefficients; power-of-two sizes ride a half-sample cosine transform
//! built on the in-repo complex FFT, other sizes fall back to direct
//! summation (only oracles need those).
//!
//! Convention: analysis returns `c_n = (eps_n / N) sum_j f_j cos(n theta_j)`
//! with `eps_0 = 1`, `eps_n = 2`, so that `f_j = sum_n c_n T_n(x_j)` holds
//! exactly for polynomial data. (A direct least-norm Chebyshev fit at this
//! node ordering fixes the sign convention; see the tests.)

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Chebyshev coefficient vector (`coeffs[k]` multiplies `T_k`).
pub type ChebSeries = Vec<Complex64>;

/// `e^{-2 pi i num / den}` with exact integer octant reduction, accurate to
/// one ulp in each component.
pub(crate) fn unit_root(num: usize, den: usize) -> Complex64 {
    debug_assert!(den % 4 == 0 || den < 4);
    let num = num % den;
    if den < 4 {
        let phi = 2.0 * std::f64::consts::PI * num as f64 / den as f64;
        return Complex64::new(phi.cos(), -phi.sin());
    }
    let quarter = den / 4;
    let q = num / quarter;
    let r = num % quarter;
    let phi = 2.0 * std::f64::consts::PI * r as f64 / den as f64;
    let (c, s) = (phi.cos(), phi.sin());
    match q {
        0 => Complex64::new(c, -s),
        1 => Complex64::new(-s, -c),
        2 => Complex64::new(-c, s),
        _ => Complex64::new(s, c),
    }
}

/// Radix-2 FFT plan: bit-reversal permutation and twiddle table.
pub(crate) struct FftPlan {
    n: usize,
    rev: Vec<u32>,
    /// tw[j] = e^{-2 pi i j / n} for j < n/2
    tw: Vec<Complex64>,
}

impl FftPlan {
    fn new(n: usize) -> FftPlan {
        assert!(n.is_power_of_two());
        let bits = n.trailing_zeros();
        let rev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        let tw = (0..n / 2).map(|j| unit_root(j, n)).collect();
        FftPlan { n, rev, tw }
    }

    fn permute(&self, buf: &mut [Complex64]) {
        for i in 0..self.n {
            let j = self.rev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
    }

    /// In-place forward DFT: `X_k = sum_j x_j e^{-2 pi i jk / n}`.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n);
        self.permute(buf);
        let mut len = 2;
        while len <= self.n {
            let stride = self.n / len;
            for start in (0..self.n).step_by(len) {
                for j in 0..len / 2 {
                    let w = self.tw[j * stride];
                    let a = buf[start + j];
                    let b = buf[start + j + len / 2] * w;
                    buf[start + j] = a + b;
                    buf[start + j + len / 2] = a - b;
                }
            }
            len <<= 1;
        }
    }

    /// In-place inverse DFT (with the 1/n factor).
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n);
        self.permute(buf);
        let mut len = 2;
        while len <= self.n {
            let stride = self.n / len;
            for start in (0..self.n).step_by(len) {
                for j in 0..len / 2 {
                    let w = self.tw[j * stride].conj();
                    let a = buf[start + j];
                    let b = buf[start + j + len / 2] * w;
                    buf[start + j] = a + b;
                    buf[start + j + len / 2] = a - b;
                }
            }
            len <<= 1;
        }
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

/// Cosine-transform plan: FFT plan plus the quarter-twiddles
/// `h_n = e^{-i pi n / (2N)}`.
pub(crate) struct DctPlan {
    pub(crate) n: usize,
    fft: Arc<FftPlan>,
    half: Vec<Complex64>,
}

fn plan_cache() -> &'static Mutex<HashMap<usize, Arc<DctPlan>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DctPlan>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn dct_plan(n: usize) -> Arc<DctPlan> {
    let mut cache = plan_cache().lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let fft = Arc::new(FftPlan::new(n));
            let half = (0..n).map(|j| unit_root(j, 4 * n)).collect();
            Arc::new(DctPlan { n, fft, half })
        })
        .clone()
}

impl DctPlan {
    /// Cosine sums `X_n = sum_j f_j cos(n (2j+1) pi / (2N))` for complex data
    /// via one complex FFT.
    fn cosine_analysis(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        // interleave: even-indexed samples ascending, odd-indexed descending
        let mut v = vec![Complex64::default(); n];
        for m in 0..n.div_ceil(2) {
            v[m] = samples[2 * m];
        }
        for m in 0..n / 2 {
            v[n - 1 - m] = samples[2 * m + 1];
        }
        self.fft.forward(&mut v);
        let mut x = vec![Complex64::default(); n];
        for k in 0..n {
            let y = self.half[k] * v[k];
            let z = self.half[k].conj() * v[(n - k) % n];
            x[k] = 0.5 * (y + z);
        }
        x
    }

    /// Inverse of `cosine_analysis` composed with the eps/N scaling: given
    /// coefficients b, returns samples `f_j = sum_n b_n cos(n theta_j)`.
    fn cosine_synthesis(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        debug_assert!(coeffs.len() <= n);
        // X_n of the forward pass that would produce these coefficients
        let x = |k: usize| {
            let b = coeffs.get(k).copied().unwrap_or_default();
            let eps = if k == 0 { 1.0 } else { 2.0 };
            b * (n as f64 / eps)
        };
        let mut f = vec![Complex64::default(); n];
        f[0] = x(0);
        for k in 1..n {
            let i = Complex64::new(0.0, 1.0);
            f[k] = self.half[k].conj() * (x(k) - i * x(n - k));
        }
        self.fft.inverse(&mut f);
        // undo the interleave
        let mut out = vec![Complex64::default(); n];
        for m in 0..n.div_ceil(2) {
            out[2 * m] = f[m];
        }
        for m in 0..n / 2 {
            out[2 * m + 1] = f[n - 1 - m];
        }
        out
    }
}

fn theta(j: usize, n: usize) -> f64 {
    (2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64
}

/// Chebyshev analysis: samples at `chebyshev_nodes(N)` to N coefficients.
pub fn fct(samples: &[Complex64]) -> Result<ChebSeries> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidArgument("fct: empty input".into()));
    }
    if n == 1 {
        return Ok(vec![samples[0]]);
    }
    if n.is_power_of_two() {
        let plan = dct_plan(n);
        let x = plan.cosine_analysis(samples);
        return Ok(x
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                let eps = if k == 0 { 1.0 } else { 2.0 };
                v * (eps / n as f64)
            })
            .collect());
    }
    // direct summation fallback
    let mut out = vec![Complex64::default(); n];
    for (k, c) in out.iter_mut().enumerate() {
        let eps = if k == 0 { 1.0 } else { 2.0 };
        let mut acc = Complex64::default();
        for (j, &f) in samples.iter().enumerate() {
            acc += f * (k as f64 * theta(j, n)).cos();
        }
        *c = acc * (eps / n as f64);
    }
    Ok(out)
}

/// Chebyshev synthesis: evaluate `sum_k b_k T_k` at `chebyshev_nodes(n)`.
pub fn ifct(series: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("ifct: n = 0".into()));
    }
    if series.len() > n {
        return Err(Error::InvalidArgument(format!(
            "ifct: series length {} exceeds node count {}",
            series.len(),
            n
        )));
    }
    if n == 1 {
        return Ok(vec![series.first().copied().unwrap_or_default()]);
    }
    if n.is_power_of_two() {
        return Ok(dct_plan(n).cosine_synthesis(series));
    }
    let mut out = vec![Complex64::default(); n];
    for (j, f) in out.iter_mut().enumerate() {
        let t = theta(j, n);
        let mut acc = Complex64::default();
        for (k, &b) in series.iter().enumerate() {
            acc += b * (k as f64 * t).cos();
        }
        *f = acc;
    }
    Ok(out)
}

/// Truncation operator: keep coefficients with index < n.
pub fn truncate(series: &[Complex64], n: usize) -> ChebSeries {
    series[..series.len().min(n)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Independent oracle: coefficients by Chebyshev-Gauss quadrature at a
    /// much larger node count, with the polynomial evaluated from its
    /// monomial form.
    fn cheb_coeffs_by_quadrature(poly: &[f64], n: usize) -> Vec<f64> {
        let m = 8 * n.next_power_of_two();
        let eval = |x: f64| poly.iter().rev().fold(0.0, |acc, &a| acc * x + a);
        (0..n)
            .map(|k| {
                let eps = if k == 0 { 1.0 } else { 2.0 };
                let mut acc = 0.0;
                for i in 0..m {
                    let t = theta(i, m);
                    acc += eval(t.cos()) * (k as f64 * t).cos();
                }
                acc * eps / m as f64
            })
            .collect()
    }

    #[test]
    fn constant_samples_have_only_t0() {
        let f = vec![c(1.0); 16];
        let coeffs = fct(&f).unwrap();
        assert!((coeffs[0] - c(1.0)).norm() < 1e-14);
        for k in 1..16 {
            assert!(coeffs[k].norm() < 1e-14, "c_{k} = {}", coeffs[k]);
        }
    }

    #[test]
    fn linear_samples_have_only_t1() {
        let nodes = crate::orthopoly::chebyshev_nodes(8).unwrap();
        let f: Vec<Complex64> = nodes.iter().map(|&x| c(x)).collect();
        let coeffs = fct(&f).unwrap();
        assert!((coeffs[1] - c(1.0)).norm() < 1e-14);
        for k in [0, 2, 3, 4, 5, 6, 7] {
            assert!(coeffs[k].norm() < 1e-14);
        }
    }

    #[test]
    fn analysis_matches_direct_summation_oracle() {
        // random degree-63 polynomial, N = 64
        let n = 64;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rng = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let poly: Vec<f64> = (0..n).map(|_| rng()).collect();
        let nodes = crate::orthopoly::chebyshev_nodes(n).unwrap();
        let eval = |x: f64| poly.iter().rev().fold(0.0, |acc, &a| acc * x + a);
        let samples: Vec<Complex64> = nodes.iter().map(|&x| c(eval(x))).collect();
        let fast = fct(&samples).unwrap();
        let oracle = cheb_coeffs_by_quadrature(&poly, n);
        for k in 0..n {
            assert!(
                (fast[k].re - oracle[k]).abs() < 1e-12,
                "k={k}: {} vs {}",
                fast[k].re,
                oracle[k]
            );
        }
    }

    #[test]
    fn single_t3_coefficient_synthesizes_cosines() {
        let n = 32;
        let mut series = vec![Complex64::default(); 4];
        series[3] = c(1.0);
        let samples = ifct(&series, n).unwrap();
        for j in 0..n {
            let expect = (3.0 * theta(j, n)).cos();
            assert!((samples[j] - c(expect)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_series_gives_zero_samples() {
        let samples = ifct(&[], 8).unwrap();
        assert!(samples.iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn round_trip_is_identity() {
        for n in [128usize, 1024, 16384] {
            let mut state = 0x2545f4914f6cdd1du64 ^ n as u64;
            let mut rng = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            let coeffs: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng(), rng())).collect();
            let samples = ifct(&coeffs, n).unwrap();
            let back = fct(&samples).unwrap();
            let scale = coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let err = coeffs
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err / scale < 1e-12, "n={n}: round-trip error {err:.3e}");
        }
    }

    #[test]
    fn fast_path_matches_direct_path() {
        // same data through the pow2 FFT path and the direct fallback (odd n)
        let n = 64;
        let mut state = 7u64;
        let mut rng = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let samples: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng(), rng())).collect();
        let fast = fct(&samples).unwrap();
        // direct formula inline
        for k in 0..n {
            let eps = if k == 0 { 1.0 } else { 2.0 };
            let mut acc = Complex64::default();
            for (j, &f) in samples.iter().enumerate() {
                acc += f * (k as f64 * theta(j, n)).cos();
            }
            acc *= eps / n as f64;
            assert!((acc - fast[k]).norm() < 1e-13);
        }
    }

    #[test]
    fn truncate_behaviour() {
        let series: Vec<Complex64> = (0..8).map(|k| c(k as f64 + 1.0)).collect();
        assert_eq!(truncate(&series, 8), series);
        assert!(truncate(&series, 0).is_empty());
        // dropped tail is exactly the difference after re-expansion
        let n = 16;
        let full = ifct(&series, n).unwrap();
        let cut = ifct(&truncate(&series, 4), n).unwrap();
        for j in 0..n {
            let t = theta(j, n);
            let tail: Complex64 = (4..8).map(|k| series[k] * (k as f64 * t).cos()).sum();
            assert!((full[j] - cut[j] - tail).norm() < 1e-13);
        }
    }

    #[test]
    fn interpolation_identity_for_polynomial_data() {
        // analyzing m samples of a degree < m polynomial and truncating to
        // n <= m equals the analytic Chebyshev truncation
        let m = 32;
        let poly: Vec<f64> = (0..m).map(|k| ((k * k + 3) % 17) as f64 / 17.0 - 0.4).collect();
        let nodes = crate::orthopoly::chebyshev_nodes(m).unwrap();
        let eval = |x: f64| poly.iter().rev().fold(0.0, |acc, &a| acc * x + a);
        let samples: Vec<Complex64> = nodes.iter().map(|&x| c(eval(x))).collect();
        let got = truncate(&fct(&samples).unwrap(), 8);
        let oracle = cheb_coeffs_by_quadrature(&poly, m);
        for k in 0..8 {
            assert!((got[k].re - oracle[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(fct(&[]).is_err());
        assert!(ifct(&[c(1.0), c(2.0)], 1).is_err());
    }
}
