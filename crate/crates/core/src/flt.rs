//! Fast Legendre Transform and its inverse.
//!
//! The forward transform maps 2N samples at the Chebyshev points `x_i^{2N}`
//! to the N Legendre coefficients
//!
//! ```text
//! c_m = (1/tau_m) sum_i P_m(x_i^{2N}) f(x_i^{2N}) w_i^{2N},   tau_m = 2/(2m+1),
//! ```
//!
//! exactly (up to roundoff) whenever f is a polynomial of degree <= N. The
//! fast path runs the truncation cascade on associated polynomials: the
//! quantities `Z_l^K = T_K(f p_l)` are halved in K per stage via
//!
//! ```text
//! Z_{l+K}^K   = T_K( S_2K( Z_l^2K Q_{l,K}   + Z_{l-1}^2K R_{l,K}   ) )
//! Z_{l+K-1}^K = T_K( S_2K( Z_l^2K Q_{l,K-1} + Z_{l-1}^2K R_{l,K-1} ) )
//! ```
//!
//! until each `Z_l^1` holds the Chebyshev-weighted average
//! `(1/M) sum_i p_l(x_i) f(x_i)`, which is rescaled by the Fejer weights and
//! `1/tau_m` to the normalization above. The cascade is algebraically exact
//! for arbitrary sample vectors; cost is O(N log^2 N).
//!
//! The inverse runs the factored block form: interleave the coefficients,
//! then per stage synthesize blocks at `x^{2K}`, apply the 2x4 block of
//! diagonal Q/R value matrices, and re-analyze; the last stage combines the
//! two remaining blocks with `diag(P_0)`, `diag(P_1)`. Also O(N log^2 N).
//!
//! Plans carry the per-stage Q/R node-value tables. With
//! `TablePrecision::Extended` those tables are precomputed in double-double
//! arithmetic (at dd-accurate nodes) and rounded, which keeps the fast
//! transforms at direct-transform accuracy for large N; `Plain` precomputes
//! in f64 and loses digits as N grows.
//!
//! Direct O(N^2) reference transforms (`dlt`, `idlt`, `idlt_extended`) use
//! the same sampling convention and serve as oracles.

use num_complex::Complex64;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::fct::{fct, ifct};
use crate::orthopoly;

/// Precision of the plan's precomputed recurrence tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TablePrecision {
    /// Tables evaluated with the three-term recurrence in f64.
    Plain,
    /// Tables evaluated in double-double and rounded to f64.
    Extended,
}

/// Q/R values at the `2K` Chebyshev nodes for one `(l, K)` pair.
struct QrBlock {
    q_km1: Vec<f64>,
    r_km1: Vec<f64>,
    q_k: Vec<f64>,
    r_k: Vec<f64>,
}

/// All blocks of one cascade level (fixed K, l = 1 + 2K j).
struct PlanStage {
    k: usize,
    blocks: Vec<QrBlock>,
}

/// Precomputed plan for transforms of one size.
///
/// A plan for coefficient count N serves both directions: `flt` consumes 2N
/// samples, `iflt` produces them. Plans are immutable after construction and
/// safe to share across threads.
pub struct FltPlan {
    n: usize,
    size: usize,
    precision: TablePrecision,
    /// Fejer weights w^{2N}.
    weights: Vec<f64>,
    /// Chebyshev nodes x^{2N}.
    nodes: Vec<f64>,
    /// Stages ordered by decreasing K = size/4, size/8, ..., 2... indexed so
    /// that `stage_index(k)` recovers the right entry.
    stages: Vec<PlanStage>,
}

impl FltPlan {
    /// Build a plan for N coefficients / 2N samples. N must be a power of
    /// two and at least 2.
    pub fn new(n: usize, precision: TablePrecision) -> Result<FltPlan> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "FltPlan::new: coefficient count must be a power of two >= 2, got {n}"
            )));
        }
        let size = 2 * n;
        let weights = orthopoly::fejer_weights(size)?.weights;
        let nodes = orthopoly::chebyshev_nodes(size)?;
        let mut stages = Vec::new();
        let mut k = size / 2;
        while k >= 2 {
            let n_blocks = size / (2 * k);
            let mut blocks = Vec::with_capacity(n_blocks);
            for j in 0..n_blocks {
                let l = 1 + 2 * k * j;
                let [q_km1, r_km1, q_k, r_k] = match precision {
                    TablePrecision::Extended => orthopoly::assoc_pair_tables_dd(l, k, 2 * k),
                    TablePrecision::Plain => orthopoly::assoc_pair_tables_f64(l, k, 2 * k),
                };
                blocks.push(QrBlock {
                    q_km1,
                    r_km1,
                    q_k,
                    r_k,
                });
            }
            stages.push(PlanStage { k, blocks });
            k /= 2;
        }
        Ok(FltPlan {
            n,
            size,
            precision,
            weights,
            nodes,
            stages,
        })
    }

    /// Coefficient count N.
    pub fn coeff_count(&self) -> usize {
        self.n
    }

    /// Sample count 2N.
    pub fn sample_count(&self) -> usize {
        self.size
    }

    pub fn precision(&self) -> TablePrecision {
        self.precision
    }

    fn stage(&self, k: usize) -> &PlanStage {
        let idx = (self.size / (2 * k)).trailing_zeros() as usize;
        let st = &self.stages[idx];
        debug_assert_eq!(st.k, k);
        st
    }
}

/// Forward fast transform: 2N samples to N Legendre coefficients.
pub fn flt(plan: &FltPlan, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    flt_truncated(plan, samples, plan.n)
}

/// Forward fast transform keeping only the first `keep` coefficients.
/// Subtrees of the cascade whose leaves all exceed `keep` are skipped.
pub fn flt_truncated(
    plan: &FltPlan,
    samples: &[Complex64],
    keep: usize,
) -> Result<Vec<Complex64>> {
    if samples.len() != plan.size {
        return Err(Error::InvalidArgument(format!(
            "flt: expected {} samples, got {}",
            plan.size,
            samples.len()
        )));
    }
    if keep > plan.n {
        return Err(Error::InvalidArgument(format!(
            "flt: keep = {keep} exceeds plan coefficient count {}",
            plan.n
        )));
    }
    // weighted samples
    let g: Vec<Complex64> = samples
        .iter()
        .zip(&plan.weights)
        .map(|(&f, &w)| f * w)
        .collect();
    let gx: Vec<Complex64> = g
        .iter()
        .zip(&plan.nodes)
        .map(|(&gi, &x)| gi * x)
        .collect();
    let z0 = fct(&g)?;
    let z1 = fct(&gx)?;
    let mut out = vec![Complex64::default(); keep];
    descend(plan, 1, &z0, &z1, keep, &mut out)?;
    // rescale from (1/M) sum p_l f w to the 1/tau_m normalization
    let m = plan.size as f64;
    for (l, c) in out.iter_mut().enumerate() {
        *c *= m * (2.0 * l as f64 + 1.0) / 2.0;
    }
    Ok(out)
}

/// One cascade state: vectors `Z_{l-1}^{2K}` and `Z_l^{2K}` of length 2K.
fn descend(
    plan: &FltPlan,
    l: usize,
    z_lm1: &[Complex64],
    z_l: &[Complex64],
    keep: usize,
    out: &mut [Complex64],
) -> Result<()> {
    let two_k = z_l.len();
    if two_k == 2 {
        if l - 1 < keep {
            out[l - 1] = z_lm1[0];
        }
        if l < keep {
            out[l] = z_l[0];
        }
        return Ok(());
    }
    let k = two_k / 2;
    // left child is plain truncation
    descend(plan, l, &z_lm1[..k], &z_l[..k], keep, out)?;
    // right child covers leaves l+K-1 .. l+2K-2
    if l + k - 1 >= keep {
        return Ok(());
    }
    let block = {
        let st = plan.stage(k);
        &st.blocks[(l - 1) / (2 * k)]
    };
    let s_lm1 = ifct(z_lm1, two_k)?;
    let s_l = ifct(z_l, two_k)?;
    let mut h_k = vec![Complex64::default(); two_k];
    let mut h_km1 = vec![Complex64::default(); two_k];
    for i in 0..two_k {
        h_k[i] = s_l[i] * block.q_k[i] + s_lm1[i] * block.r_k[i];
        h_km1[i] = s_l[i] * block.q_km1[i] + s_lm1[i] * block.r_km1[i];
    }
    let mut zr_l = fct(&h_k)?;
    let mut zr_lm1 = fct(&h_km1)?;
    zr_l.truncate(k);
    zr_lm1.truncate(k);
    descend(plan, l + k, &zr_lm1, &zr_l, keep, out)
}

/// Inverse fast transform: N coefficients to 2N samples
/// `f(x_i^{2N}) = sum_m c_m P_m(x_i^{2N})`.
///
/// Shorter inputs are zero-padded (the solver pads F+1 modes up to N).
pub fn iflt(plan: &FltPlan, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs.len() > plan.n {
        return Err(Error::InvalidArgument(format!(
            "iflt: {} coefficients exceed plan size {}",
            coeffs.len(),
            plan.n
        )));
    }
    let m = plan.size;
    // stage 0: blocks [c_i, 0] of length 2; flat buffer of m blocks
    let mut buf = vec![Complex64::default(); 2 * m];
    let mut nonzero = vec![false; m];
    for (i, &c) in coeffs.iter().enumerate() {
        buf[2 * i] = c;
        nonzero[i] = c != Complex64::default();
    }
    let mut k = 2;
    while k <= m / 2 {
        // incoming: 2m/k blocks of length k; outgoing: m/k blocks of length 2k
        let n_groups = m / (2 * k);
        let mut next = vec![Complex64::default(); 2 * m];
        let mut next_nonzero = vec![false; m / k];
        for g in 0..n_groups {
            let b = |t: usize| &buf[(4 * g + t) * k..(4 * g + t + 1) * k];
            let nz = |t: usize| nonzero[4 * g + t];
            let out0 = (2 * g) * 2 * k;
            let out1 = (2 * g + 1) * 2 * k;
            if !nz(2) && !nz(3) {
                // upper blocks vanish: outputs are the zero-padded lower blocks
                next[out0..out0 + k].copy_from_slice(b(0));
                next[out1..out1 + k].copy_from_slice(b(1));
                next_nonzero[2 * g] = nz(0);
                next_nonzero[2 * g + 1] = nz(1);
                continue;
            }
            let block = {
                let st = plan.stage(k);
                &st.blocks[g]
            };
            let c0 = ifct(b(0), 2 * k)?;
            let c1 = ifct(b(1), 2 * k)?;
            let c2 = ifct(b(2), 2 * k)?;
            let c3 = ifct(b(3), 2 * k)?;
            let mut g0 = vec![Complex64::default(); 2 * k];
            let mut g1 = vec![Complex64::default(); 2 * k];
            for i in 0..2 * k {
                g0[i] = c0[i] + c2[i] * block.r_km1[i] + c3[i] * block.r_k[i];
                g1[i] = c1[i] + c2[i] * block.q_km1[i] + c3[i] * block.q_k[i];
            }
            let a0 = fct(&g0)?;
            let a1 = fct(&g1)?;
            next[out0..out0 + 2 * k].copy_from_slice(&a0);
            next[out1..out1 + 2 * k].copy_from_slice(&a1);
            next_nonzero[2 * g] = true;
            next_nonzero[2 * g + 1] = true;
        }
        buf = next;
        nonzero = next_nonzero;
        k *= 2;
    }
    // final stage: two blocks of length m
    let e0 = ifct(&buf[..m], m)?;
    let e1 = ifct(&buf[m..], m)?;
    Ok((0..m).map(|j| e0[j] + e1[j] * plan.nodes[j]).collect())
}

/// Direct O(N^2) Legendre transform: 2N samples to N coefficients.
pub fn dlt(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = samples.len();
    if m == 0 || m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "dlt: sample count must be even and positive, got {m}"
        )));
    }
    let n = m / 2;
    let rule = orthopoly::fejer_weights(m)?;
    let mut out = vec![Complex64::default(); n];
    // accumulate column-by-column so each node's Legendre recurrence runs once
    for i in 0..m {
        let fw = samples[i] * rule.weights[i];
        let x = rule.nodes[i];
        let mut pm1 = 1.0;
        let mut p = x;
        out[0] += fw;
        if n > 1 {
            out[1] += fw * x;
        }
        for l in 2..n {
            let kf = (l - 1) as f64;
            let next = ((2.0 * kf + 1.0) * x * p - kf * pm1) / (kf + 1.0);
            pm1 = p;
            p = next;
            out[l] += fw * p;
        }
    }
    for (l, c) in out.iter_mut().enumerate() {
        *c *= (2.0 * l as f64 + 1.0) / 2.0;
    }
    Ok(out)
}

/// Direct O(N^2) inverse: N coefficients to 2N samples.
pub fn idlt(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len();
    if n == 0 {
        return Err(Error::InvalidArgument("idlt: empty input".into()));
    }
    let m = 2 * n;
    let nodes = orthopoly::chebyshev_nodes(m)?;
    Ok(nodes
        .iter()
        .map(|&x| {
            let mut acc = coeffs[0];
            let mut pm1 = 1.0;
            let mut p = x;
            if n > 1 {
                acc += coeffs[1] * x;
            }
            for l in 2..n {
                let kf = (l - 1) as f64;
                let next = ((2.0 * kf + 1.0) * x * p - kf * pm1) / (kf + 1.0);
                pm1 = p;
                p = next;
                acc += coeffs[l] * p;
            }
            acc
        })
        .collect())
}

/// `idlt` with the Legendre recurrence carried in double-double arithmetic
/// (nodes included), rounded to f64 at the end. Test-input generator for the
/// accuracy studies.
pub fn idlt_extended(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len();
    if n == 0 {
        return Err(Error::InvalidArgument("idlt_extended: empty input".into()));
    }
    let m = 2 * n;
    Ok((0..m)
        .map(|i| {
            let x = orthopoly::chebyshev_node_dd(i, m);
            let col = orthopoly::legendre_column_dd(n - 1, x);
            let mut re = Dd::ZERO;
            let mut im = Dd::ZERO;
            for (l, &c) in coeffs.iter().enumerate() {
                re = re + col[l] * Dd::from_f64(c.re);
                im = im + col[l] * Dd::from_f64(c.im);
            }
            Complex64::new(re.to_f64(), im.to_f64())
        })
        .collect())
}

/// Errors of the fast and direct transforms at one size, measured with the
/// unit-coefficient protocol: the reference input is `v = e_{N/2}` and the
/// reference samples are `idlt_extended(v)`.
#[derive(Debug, Clone)]
pub struct TransformErrors {
    pub n: usize,
    pub dlt: f64,
    pub flt_plain: f64,
    pub flt_extended: f64,
    pub idlt: f64,
    pub iflt_plain: f64,
    pub iflt_extended: f64,
}

/// Run the error protocol at coefficient count `n` (power of two).
pub fn transform_error_study(n: usize) -> Result<TransformErrors> {
    transform_error_study_with(
        n,
        &FltPlan::new(n, TablePrecision::Plain)?,
        &FltPlan::new(n, TablePrecision::Extended)?,
    )
}

/// Same as [`transform_error_study`] but with caller-provided plans (so a
/// benchmark can reuse them).
pub fn transform_error_study_with(
    n: usize,
    plain: &FltPlan,
    extended: &FltPlan,
) -> Result<TransformErrors> {
    let mut v = vec![Complex64::default(); n];
    v[n / 2] = Complex64::new(1.0, 0.0);
    let samples_qp = idlt_extended(&v)?;

    let sup = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };

    let dlt_err = sup(&dlt(&samples_qp)?, &v);
    let flt_plain = sup(&flt(plain, &samples_qp)?, &v);
    let flt_extended = sup(&flt(extended, &samples_qp)?, &v);
    let idlt_err = sup(&idlt(&v)?, &samples_qp);
    let iflt_plain = sup(&iflt(plain, &v)?, &samples_qp);
    let iflt_extended = sup(&iflt(extended, &v)?, &samples_qp);
    Ok(TransformErrors {
        n,
        dlt: dlt_err,
        flt_plain,
        flt_extended,
        idlt: idlt_err,
        iflt_plain,
        iflt_extended,
    })
}
