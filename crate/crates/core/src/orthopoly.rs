//! Orthogonal-polynomial primitives: Legendre evaluation, the associated
//! polynomials of the generalized three-term recurrence, Chebyshev nodes and
//! Fejer-type quadrature weights.
//!
//! Everything here is pure and the tables are immutable once built.

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Three-term recurrence coefficients `p_{k+1} = (A_k x + B_k) p_k + C_k p_{k-1}`.
///
/// For Legendre polynomials: `A_k = (2k+1)/(k+1)`, `B_k = 0`, `C_k = -k/(k+1)`.
#[derive(Debug, Clone)]
pub struct RecurrenceCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl RecurrenceCoeffs {
    /// Legendre coefficients for k = 0..=k_max.
    pub fn legendre(k_max: usize) -> RecurrenceCoeffs {
        let mut a = Vec::with_capacity(k_max + 1);
        let mut b = Vec::with_capacity(k_max + 1);
        let mut c = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let kf = k as f64;
            a.push((2.0 * kf + 1.0) / (kf + 1.0));
            b.push(0.0);
            c.push(-kf / (kf + 1.0));
        }
        debug_assert!(a.iter().all(|&x| x != 0.0));
        RecurrenceCoeffs { a, b, c }
    }
}

#[inline]
pub(crate) fn legendre_a_dd(k: usize) -> Dd {
    Dd::from_ratio(2 * k as i64 + 1, k as i64 + 1)
}

#[inline]
pub(crate) fn legendre_c_dd(k: usize) -> Dd {
    Dd::from_ratio(-(k as i64), k as i64 + 1)
}

/// Chebyshev (Gauss) node `cos((2i+1) pi / (2n))` in double-double precision.
///
/// The angle is range-reduced by the exact symmetry `x_{n-1-i} = -x_i` so the
/// Taylor evaluation only ever sees arguments in `[0, pi/2]`.
pub(crate) fn chebyshev_node_dd(i: usize, n: usize) -> Dd {
    let q = 2 * i + 1;
    let m = 2 * n;
    if 2 * q == m {
        return Dd::ZERO;
    }
    if 2 * q > m {
        return -chebyshev_node_dd(n - 1 - i, n);
    }
    let theta = Dd::PI * Dd::from_f64(q as f64) / Dd::from_f64(m as f64);
    theta.cos_half_range()
}

/// The Chebyshev points `x_i = cos((2i+1) pi / (2n))`, i = 0..n-1, in
/// decreasing order. Accurate to one ulp (computed in dd and rounded).
pub fn chebyshev_nodes(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("chebyshev_nodes: n = 0".into()));
    }
    Ok((0..n).map(|i| chebyshev_node_dd(i, n).to_f64()).collect())
}

pub(crate) fn chebyshev_nodes_dd(n: usize) -> Vec<Dd> {
    (0..n).map(|i| chebyshev_node_dd(i, n)).collect()
}

/// Legendre polynomial `P_n(x)` by upward recurrence.
pub fn legendre_eval(n: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "legendre_eval: |x| > 1 (x = {x})"
        )));
    }
    Ok(legendre_eval_unchecked(n, x))
}

pub(crate) fn legendre_eval_unchecked(n: usize, x: f64) -> f64 {
    let mut pm1 = 1.0;
    if n == 0 {
        return pm1;
    }
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * pm1) / (kf + 1.0);
        pm1 = p;
        p = next;
    }
    p
}

/// Derivative `P_n'(x)`, using `(1-x^2) P_n' = n (P_{n-1} - x P_n)` away from
/// the endpoints and the exact limit `P_n'(+-1) = (+-1)^{n-1} n(n+1)/2` there.
pub fn legendre_deriv(n: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "legendre_deriv: |x| > 1 (x = {x})"
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let omx2 = 1.0 - x * x;
    if omx2 < 1e-12 {
        let sign = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        return Ok(sign * (n * (n + 1)) as f64 / 2.0);
    }
    let pn = legendre_eval_unchecked(n, x);
    let pnm1 = legendre_eval_unchecked(n - 1, x);
    Ok(n as f64 * (pnm1 - x * pn) / omx2)
}

/// Values of a full Legendre column `P_0(x) .. P_{n_max}(x)`.
pub fn legendre_column(n_max: usize, x: f64) -> Vec<f64> {
    let mut col = Vec::with_capacity(n_max + 1);
    col.push(1.0);
    if n_max == 0 {
        return col;
    }
    col.push(x);
    for k in 1..n_max {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * col[k] - kf * col[k - 1]) / (kf + 1.0);
        col.push(next);
    }
    col
}

pub(crate) fn legendre_column_dd(n_max: usize, x: Dd) -> Vec<Dd> {
    let mut col = Vec::with_capacity(n_max + 1);
    col.push(Dd::ONE);
    if n_max == 0 {
        return col;
    }
    col.push(x);
    for k in 1..n_max {
        let next = (legendre_a_dd(k) * x) * col[k] + legendre_c_dd(k) * col[k - 1];
        col.push(next);
    }
    col
}

/// Associated polynomials `Q_{l,m}`, `R_{l,m}` of the shifted recurrence
/// `p_{l+m} = Q_{l,m} p_l + R_{l,m} p_{l-1}`, evaluated at one point.
///
/// Returns `(Q_{l,m}, R_{l,m})`.
pub fn assoc_eval(l: usize, m: usize, x: f64) -> (f64, f64) {
    // recurrence on m with base Q_{l,0} = 1, R_{l,0} = 0
    let (mut qm1, mut rm1) = (1.0_f64, 0.0_f64);
    if m == 0 {
        return (qm1, rm1);
    }
    let al = (2.0 * l as f64 + 1.0) / (l as f64 + 1.0);
    let cl = -(l as f64) / (l as f64 + 1.0);
    let (mut q, mut r) = (al * x, cl);
    for mm in 2..=m {
        let k = l + mm - 1;
        let ak = (2.0 * k as f64 + 1.0) / (k as f64 + 1.0);
        let ck = -(k as f64) / (k as f64 + 1.0);
        let qn = ak * x * q + ck * qm1;
        let rn = ak * x * r + ck * rm1;
        qm1 = q;
        rm1 = r;
        q = qn;
        r = rn;
    }
    (q, r)
}

/// Values of `Q_{l,m-1}, R_{l,m-1}, Q_{l,m}, R_{l,m}` at the Chebyshev nodes
/// of even count `n_nodes`, with the recurrence run in double-double and
/// rounded to f64 at the end.
///
/// This is the extended-precision table precompute used by the transform
/// plans. Only the positive half of the node set is evaluated; the rest
/// follows from the parities `Q_{l,m}(-x) = (-1)^m Q_{l,m}(x)` and
/// `R_{l,m}(-x) = (-1)^{m-1} R_{l,m}(x)`.
pub(crate) fn assoc_pair_tables_dd(l: usize, m: usize, n_nodes: usize) -> [Vec<f64>; 4] {
    assert!(m >= 1 && n_nodes % 2 == 0);
    let half = n_nodes / 2;
    let nodes: Vec<Dd> = (0..half).map(|i| chebyshev_node_dd(i, n_nodes)).collect();
    let mut qm1 = vec![Dd::ONE; half];
    let mut rm1 = vec![Dd::ZERO; half];
    let al = legendre_a_dd(l);
    let cl = legendre_c_dd(l);
    let mut q: Vec<Dd> = nodes.iter().map(|&x| al * x).collect();
    let mut r = vec![cl; half];
    for mm in 2..=m {
        let k = l + mm - 1;
        let ak = legendre_a_dd(k);
        let ck = legendre_c_dd(k);
        for i in 0..half {
            let t = ak * nodes[i];
            let qn = t * q[i] + ck * qm1[i];
            let rn = t * r[i] + ck * rm1[i];
            qm1[i] = q[i];
            rm1[i] = r[i];
            q[i] = qn;
            r[i] = rn;
        }
    }
    mirror_tables(
        qm1.iter().map(|v| v.to_f64()).collect(),
        rm1.iter().map(|v| v.to_f64()).collect(),
        q.iter().map(|v| v.to_f64()).collect(),
        r.iter().map(|v| v.to_f64()).collect(),
        m,
    )
}

/// Plain f64 version of [`assoc_pair_tables_dd`].
pub(crate) fn assoc_pair_tables_f64(l: usize, m: usize, n_nodes: usize) -> [Vec<f64>; 4] {
    assert!(m >= 1 && n_nodes % 2 == 0);
    let half = n_nodes / 2;
    let nodes: Vec<f64> = (0..half)
        .map(|i| chebyshev_node_dd(i, n_nodes).to_f64())
        .collect();
    let mut qm1 = vec![1.0; half];
    let mut rm1 = vec![0.0; half];
    let al = (2.0 * l as f64 + 1.0) / (l as f64 + 1.0);
    let cl = -(l as f64) / (l as f64 + 1.0);
    let mut q: Vec<f64> = nodes.iter().map(|&x| al * x).collect();
    let mut r = vec![cl; half];
    for mm in 2..=m {
        let k = l + mm - 1;
        let ak = (2.0 * k as f64 + 1.0) / (k as f64 + 1.0);
        let ck = -(k as f64) / (k as f64 + 1.0);
        for i in 0..half {
            let t = ak * nodes[i];
            let qn = t * q[i] + ck * qm1[i];
            let rn = t * r[i] + ck * rm1[i];
            qm1[i] = q[i];
            rm1[i] = r[i];
            q[i] = qn;
            r[i] = rn;
        }
    }
    mirror_tables(qm1, rm1, q, r, m)
}

/// Extend half-range table values to the full node set by parity.
fn mirror_tables(
    qm1: Vec<f64>,
    rm1: Vec<f64>,
    q: Vec<f64>,
    r: Vec<f64>,
    m: usize,
) -> [Vec<f64>; 4] {
    let half = q.len();
    let n = 2 * half;
    let sign_q = if m % 2 == 0 { 1.0 } else { -1.0 };
    let extend = |vals: Vec<f64>, sign: f64| -> Vec<f64> {
        let mut full = vec![0.0; n];
        for i in 0..half {
            full[i] = vals[i];
            full[n - 1 - i] = sign * vals[i];
        }
        full
    };
    [
        extend(qm1, -sign_q),
        extend(rm1, sign_q),
        extend(q, sign_q),
        extend(r, -sign_q),
    ]
}

/// Table of associated-polynomial values `Q_{l,m}`, `R_{l,m}` for
/// m = 0..=m_max at the Chebyshev nodes of size `2 * m_max` (the node count
/// the transform cascade pairs with shift width m_max).
#[derive(Debug, Clone)]
pub struct AssociatedPolyTable {
    pub l: usize,
    pub m_max: usize,
    pub nodes: Vec<f64>,
    /// q[m][i] = Q_{l,m}(nodes[i])
    pub q: Vec<Vec<f64>>,
    /// r[m][i] = R_{l,m}(nodes[i])
    pub r: Vec<Vec<f64>>,
}

/// Build the associated-polynomial table for start index `l` (>= 1), shifts
/// up to `m_max`, precomputed in extended precision.
pub fn associated_polys(l: usize, m_max: usize) -> Result<AssociatedPolyTable> {
    if l == 0 {
        return Err(Error::InvalidArgument(
            "associated_polys: start index l must be >= 1".into(),
        ));
    }
    let n_nodes = (2 * m_max).max(1);
    let nodes_dd = chebyshev_nodes_dd(n_nodes);
    let nodes: Vec<f64> = nodes_dd.iter().map(|x| x.to_f64()).collect();
    let mut q = vec![vec![1.0; n_nodes]];
    let mut r = vec![vec![0.0; n_nodes]];
    if m_max >= 1 {
        let al = legendre_a_dd(l);
        let cl = legendre_c_dd(l);
        let mut qm1 = vec![Dd::ONE; n_nodes];
        let mut rm1 = vec![Dd::ZERO; n_nodes];
        let mut qc: Vec<Dd> = nodes_dd.iter().map(|&x| al * x).collect();
        let mut rc = vec![cl; n_nodes];
        q.push(qc.iter().map(|v| v.to_f64()).collect());
        r.push(rc.iter().map(|v| v.to_f64()).collect());
        for m in 2..=m_max {
            let k = l + m - 1;
            let ak = legendre_a_dd(k);
            let ck = legendre_c_dd(k);
            for i in 0..n_nodes {
                let t = ak * nodes_dd[i];
                let qn = t * qc[i] + ck * qm1[i];
                let rn = t * rc[i] + ck * rm1[i];
                qm1[i] = qc[i];
                rm1[i] = rc[i];
                qc[i] = qn;
                rc[i] = rn;
            }
            q.push(qc.iter().map(|v| v.to_f64()).collect());
            r.push(rc.iter().map(|v| v.to_f64()).collect());
        }
    }
    Ok(AssociatedPolyTable {
        l,
        m_max,
        nodes,
        q,
        r,
    })
}

/// An interpolatory quadrature rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Cosine moments `alpha_n = int_0^pi cos(n t) sin t dt` in closed form:
/// `2 / (1 - n^2)` for even n, zero for odd n.
#[inline]
fn cosine_moment(n: usize) -> f64 {
    if n % 2 == 0 {
        2.0 / (1.0 - (n as f64) * (n as f64))
    } else {
        0.0
    }
}

/// Fejer-type quadrature at the n Chebyshev points: weights
/// `w_i = sum_m b_m cos(m (2i+1) pi / (2n))` with `b_m = eps_m alpha_m / n`.
///
/// The rule integrates polynomials of degree < n exactly on [-1, 1] and its
/// weights sum to 2.
pub fn fejer_weights(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("fejer_weights: n = 0".into()));
    }
    let nodes = chebyshev_nodes(n)?;
    let b: Vec<f64> = (0..n)
        .map(|m| {
            let eps = if m == 0 { 1.0 } else { 2.0 };
            eps * cosine_moment(m) / n as f64
        })
        .collect();
    // The weight sum is a Chebyshev synthesis at the nodes; use the fast
    // path for power-of-two sizes, direct cosine sums otherwise.
    let weights = if n.is_power_of_two() && n >= 4 {
        use num_complex::Complex64;
        let coeffs: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        crate::fct::ifct(&coeffs, n)?.iter().map(|c| c.re).collect()
    } else {
        (0..n)
            .map(|i| {
                let theta = (2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
                b.iter()
                    .enumerate()
                    .map(|(m, &bm)| bm * (m as f64 * theta).cos())
                    .sum()
            })
            .collect()
    };
    Ok(QuadratureRule { nodes, weights })
}

/// Gauss-Legendre rule with n points, by Newton iteration on `P_n` from
/// Chebyshev initial guesses. Exact for degree <= 2n-1.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("gauss_legendre: n = 0".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
        for _ in 0..100 {
            let p = legendre_eval_unchecked(n, x);
            let dp = legendre_deriv(n, x).unwrap_or(f64::INFINITY);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let dp = legendre_deriv(n, x)?;
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Ok(QuadratureRule { nodes, weights })
}
