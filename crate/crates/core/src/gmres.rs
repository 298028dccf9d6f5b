//! Restarted GMRES over the complex field, matrix-free.
//!
//! Arnoldi with modified Gram-Schmidt plus one re-orthogonalization pass,
//! Givens rotations for the running least-squares problem. The residual
//! history records the relative residual after every Arnoldi step and is
//! monotone non-increasing within each restart cycle.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GmresConfig {
    /// Relative residual target.
    pub tol: f64,
    /// Total Arnoldi-step budget across restarts.
    pub max_iters: usize,
    /// Krylov dimension per restart cycle.
    pub restart: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            tol: 1e-10,
            max_iters: 400,
            restart: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    /// Relative residual after each iteration.
    pub residuals: Vec<f64>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve `apply(x) = rhs` to the configured relative residual. `x0` seeds
/// the first cycle (`None` starts from zero). Failure to converge within
/// the iteration budget returns the best iterate inside the error.
pub fn gmres_solve<F>(
    apply: F,
    rhs: &[Complex64],
    x0: Option<&[Complex64]>,
    cfg: &GmresConfig,
) -> Result<GmresOutcome>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    if cfg.tol <= 0.0 || cfg.max_iters == 0 || cfg.restart == 0 {
        return Err(Error::InvalidArgument(
            "gmres: tol, max_iters and restart must be positive".into(),
        ));
    }
    let n = rhs.len();
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Ok(GmresOutcome {
            solution: vec![Complex64::default(); n],
            iterations: 0,
            residuals: Vec::new(),
        });
    }
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![Complex64::default(); n],
    };
    let mut residuals = Vec::new();
    let mut total_iters = 0usize;
    let m = cfg.restart;

    loop {
        let ax = apply(&x);
        let mut r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        if beta / b_norm <= cfg.tol {
            return Ok(GmresOutcome {
                solution: x,
                iterations: total_iters,
                residuals,
            });
        }
        if total_iters >= cfg.max_iters {
            return Err(Error::NoConvergence {
                iterations: total_iters,
                residual: beta / b_norm,
                best: x,
            });
        }
        let inv = 1.0 / beta;
        for v in r.iter_mut() {
            *v *= inv;
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r];
        // Hessenberg column storage and Givens state
        let mut h_cols: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<Complex64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![Complex64::default(); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut converged_at: Option<usize> = None;

        for j in 0..m {
            let mut w = apply(&basis[j]);
            let mut h = vec![Complex64::default(); j + 2];
            for i in 0..=j {
                let hij = dot(&basis[i], &w);
                h[i] = hij;
                for (wv, vv) in w.iter_mut().zip(&basis[i]) {
                    *wv -= hij * vv;
                }
            }
            // one re-orthogonalization pass
            for i in 0..=j {
                let corr = dot(&basis[i], &w);
                h[i] += corr;
                for (wv, vv) in w.iter_mut().zip(&basis[i]) {
                    *wv -= corr * vv;
                }
            }
            let wn = norm(&w);
            h[j + 1] = Complex64::new(wn, 0.0);
            // apply the accumulated rotations to the new column
            for i in 0..j {
                let t = cs[i].conj() * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            // new rotation zeroing h[j+1]
            let (c, s, rr) = givens(h[j], wn);
            cs.push(c);
            sn.push(s);
            h[j] = Complex64::new(rr, 0.0);
            h[j + 1] = Complex64::default();
            let gj = g[j];
            g[j] = c.conj() * gj;
            g[j + 1] = Complex64::new(-s, 0.0) * gj;
            h_cols.push(h);
            total_iters += 1;
            let rel = g[j + 1].norm() / b_norm;
            residuals.push(rel);
            let breakdown = wn <= 1e-300;
            if rel <= cfg.tol || breakdown || total_iters >= cfg.max_iters {
                converged_at = Some(j + 1);
                break;
            }
            let invw = 1.0 / wn;
            basis.push(w.into_iter().map(|v| v * invw).collect());
        }

        // back-substitute R y = g over the assembled columns
        let used = converged_at.unwrap_or(m);
        let mut y = vec![Complex64::default(); used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for jj in i + 1..used {
                acc -= h_cols[jj][i] * y[jj];
            }
            y[i] = acc / h_cols[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xv, vv) in x.iter_mut().zip(&basis[j]) {
                *xv += yj * vv;
            }
        }
    }
}

/// Complex Givens rotation: returns (c, s, r) with
/// `[c.conj, s; -s, c] [a; b] = [r; 0]`, b real >= 0.
fn givens(a: Complex64, b: f64) -> (Complex64, f64, f64) {
    let an = a.norm();
    if b == 0.0 {
        if an == 0.0 {
            return (Complex64::new(1.0, 0.0), 0.0, 0.0);
        }
        return (a / an, 0.0, an);
    }
    let r = (an * an + b * b).sqrt();
    if an == 0.0 {
        return (Complex64::default(), 1.0, b);
    }
    ((a / an) * (an / r), b / r, r)
}
