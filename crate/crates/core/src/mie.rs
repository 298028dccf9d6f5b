//! Exact series solution for scattering of an axial plane wave off a
//! homogeneous penetrable sphere of radius 1 and refractive index 2, in the
//! overflow-safe scaled form.
//!
//! Interior (rho <= 1) and exterior (rho >= 1) total fields:
//!
//! ```text
//! u = sum_n at_n rho^n jt_n(2 k rho) P_n
//! u = sum_n [ i^n s_n(k rho) jt_n(k rho)
//!           + delta_n bt_n rho^n jt_n(k rho)
//!           + i bt_n rho^{-n-1} yt_n(k rho) ] P_n
//! ```
//!
//! with `s_n(z) = z^n/(2n-1)!!` and
//! `delta_n = -k^{2n+1} / ((2n-1)!! (2n+1)!!)`, both accumulated
//! incrementally so no double factorial is ever formed. The scaled
//! coefficients (at_n, bt_n) solve a per-mode 2x2 interface system built
//! entirely from the modified Bessel functions; the unscaled textbook form
//! exists only as an extended-precision cross-check in the tests.

use num_complex::Complex64;

use crate::besselmod::{jtilde_column, jtilde_deriv, ytilde_column, ytilde_deriv};
use crate::error::{Error, Result};
use crate::orthopoly;
use crate::radialkernel::{ModalField, RadialGrid};

/// Exact interior/exterior series coefficients for the unit sphere with
/// index 2.
#[derive(Debug, Clone)]
pub struct MieSolution {
    pub wavenumber: f64,
    pub n_max: usize,
    /// Scaled interior coefficients at_n.
    pub a: Vec<Complex64>,
    /// Scaled exterior coefficients bt_n.
    pub b: Vec<Complex64>,
    /// delta_n = -k^{2n+1} / ((2n-1)!! (2n+1)!!).
    pub delta: Vec<f64>,
    /// Incident scale i^n k^n / (2n-1)!!.
    pub incident_scale: Vec<Complex64>,
}

/// Build and solve the per-mode interface systems up to `n_max`.
pub fn mie_solve(wavenumber: f64, n_max: usize) -> Result<MieSolution> {
    if wavenumber <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "mie_solve: wavenumber must be positive, got {wavenumber}"
        )));
    }
    let k = wavenumber;
    let jt_2k = jtilde_column(n_max + 1, 2.0 * k)?;
    let jt_k = jtilde_column(n_max + 1, k)?;
    let yt_k = ytilde_column(n_max + 1, k)?;
    let mut a = Vec::with_capacity(n_max + 1);
    let mut b = Vec::with_capacity(n_max + 1);
    let mut delta = Vec::with_capacity(n_max + 1);
    let mut iscale = Vec::with_capacity(n_max + 1);
    let mut d = -k; // delta_0
    let mut s = Complex64::new(1.0, 0.0); // i^0 k^0 / (-1)!!
    let i_unit = Complex64::new(0.0, 1.0);
    for n in 0..=n_max {
        let nf = n as f64;
        let jt2 = jt_2k[n];
        let jt2p = jtilde_deriv(n, 2.0 * k, jt_2k[n + 1]);
        let jt1 = jt_k[n];
        let jt1p = jtilde_deriv(n, k, jt_k[n + 1]);
        let yt1 = yt_k[n];
        let yt1p = ytilde_deriv(n, k, yt_k[n], yt_k[n + 1]);
        // [ a11 a12 ] [at]   [ r1 ]
        // [ a21 a22 ] [bt] = [ r2 ]
        let a11 = Complex64::new(jt2, 0.0);
        let a12 = -(Complex64::new(d * jt1, 0.0) + i_unit * yt1);
        let a21 = Complex64::new(nf * jt2 + 2.0 * k * jt2p, 0.0);
        let a22 = -Complex64::new(d * (nf * jt1 + k * jt1p), 0.0)
            + i_unit * ((nf + 1.0) * yt1 - k * yt1p);
        let r1 = s * jt1;
        let r2 = s * (nf * jt1 + k * jt1p);
        let det = a11 * a22 - a12 * a21;
        let scale = a11.norm().max(a12.norm()).max(a21.norm()).max(a22.norm());
        if det.norm() <= 1e-14 * scale * scale {
            return Err(Error::MieResonance { mode: n });
        }
        a.push((r1 * a22 - a12 * r2) / det);
        b.push((a11 * r2 - r1 * a21) / det);
        delta.push(d);
        iscale.push(s);
        d *= k * k / ((2.0 * nf + 1.0) * (2.0 * nf + 3.0));
        s *= i_unit * k / (2.0 * nf + 1.0);
    }
    Ok(MieSolution {
        wavenumber,
        n_max,
        a,
        b,
        delta,
        incident_scale: iscale,
    })
}

/// Solve with the truncation chosen automatically for a domain of radius
/// `r_max`: start at `ceil(k r_max) + 40` and trim negligible trailing
/// modes.
pub fn mie_solve_auto(wavenumber: f64, r_max: f64) -> Result<MieSolution> {
    let n_start = (wavenumber * r_max).ceil() as usize + 40;
    let mut sol = mie_solve(wavenumber, n_start)?;
    // mode magnitudes where they are largest: at the interface for the
    // interior/scattered parts, at the domain edge for the incident part
    let at_interface = sol.modal_coefficients(1.0, n_start + 1)?;
    let at_edge = sol.modal_coefficients(r_max.max(1.0), n_start + 1)?;
    let contrib: Vec<f64> = (0..=n_start)
        .map(|n| at_interface[n].norm() + at_edge[n].norm())
        .collect();
    let scale = contrib.iter().fold(0.0f64, |m, &c| m.max(c));
    let mut keep = n_start;
    while keep > 8 && contrib[keep] < 1e-15 * scale {
        keep -= 1;
    }
    sol.n_max = keep;
    sol.a.truncate(keep + 1);
    sol.b.truncate(keep + 1);
    sol.delta.truncate(keep + 1);
    sol.incident_scale.truncate(keep + 1);
    Ok(sol)
}

impl MieSolution {
    /// Modal coefficients u_n(rho) of the exact total field.
    pub fn modal_coefficients(&self, rho: f64, n_modes: usize) -> Result<Vec<Complex64>> {
        let k = self.wavenumber;
        let top = (n_modes - 1).min(self.n_max);
        let i_unit = Complex64::new(0.0, 1.0);
        let mut out = vec![Complex64::default(); n_modes];
        if rho <= 1.0 {
            let jt2 = jtilde_column(top, 2.0 * k * rho)?;
            let mut rp = 1.0; // rho^n
            for n in 0..=top {
                out[n] = self.a[n] * rp * jt2[n];
                rp *= rho;
            }
        } else {
            let jt = jtilde_column(top, k * rho)?;
            let yt = ytilde_column(top, k * rho)?;
            let mut rp = 1.0; // rho^n
            let mut rm = 1.0 / rho; // rho^{-n-1}
            let mut s = Complex64::new(1.0, 0.0); // i^n (k rho)^n/(2n-1)!!
            for n in 0..=top {
                out[n] = s * jt[n]
                    + self.b[n] * (self.delta[n] * rp * jt[n] + i_unit * rm * yt[n]);
                rp *= rho;
                rm /= rho;
                s *= i_unit * k * rho / (2.0 * n as f64 + 1.0);
            }
        }
        Ok(out)
    }

    /// Total field at (rho, theta) with `ct = cos(theta)`.
    pub fn eval_exact(&self, rho: f64, ct: f64) -> Complex64 {
        let modes = self
            .modal_coefficients(rho, self.n_max + 1)
            .expect("mie evaluation failed");
        let col = orthopoly::legendre_column(self.n_max, ct);
        modes
            .iter()
            .zip(&col)
            .map(|(&c, &p)| c * p)
            .sum()
    }

    /// Incident field alone at (rho, ct).
    pub fn eval_incident(&self, rho: f64, ct: f64) -> Complex64 {
        Complex64::new(0.0, self.wavenumber * rho * ct).exp()
    }

    /// Scattered field alone (the series without its incident part), valid
    /// at any radius; the retained modes capture it at all distances.
    pub fn eval_scattered(&self, rho: f64, ct: f64) -> Complex64 {
        let k = self.wavenumber;
        let col = orthopoly::legendre_column(self.n_max, ct);
        let i_unit = Complex64::new(0.0, 1.0);
        let mut acc = Complex64::default();
        if rho <= 1.0 {
            let jt2 = jtilde_column(self.n_max, 2.0 * k * rho).expect("mie eval");
            let jt1 = jtilde_column(self.n_max, k * rho).expect("mie eval");
            let mut rp = 1.0;
            let mut s = Complex64::new(1.0, 0.0);
            for n in 0..=self.n_max {
                acc += (self.a[n] * rp * jt2[n] - s * jt1[n]) * col[n];
                rp *= rho;
                s *= i_unit * k * rho / (2.0 * n as f64 + 1.0);
            }
        } else {
            let jt = jtilde_column(self.n_max, k * rho).expect("mie eval");
            let yt = ytilde_column(self.n_max, k * rho).expect("mie eval");
            let mut rp = 1.0;
            let mut rm = 1.0 / rho;
            for n in 0..=self.n_max {
                acc += self.b[n]
                    * (self.delta[n] * rp * jt[n] + i_unit * rm * yt[n])
                    * col[n];
                rp *= rho;
                rm /= rho;
            }
        }
        acc
    }

    /// Exact modal field sampled on a grid (for reference comparisons).
    pub fn exact_modal_field(&self, grid: &RadialGrid, n_modes: usize) -> Result<ModalField> {
        let mut field = ModalField::zeros(n_modes, grid.node_count());
        for g in 0..grid.node_count() {
            let coeffs = self.modal_coefficients(grid.nodes()[g], n_modes)?;
            field.node_mut(g).copy_from_slice(&coeffs);
        }
        Ok(field)
    }
}

/// Default angle set for error measurement: 17-point Gauss-Legendre cosines.
pub fn default_angles() -> Vec<f64> {
    orthopoly::gauss_legendre(17).unwrap().nodes
}

/// Sup-norm error of a computed modal field against an exact evaluator,
/// sampled at every grid node and the given angle cosines.
pub fn field_error_vs(
    approx: &ModalField,
    grid: &RadialGrid,
    exact: &dyn Fn(f64, f64) -> Complex64,
    angles: &[f64],
) -> f64 {
    let mut worst = 0.0f64;
    for g in 0..grid.node_count() {
        let rho = grid.nodes()[g];
        for &ct in angles {
            let err = (approx.eval_at_node(g, ct) - exact(rho, ct)).norm();
            worst = worst.max(err);
        }
    }
    worst
}

/// Sup-norm error against the exact sphere solution at the default angles.
pub fn field_error(approx: &ModalField, grid: &RadialGrid, sol: &MieSolution) -> f64 {
    field_error_vs(
        approx,
        grid,
        &|rho, ct| sol.eval_exact(rho, ct),
        &default_angles(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;

    /// Per-mode residual of the scaled system.
    fn system_residual(sol: &MieSolution, n: usize) -> f64 {
        let k = sol.wavenumber;
        let nf = n as f64;
        let jt_2k = jtilde_column(n + 1, 2.0 * k).unwrap();
        let jt_k = jtilde_column(n + 1, k).unwrap();
        let yt_k = ytilde_column(n + 1, k).unwrap();
        let i_unit = Complex64::new(0.0, 1.0);
        let d = sol.delta[n];
        let s = sol.incident_scale[n];
        let jt2 = jt_2k[n];
        let jt2p = jtilde_deriv(n, 2.0 * k, jt_2k[n + 1]);
        let jt1 = jt_k[n];
        let jt1p = jtilde_deriv(n, k, jt_k[n + 1]);
        let yt1 = yt_k[n];
        let yt1p = ytilde_deriv(n, k, yt_k[n], yt_k[n + 1]);
        let a11 = Complex64::new(jt2, 0.0);
        let a12 = -(Complex64::new(d * jt1, 0.0) + i_unit * yt1);
        let a21 = Complex64::new(nf * jt2 + 2.0 * k * jt2p, 0.0);
        let a22 = -Complex64::new(d * (nf * jt1 + k * jt1p), 0.0)
            + i_unit * ((nf + 1.0) * yt1 - k * yt1p);
        let r1 = s * jt1;
        let r2 = s * (nf * jt1 + k * jt1p);
        let res1 = a11 * sol.a[n] + a12 * sol.b[n] - r1;
        let res2 = a21 * sol.a[n] + a22 * sol.b[n] - r2;
        let scale = r1.norm().max(r2.norm()).max(
            (a11.norm() + a12.norm() + a21.norm() + a22.norm())
                * sol.a[n].norm().max(sol.b[n].norm()),
        );
        (res1.norm() + res2.norm()) / scale.max(1e-300)
    }

    #[test]
    fn per_mode_residuals_are_tiny() {
        for &k in &[0.5, 1.0, 2.0, 5.0] {
            let sol = mie_solve_auto(k, 4.0).unwrap();
            for n in 0..=sol.n_max {
                let r = system_residual(&sol, n);
                assert!(r <= 1e-12, "k={k} n={n}: residual {r:.3e}");
            }
        }
    }

    #[test]
    fn interface_continuity() {
        for &k in &[0.5, 1.0, 2.0, 5.0] {
            let sol = mie_solve_auto(k, 4.0).unwrap();
            let inner = sol.modal_coefficients(1.0 - 1e-14, sol.n_max + 1).unwrap();
            let outer = sol.modal_coefficients(1.0 + 1e-14, sol.n_max + 1).unwrap();
            for j in 0..32 {
                let ct = ((j as f64 + 0.5) * std::f64::consts::PI / 32.0).cos();
                let col = orthopoly::legendre_column(sol.n_max, ct);
                let ui: Complex64 = inner.iter().zip(&col).map(|(&c, &p)| c * p).sum();
                let uo: Complex64 = outer.iter().zip(&col).map(|(&c, &p)| c * p).sum();
                let scale = ui.norm().max(1.0);
                assert!(
                    (ui - uo).norm() <= 1e-10 * scale,
                    "k={k} ct={ct}: {ui} vs {uo}"
                );
            }
        }
    }

    #[test]
    fn radial_derivative_continuity() {
        // term-wise differentiated series from both sides of rho = 1
        for &k in &[0.5, 1.0, 2.0, 5.0] {
            let sol = mie_solve_auto(k, 4.0).unwrap();
            let top = sol.n_max;
            let jt2 = jtilde_column(top + 1, 2.0 * k).unwrap();
            let jt1 = jtilde_column(top + 1, k).unwrap();
            let yt1 = ytilde_column(top + 1, k).unwrap();
            let i_unit = Complex64::new(0.0, 1.0);
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for j in 0..16 {
                let ct = ((j as f64 + 0.5) * std::f64::consts::PI / 16.0).cos();
                let col = orthopoly::legendre_column(top, ct);
                let mut din = Complex64::default();
                let mut dout = Complex64::default();
                for n in 0..=top {
                    let nf = n as f64;
                    let j2p = jtilde_deriv(n, 2.0 * k, jt2[n + 1]);
                    let j1p = jtilde_deriv(n, k, jt1[n + 1]);
                    let y1p = ytilde_deriv(n, k, yt1[n], yt1[n + 1]);
                    din += sol.a[n] * (nf * jt2[n] + 2.0 * k * j2p) * col[n];
                    let incident =
                        sol.incident_scale[n] * (nf * jt1[n] + k * j1p);
                    let scattered = sol.b[n]
                        * (sol.delta[n] * (nf * jt1[n] + k * j1p)
                            + i_unit * (-(nf + 1.0) * yt1[n] + k * y1p));
                    dout += (incident + scattered) * col[n];
                }
                worst = worst.max((din - dout).norm());
                scale = scale.max(din.norm());
            }
            assert!(
                worst <= 1e-8 * scale.max(1.0),
                "k={k}: derivative jump {worst:.3e} (scale {scale:.3e})"
            );
        }
    }

    #[test]
    fn axis_symmetry_at_origin() {
        let sol = mie_solve_auto(1.0, 4.0).unwrap();
        let u0 = sol.eval_exact(0.0, 1.0);
        for j in 1..8 {
            let ct = -1.0 + 0.25 * j as f64;
            assert!((sol.eval_exact(0.0, ct) - u0).norm() < 1e-14);
        }
    }

    #[test]
    fn far_field_decays_like_inverse_radius() {
        let sol = mie_solve_auto(1.0, 4.0).unwrap();
        for &ct in &[1.0, 0.3, -0.8] {
            let s50 = sol.eval_scattered(50.0, ct).norm();
            let s100 = sol.eval_scattered(100.0, ct).norm();
            let ratio = s50 / s100;
            assert!(
                (ratio - 2.0).abs() <= 0.1,
                "ct={ct}: far-field ratio {ratio}"
            );
        }
        // inside the domain the scattered series matches total minus incident
        for &rho in &[0.4, 1.7, 3.2] {
            let d = (sol.eval_exact(rho, 0.3) - sol.eval_incident(rho, 0.3)
                - sol.eval_scattered(rho, 0.3))
                .norm();
            assert!(d < 1e-10, "rho={rho}: {d:e}");
        }
    }

    #[test]
    fn exact_modal_field_scores_near_zero_error() {
        let sol = mie_solve_auto(1.0, 4.0).unwrap();
        let grid = RadialGrid::build(4.0, 8, 4).unwrap();
        let approx = sol.exact_modal_field(&grid, sol.n_max + 1).unwrap();
        let e = field_error(&approx, &grid, &sol);
        assert!(e < 1e-12, "self error {e:.3e}");
        // zero field scores the field magnitude itself
        let zero = ModalField::zeros(sol.n_max + 1, grid.node_count());
        let e0 = field_error(&zero, &grid, &sol);
        let mag = grid
            .nodes()
            .iter()
            .flat_map(|&r| default_angles().into_iter().map(move |ct| (r, ct)))
            .map(|(r, ct)| sol.eval_exact(r, ct).norm())
            .fold(0.0, f64::max);
        assert!((e0 - mag).abs() < 1e-12);
    }

    /// Minimal complex arithmetic over double-doubles for the unscaled
    /// cross-check.
    #[derive(Clone, Copy)]
    struct DdC {
        re: Dd,
        im: Dd,
    }

    impl DdC {
        fn new(re: Dd, im: Dd) -> DdC {
            DdC { re, im }
        }
        fn from_f64(re: f64, im: f64) -> DdC {
            DdC::new(Dd::from_f64(re), Dd::from_f64(im))
        }
        fn sub(self, o: DdC) -> DdC {
            DdC::new(self.re - o.re, self.im - o.im)
        }
        fn mul(self, o: DdC) -> DdC {
            DdC::new(
                self.re * o.re - self.im * o.im,
                self.re * o.im + self.im * o.re,
            )
        }
        fn div(self, o: DdC) -> DdC {
            let den = o.re * o.re + o.im * o.im;
            let num = self.mul(DdC::new(o.re, -o.im));
            DdC::new(num.re / den, num.im / den)
        }
        fn to_c64(self) -> Complex64 {
            Complex64::new(self.re.to_f64(), self.im.to_f64())
        }
    }

    #[test]
    fn scaled_solve_matches_unscaled_extended_precision() {
        // textbook system with raw j_n, h_n in dd, then convert
        let k = 1.0f64;
        let n_top = 40usize;
        // dd double factorials
        let mut df = vec![Dd::ONE; n_top + 3]; // df[n] = (2n-1)!!
        for n in 1..=n_top + 2 {
            df[n] = df[n - 1] * Dd::from_f64(2.0 * n as f64 - 1.0);
        }
        let sol = mie_solve(k, n_top).unwrap();
        let jn_dd = |n: usize, z: f64| -> Dd {
            let jt = crate::besselmod::jtilde_series_dd(n, z);
            let mut zp = Dd::ONE;
            for _ in 0..n {
                zp = zp * Dd::from_f64(z);
            }
            zp * jt / df[n + 1]
        };
        let yn_dd = |n: usize, z: f64| -> Dd {
            let yt = crate::besselmod::ytilde_series_dd(n, z);
            let mut zp = Dd::ONE;
            for _ in 0..n + 1 {
                zp = zp * Dd::from_f64(z);
            }
            -df[n] * yt / zp
        };
        for n in (0..=n_top).step_by(5) {
            let nf = Dd::from_f64(n as f64);
            let z1 = k;
            let z2 = 2.0 * k;
            let j1 = jn_dd(n, z1);
            let j1p = nf / Dd::from_f64(z1) * j1 - jn_dd(n + 1, z1);
            let j2 = jn_dd(n, z2);
            let j2p = nf / Dd::from_f64(z2) * j2 - jn_dd(n + 1, z2);
            let y1 = yn_dd(n, z1);
            let y1p = nf / Dd::from_f64(z1) * y1 - yn_dd(n + 1, z1);
            let h1 = DdC::new(j1, y1);
            let h1p = DdC::new(j1p, y1p);
            // i^n (2n+1)
            let in_cycle = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][n % 4];
            let rhs_scale = DdC::from_f64(in_cycle.0, in_cycle.1)
                .mul(DdC::new(Dd::from_f64(2.0 * n as f64 + 1.0), Dd::ZERO));
            // [-j2, h1; -2 j2p, h1p] [a; b] = -[j1; j1p] rhs_scale
            let a11 = DdC::new(-j2, Dd::ZERO);
            let a12 = h1;
            let a21 = DdC::new(-(Dd::from_f64(2.0) * j2p), Dd::ZERO);
            let a22 = h1p;
            let r1 = DdC::new(-j1, Dd::ZERO).mul(rhs_scale);
            let r2 = DdC::new(-j1p, Dd::ZERO).mul(rhs_scale);
            let det = a11.mul(a22).sub(a12.mul(a21));
            let a_raw = r1.mul(a22).sub(a12.mul(r2)).div(det);
            let b_raw = a11.mul(r2).sub(r1.mul(a21)).div(det);
            // convert: at = a (2k)^n / (2n+1)!!, bt = -b (2n-1)!! / k^{n+1}
            let mut p2k = Dd::ONE;
            let mut pk = Dd::from_f64(k);
            for _ in 0..n {
                p2k = p2k * Dd::from_f64(2.0 * k);
                pk = pk * Dd::from_f64(k);
            }
            let at = a_raw.mul(DdC::new(p2k / df[n + 1], Dd::ZERO)).to_c64();
            let bt_dd = b_raw.mul(DdC::new(df[n] / pk, Dd::ZERO));
            let bt = DdC::new(-bt_dd.re, -bt_dd.im).to_c64();
            let sa = sol.a[n].norm().max(1e-300);
            let sb = sol.b[n].norm().max(1e-300);
            assert!(
                (sol.a[n] - at).norm() <= 1e-10 * sa,
                "n={n}: at {} vs {}",
                sol.a[n],
                at
            );
            assert!(
                (sol.b[n] - bt).norm() <= 1e-10 * sb,
                "n={n}: bt {} vs {}",
                sol.b[n],
                bt
            );
        }
    }
}
