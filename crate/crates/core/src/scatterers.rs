//! Scatterer models: Legendre coefficients of the contrast function
//! `m = 1 - n^2` at any radius, and the modal coefficients of the incident
//! plane wave.
//!
//! All models are axisymmetric; `contrast_coeffs` returns the coefficients
//! `m_l(rho)` of `m(rho, t) = sum_l m_l(rho) P_l(t)`, zero outside the
//! model's radial support.

use std::path::Path;

use num_complex::Complex64;

use crate::besselmod;
use crate::error::{Error, Result};
use crate::orthopoly;

#[derive(Debug, Clone)]
pub enum Scatterer {
    /// Homogeneous sphere of the given radius and refractive index, centered
    /// at the origin.
    HomogeneousSphere { radius: f64, index: f64 },
    /// Sphere of radius `radius` centered at `(0, 0, offset)` on the axis,
    /// refractive index `index`. Requires `offset > radius` (the origin must
    /// stay outside the body).
    OffsetSphere {
        offset: f64,
        radius: f64,
        index: f64,
    },
    /// Body of revolution with `m(rho, t) = -|t|^beta` for 1 <= rho <= 2.
    HollowedSphere { beta: f64 },
    /// Contrast coefficients tabulated per radius (e.g. loaded from a file).
    Tabulated(TabulatedContrast),
}

impl Scatterer {
    /// Radial support `[inner, outer]`; coefficients vanish outside.
    pub fn radial_support(&self) -> (f64, f64) {
        match self {
            Scatterer::HomogeneousSphere { radius, .. } => (0.0, *radius),
            Scatterer::OffsetSphere { offset, radius, .. } => {
                (offset - radius, offset + radius)
            }
            Scatterer::HollowedSphere { .. } => (1.0, 2.0),
            Scatterer::Tabulated(t) => t.support,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scatterer::OffsetSphere { offset, radius, .. } => {
                if *radius <= 0.0 || offset <= radius {
                    return Err(Error::InvalidArgument(format!(
                        "offset sphere requires offset > radius > 0, got offset = {offset}, \
                         radius = {radius}"
                    )));
                }
                Ok(())
            }
            Scatterer::HomogeneousSphere { radius, .. } => {
                if *radius <= 0.0 {
                    Err(Error::InvalidArgument("sphere radius must be positive".into()))
                } else {
                    Ok(())
                }
            }
            Scatterer::HollowedSphere { beta } => {
                if *beta <= 0.0 {
                    Err(Error::InvalidArgument("hollowed sphere requires beta > 0".into()))
                } else {
                    Ok(())
                }
            }
            Scatterer::Tabulated(_) => Ok(()),
        }
    }

    /// Legendre coefficients `m_0(rho) .. m_{l_max}(rho)` of the contrast.
    pub fn contrast_coeffs(&self, rho: f64, l_max: usize) -> Result<Vec<Complex64>> {
        if rho < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "contrast_coeffs: negative radius {rho}"
            )));
        }
        self.validate()?;
        let mut out = vec![Complex64::default(); l_max + 1];
        match self {
            Scatterer::HomogeneousSphere { radius, index } => {
                if rho <= *radius {
                    out[0] = Complex64::new(1.0 - index * index, 0.0);
                }
            }
            Scatterer::OffsetSphere {
                offset: d,
                radius: r,
                index,
            } => {
                if rho < d - r || rho > d + r || rho == 0.0 {
                    return Ok(out);
                }
                // polar angle of the intersection circle as seen from the origin
                let cos_t0 = ((rho * rho + d * d - r * r) / (2.0 * d * rho)).clamp(-1.0, 1.0);
                let contrast = 1.0 - index * index;
                out[0] = Complex64::new(contrast * (1.0 - cos_t0) / 2.0, 0.0);
                let sin_t0 = (1.0 - cos_t0 * cos_t0).max(0.0).sqrt();
                for l in 1..=l_max {
                    // P_l^1 = (1-x^2)^{1/2} dP_l/dx, and (l-1)!/(l+1)! = 1/(l(l+1))
                    let pl1 = sin_t0 * orthopoly::legendre_deriv(l, cos_t0)?;
                    let lf = l as f64;
                    let v = contrast * (2.0 * lf + 1.0) / 2.0 * sin_t0 * pl1 / (lf * (lf + 1.0));
                    out[l] = Complex64::new(v, 0.0);
                }
            }
            Scatterer::HollowedSphere { beta } => {
                if !(1.0..=2.0).contains(&rho) {
                    return Ok(out);
                }
                let coeffs = hollowed_coeffs(*beta, l_max);
                for (l, v) in coeffs.into_iter().enumerate() {
                    out[l] = Complex64::new(v, 0.0);
                }
            }
            Scatterer::Tabulated(t) => {
                if let Some(row) = t.lookup(rho) {
                    for (l, c) in row.iter().take(l_max + 1).enumerate() {
                        out[l] = *c;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Coefficients of `-|t|^beta` on [-1, 1]: only even orders survive, and
///
/// ```text
/// m_{2n} = -(4n+1) sqrt(pi) 2^{-beta-1} Gamma(1+beta)
///          / (Gamma(1+beta/2) Gamma(3/2+beta/2))
///          * prod_{k<n} (beta/2 - k) / (beta/2 + 3/2 + k)
/// ```
///
/// The factor ratio is accumulated incrementally; every factor has magnitude
/// below one, so the running product can neither overflow nor lose scale.
fn hollowed_coeffs(beta: f64, l_max: usize) -> Vec<f64> {
    let b2 = beta / 2.0;
    let prefactor = -std::f64::consts::PI.sqrt() * 2f64.powf(-beta - 1.0)
        * (ln_gamma(1.0 + beta) - ln_gamma(1.0 + b2) - ln_gamma(1.5 + b2)).exp();
    let mut out = vec![0.0; l_max + 1];
    let mut ratio = 1.0;
    for n in 0..=(l_max / 2) {
        let l = 2 * n;
        out[l] = (4.0 * n as f64 + 1.0) * prefactor * ratio;
        ratio *= (b2 - n as f64) / (b2 + 1.5 + n as f64);
    }
    out
}

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, 9 terms; ~1e-15 relative).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection; the models only reach here for tiny beta
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln()
            - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Contrast coefficients tabulated at a list of radii. Radii not present in
/// the table are treated as outside the support (all coefficients zero).
#[derive(Debug, Clone)]
pub struct TabulatedContrast {
    /// (radius, coefficients) sorted by radius.
    rows: Vec<(f64, Vec<Complex64>)>,
    support: (f64, f64),
}

impl TabulatedContrast {
    pub fn new(mut rows: Vec<(f64, Vec<Complex64>)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("tabulated contrast: no rows".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let support = (rows[0].0, rows[rows.len() - 1].0);
        Ok(TabulatedContrast { rows, support })
    }

    /// Parse a plain-text table: one `rho, l, Re(m_l), Im(m_l)` record per
    /// line, comma- or whitespace-separated, `#` comments allowed.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut grouped: Vec<(f64, Vec<Complex64>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "line {}: expected 'rho, l, re, im', got {:?}",
                    lineno + 1,
                    line
                )));
            }
            let parse_f = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", lineno + 1)))
            };
            let rho = parse_f(fields[0])?;
            let l: usize = fields[1]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad mode index", lineno + 1)))?;
            let re = parse_f(fields[2])?;
            let im = parse_f(fields[3])?;
            let row = match grouped.iter_mut().find(|(r, _)| same_radius(*r, rho)) {
                Some((_, row)) => row,
                None => {
                    grouped.push((rho, Vec::new()));
                    &mut grouped.last_mut().unwrap().1
                }
            };
            if row.len() <= l {
                row.resize(l + 1, Complex64::default());
            }
            row[l] = Complex64::new(re, im);
        }
        TabulatedContrast::new(grouped)
    }

    fn lookup(&self, rho: f64) -> Option<&[Complex64]> {
        self.rows
            .iter()
            .find(|(r, _)| same_radius(*r, rho))
            .map(|(_, row)| row.as_slice())
    }
}

fn same_radius(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Axis-aligned incident plane waves.
#[derive(Debug, Clone, Copy)]
pub enum IncidentKind {
    /// `e^{i k rho cos(theta)}`.
    Axial,
    /// `e^{i k (rho cos(theta) - d)}` for a body centered at `(0, 0, d)`.
    AxialShifted(f64),
}

/// Modal coefficients `u_n^i(rho) = phase i^n (2n+1) j_n(k rho)` of the
/// incident wave, evaluated through the modified Bessel column so the
/// double-factorial scaling never materializes.
pub fn incident_coeffs(
    kind: IncidentKind,
    wavenumber: f64,
    rho: f64,
    n_max: usize,
) -> Result<Vec<Complex64>> {
    let phase = match kind {
        IncidentKind::Axial => Complex64::new(1.0, 0.0),
        IncidentKind::AxialShifted(d) => Complex64::new(0.0, -wavenumber * d).exp(),
    };
    let kr = wavenumber * rho;
    let jt = besselmod::jtilde_column(n_max, kr)?;
    let mut out = Vec::with_capacity(n_max + 1);
    // scale_n = (k rho)^n / (2n-1)!!, so u_n = phase i^n scale_n jt_n
    let mut scale = 1.0f64;
    const POW_I: [Complex64; 4] = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    for (n, &j) in jt.iter().enumerate() {
        out.push(phase * POW_I[n % 4] * scale * j);
        scale *= kr / (2.0 * n as f64 + 1.0);
    }
    Ok(out)
}
