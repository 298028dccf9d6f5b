//! Batch harness: scattering solves, convergence studies and transform
//! benchmarks with CSV output.
//!
//! Every study echoes its full parameter set as `#` comment lines at the top
//! of the CSV, so a result file documents the command that produced it.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use axiscat::error::{Error, Result};
use axiscat::flt::{self, FltPlan, TablePrecision};
use axiscat::mie::{self, MieSolution};
use axiscat::operator::{solve_with_context, OperatorContext, SolverConfig};
use axiscat::radialkernel::{load_or_compute, ModalField, RadialGrid};
use axiscat::scatterers::{Scatterer, TabulatedContrast};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Radial,
    Angular,
    FltAccuracy,
    FltTiming,
    Single,
}

impl StudyKind {
    pub fn parse(s: &str) -> Result<StudyKind> {
        match s {
            "radial" | "radial-convergence" => Ok(StudyKind::Radial),
            "angular" | "angular-convergence" => Ok(StudyKind::Angular),
            "flt-accuracy" => Ok(StudyKind::FltAccuracy),
            "flt-timing" => Ok(StudyKind::FltTiming),
            "single" | "single-solve" => Ok(StudyKind::Single),
            other => Err(Error::Parse(format!("unknown study kind {other:?}"))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            StudyKind::Radial => "radial",
            StudyKind::Angular => "angular",
            StudyKind::FltAccuracy => "flt-accuracy",
            StudyKind::FltTiming => "flt-timing",
            StudyKind::Single => "single",
        }
    }
}

/// Fully resolved study parameters.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub kind: StudyKind,
    pub scatterer_name: String,
    pub f_list: Vec<usize>,
    pub ni_list: Vec<usize>,
    pub n_d: usize,
    pub wavenumber: f64,
    pub beta: f64,
    pub r_max: f64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub moment_cache: Option<PathBuf>,
    pub threads: usize,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec {
            kind: StudyKind::Single,
            scatterer_name: "sphere".into(),
            f_list: vec![255],
            ni_list: vec![32],
            n_d: 4,
            wavenumber: 1.0,
            beta: 2.2,
            r_max: 4.0,
            tol: 1e-10,
            out: None,
            moment_cache: None,
            threads: 1,
        }
    }
}

impl StudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.f_list.is_empty() || self.ni_list.is_empty() {
            return Err(Error::InvalidArgument("empty parameter sweep list".into()));
        }
        if self.tol <= 0.0 || self.wavenumber <= 0.0 || self.r_max <= 0.0 || self.n_d == 0 {
            return Err(Error::InvalidArgument(
                "tol, k, rmax and Nd must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The scatterer named on the command line. The built-in bodies carry
    /// the parameters of the reference experiments: `sphere` is the unit
    /// sphere of index 2, `offset-sphere` the unit sphere of index 2
    /// centered at (0, 0, 2), `hollowed` uses `--beta`, `none` is vacuum.
    /// `tabulated:PATH` loads a coefficient table.
    pub fn scatterer(&self) -> Result<Scatterer> {
        let name = self.scatterer_name.as_str();
        if let Some(path) = name.strip_prefix("tabulated:") {
            return Ok(Scatterer::Tabulated(TabulatedContrast::from_path(
                std::path::Path::new(path),
            )?));
        }
        match name {
            "sphere" => Ok(Scatterer::HomogeneousSphere {
                radius: 1.0,
                index: 2.0,
            }),
            "offset-sphere" => Ok(Scatterer::OffsetSphere {
                offset: 2.0,
                radius: 1.0,
                index: 2.0,
            }),
            "hollowed" => Ok(Scatterer::HollowedSphere { beta: self.beta }),
            "none" | "vacuum" => Ok(Scatterer::HomogeneousSphere {
                radius: 1.0,
                index: 1.0,
            }),
            other => Err(Error::Parse(format!("unknown scatterer {other:?}"))),
        }
    }

    /// The command line that reproduces this spec.
    pub fn echo(&self) -> String {
        let mut s = format!(
            "axiscat --study {} --scatterer {} --F {} --Ni {} --Nd {} --k {} --rmax {} --tol {:e} --threads {}",
            self.kind.name(),
            self.scatterer_name,
            join(&self.f_list),
            join(&self.ni_list),
            self.n_d,
            self.wavenumber,
            self.r_max,
            self.tol,
            self.threads,
        );
        if self.scatterer_name == "hollowed" {
            let _ = write!(s, " --beta {}", self.beta);
        }
        if let Some(dir) = &self.moment_cache {
            let _ = write!(s, " --moment-cache {}", dir.display());
        }
        if let Some(out) = &self.out {
            let _ = write!(s, " --out {}", out.display());
        }
        s
    }
}

fn join(v: &[usize]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub parameter: usize,
    pub error: f64,
    pub error_ratio: Option<f64>,
    pub log2_ratio: Option<f64>,
    pub seconds_per_iteration: f64,
    pub iterations: usize,
}

fn rows_to_csv(spec: &StudySpec, parameter_name: &str, rows: &[ConvergenceRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", spec.echo());
    let _ = writeln!(
        out,
        "{parameter_name},error,error_ratio,log2_error_ratio,seconds_per_iteration,iterations"
    );
    for r in rows {
        let ratio = r.error_ratio.map(|v| v.to_string()).unwrap_or_default();
        let l2 = r.log2_ratio.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.parameter, r.error, ratio, l2, r.seconds_per_iteration, r.iterations
        );
    }
    out
}

fn write_output(spec: &StudySpec, csv: &str) -> Result<()> {
    match &spec.out {
        Some(path) => {
            std::fs::write(path, csv)?;
            Ok(())
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

/// Exact evaluator for the radial study's reference solutions.
enum RadialReference {
    Mie(MieSolution),
    ShiftedMie { sol: MieSolution, offset: f64 },
    Incident,
}

impl RadialReference {
    fn eval(&self, k: f64, rho: f64, ct: f64) -> Complex64 {
        match self {
            RadialReference::Mie(sol) => sol.eval_exact(rho, ct),
            RadialReference::ShiftedMie { sol, offset } => {
                // the body sits at (0, 0, offset). Its incident wave
                // e^{ik(z-d)} becomes the standard centered plane wave in
                // body coordinates, so the exact solution is the centered
                // one evaluated at the shifted point, no extra phase.
                let d = *offset;
                let z = rho * ct - d;
                let rr = (rho * rho + d * d - 2.0 * rho * d * ct).sqrt();
                let ct2 = if rr > 1e-300 { (z / rr).clamp(-1.0, 1.0) } else { 1.0 };
                let _ = k;
                sol.eval_exact(rr, ct2)
            }
            RadialReference::Incident => Complex64::new(0.0, k * rho * ct).exp(),
        }
    }
}

/// Radial convergence study: sweep N_i at fixed F, N_d against an exact
/// reference. Solver failures are recorded as NaN rows and the sweep
/// continues.
pub fn run_radial_study(spec: &StudySpec) -> Result<Vec<ConvergenceRow>> {
    spec.validate()?;
    let scatterer = spec.scatterer()?;
    let f = spec.f_list[0];
    let k = spec.wavenumber;
    let reference = match (&scatterer, spec.scatterer_name.as_str()) {
        (_, "none") | (_, "vacuum") => RadialReference::Incident,
        (Scatterer::HomogeneousSphere { radius, index }, _) => {
            if (*radius - 1.0).abs() > 1e-12 || (*index - 2.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(
                    "the exact sphere reference covers radius 1, index 2".into(),
                ));
            }
            RadialReference::Mie(mie::mie_solve_auto(k, spec.r_max)?)
        }
        (Scatterer::OffsetSphere { offset, radius, index }, _) => {
            if (*radius - 1.0).abs() > 1e-12 || (*index - 2.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(
                    "the exact offset reference covers radius 1, index 2".into(),
                ));
            }
            RadialReference::ShiftedMie {
                sol: mie::mie_solve_auto(k, spec.r_max + offset)?,
                offset: *offset,
            }
        }
        _ => {
            return Err(Error::InvalidArgument(
                "radial study needs a scatterer with an exact reference".into(),
            ))
        }
    };
    let plan = Arc::new(FltPlan::new(
        SolverConfig::new(f, 1, 1, k).transform_size(),
        TablePrecision::Extended,
    )?);
    let angles = mie::default_angles();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut prev_err: Option<f64> = None;
    for &ni in &spec.ni_list {
        let mut cfg = SolverConfig::new(f, ni, spec.n_d, k);
        cfg.r_max = spec.r_max;
        cfg.tol = spec.tol;
        cfg.threads = spec.threads;
        let grid = RadialGrid::build(spec.r_max, ni, spec.n_d)?;
        let row = (|| -> Result<ConvergenceRow> {
            let moments = Arc::new(load_or_compute(
                spec.moment_cache.as_deref(),
                &grid,
                f,
                k,
                spec.threads,
            )?);
            let ctx = OperatorContext::build(cfg, &scatterer, Some(moments), Some(plan.clone()))?;
            let out = solve_with_context(&ctx, &scatterer)?;
            let err = mie::field_error_vs(
                &out.field,
                &grid,
                &|rho, ct| reference.eval(k, rho, ct),
                &angles,
            );
            Ok(ConvergenceRow {
                parameter: ni,
                error: err,
                error_ratio: prev_err.map(|p| p / err),
                log2_ratio: prev_err.map(|p| (p / err).log2()),
                seconds_per_iteration: out.seconds_per_apply,
                iterations: out.iterations,
            })
        })();
        match row {
            Ok(r) => {
                prev_err = Some(r.error);
                rows.push(r);
            }
            Err(e) => {
                eprintln!("N_i = {ni}: solve failed: {e}");
                prev_err = None;
                rows.push(ConvergenceRow {
                    parameter: ni,
                    error: f64::NAN,
                    error_ratio: None,
                    log2_ratio: None,
                    seconds_per_iteration: f64::NAN,
                    iterations: 0,
                });
            }
        }
    }
    write_output(spec, &rows_to_csv(spec, "N_i", &rows))?;
    Ok(rows)
}

/// Angular convergence study: sweep F against a self-reference at the next
/// power-of-two truncation above the sweep.
pub fn run_angular_study(spec: &StudySpec) -> Result<Vec<ConvergenceRow>> {
    spec.validate()?;
    let scatterer = spec.scatterer()?;
    if !matches!(scatterer, Scatterer::HollowedSphere { .. }) {
        return Err(Error::InvalidArgument(
            "angular study runs on the hollowed sphere".into(),
        ));
    }
    let k = spec.wavenumber;
    let ni = spec.ni_list[0];
    let f_ref = 2 * (spec.f_list.iter().max().unwrap() + 1) - 1;
    let grid = RadialGrid::build(spec.r_max, ni, spec.n_d)?;
    let moments = Arc::new(load_or_compute(
        spec.moment_cache.as_deref(),
        &grid,
        f_ref,
        k,
        spec.threads,
    )?);
    let mut cfg_ref = SolverConfig::new(f_ref, ni, spec.n_d, k);
    cfg_ref.r_max = spec.r_max;
    cfg_ref.tol = spec.tol;
    cfg_ref.threads = spec.threads;
    let ctx_ref = OperatorContext::build(cfg_ref, &scatterer, Some(moments.clone()), None)?;
    let reference = solve_with_context(&ctx_ref, &scatterer)?.field;
    let angles = mie::default_angles();
    let mut rows = Vec::new();
    let mut prev_err: Option<f64> = None;
    for &f in &spec.f_list {
        let mut cfg = SolverConfig::new(f, ni, spec.n_d, k);
        cfg.r_max = spec.r_max;
        cfg.tol = spec.tol;
        cfg.threads = spec.threads;
        let row = (|| -> Result<ConvergenceRow> {
            let ctx = OperatorContext::build(cfg, &scatterer, Some(moments.clone()), None)?;
            let out = solve_with_context(&ctx, &scatterer)?;
            let mut err = 0.0f64;
            for g in 0..grid.node_count() {
                for &ct in &angles {
                    let d = (out.field.eval_at_node(g, ct) - reference.eval_at_node(g, ct)).norm();
                    err = err.max(d);
                }
            }
            Ok(ConvergenceRow {
                parameter: f,
                error: err,
                error_ratio: prev_err.map(|p| p / err),
                log2_ratio: prev_err.map(|p| (p / err).log2()),
                seconds_per_iteration: out.seconds_per_apply,
                iterations: out.iterations,
            })
        })();
        match row {
            Ok(r) => {
                prev_err = Some(r.error);
                rows.push(r);
            }
            Err(e) => {
                eprintln!("F = {f}: solve failed: {e}");
                prev_err = None;
                rows.push(ConvergenceRow {
                    parameter: f,
                    error: f64::NAN,
                    error_ratio: None,
                    log2_ratio: None,
                    seconds_per_iteration: f64::NAN,
                    iterations: 0,
                });
            }
        }
    }
    write_output(spec, &rows_to_csv(spec, "F", &rows))?;
    Ok(rows)
}

/// Transform accuracy table: the unit-vector error protocol per size.
/// Sizes come from `--F` (powers of two).
pub fn run_flt_accuracy(spec: &StudySpec) -> Result<String> {
    spec.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "# {}", spec.echo());
    let _ = writeln!(out, "N,dlt,flt,flt_qp,idlt,iflt,iflt_qp");
    for &n in &spec.f_list {
        let e = flt::transform_error_study(n)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            n, e.dlt, e.flt_plain, e.flt_extended, e.idlt, e.iflt_plain, e.iflt_extended
        );
    }
    write_output(spec, &out)?;
    Ok(out)
}

/// Median wall time of one fast transform application at each size.
pub fn flt_time_at(n: usize, reps: usize) -> Result<(f64, f64)> {
    let plan = FltPlan::new(n, TablePrecision::Extended)?;
    let samples: Vec<Complex64> = (0..2 * n)
        .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
        .collect();
    let coeffs: Vec<Complex64> = samples[..n].to_vec();
    let _ = flt::flt(&plan, &samples)?;
    let _ = flt::iflt(&plan, &coeffs)?;
    let mut tf = Vec::with_capacity(reps);
    let mut ti = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        let _ = flt::flt(&plan, &samples)?;
        tf.push(t.elapsed().as_secs_f64());
        let t = Instant::now();
        let _ = flt::iflt(&plan, &coeffs)?;
        ti.push(t.elapsed().as_secs_f64());
    }
    tf.sort_by(f64::total_cmp);
    ti.sort_by(f64::total_cmp);
    Ok((tf[reps / 2], ti[reps / 2]))
}

/// Transform timing table.
pub fn run_flt_timing(spec: &StudySpec) -> Result<String> {
    spec.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "# {}", spec.echo());
    let _ = writeln!(out, "N,seconds_flt,seconds_iflt");
    for &n in &spec.f_list {
        let (tf, ti) = flt_time_at(n, 9)?;
        let _ = writeln!(out, "{n},{tf},{ti}");
    }
    write_output(spec, &out)?;
    Ok(out)
}

/// Result summary of a single solve.
pub struct SingleSolveSummary {
    pub iterations: usize,
    pub residual: f64,
    pub wall_seconds: f64,
    pub raster_path: Option<PathBuf>,
    pub modes_path: Option<PathBuf>,
}

/// One solve; writes the reconstructed field on a (rho, theta) raster and
/// the modal coefficients, and returns a summary.
pub fn run_single_solve(spec: &StudySpec) -> Result<SingleSolveSummary> {
    spec.validate()?;
    let scatterer = spec.scatterer()?;
    let f = spec.f_list[0];
    let ni = spec.ni_list[0];
    let mut cfg = SolverConfig::new(f, ni, spec.n_d, spec.wavenumber);
    cfg.r_max = spec.r_max;
    cfg.tol = spec.tol;
    cfg.threads = spec.threads;
    let t0 = Instant::now();
    let grid = RadialGrid::build(spec.r_max, ni, spec.n_d)?;
    let moments = Arc::new(load_or_compute(
        spec.moment_cache.as_deref(),
        &grid,
        f,
        spec.wavenumber,
        spec.threads,
    )?);
    let ctx = OperatorContext::build(cfg, &scatterer, Some(moments), None)?;
    let out = solve_with_context(&ctx, &scatterer)?;
    let wall = t0.elapsed().as_secs_f64();
    let residual = out.residuals.last().copied().unwrap_or(0.0);

    let mut raster_path = None;
    let mut modes_path = None;
    if let Some(path) = &spec.out {
        let mut csv = String::new();
        let _ = writeln!(csv, "# {}", spec.echo());
        let _ = writeln!(csv, "rho,theta,re,im");
        let n_theta = 33usize;
        for g in 0..grid.node_count() {
            let rho = grid.nodes()[g];
            for jt in 0..n_theta {
                let theta = std::f64::consts::PI * jt as f64 / (n_theta - 1) as f64;
                let v = out.field.eval_at_node(g, theta.cos());
                let _ = writeln!(csv, "{rho},{theta},{},{}", v.re, v.im);
            }
        }
        std::fs::write(path, csv)?;
        raster_path = Some(path.clone());

        let mpath = modes_file_for(path);
        let mut csv = String::new();
        let _ = writeln!(csv, "# {}", spec.echo());
        let _ = writeln!(csv, "rho,n,re,im");
        for g in 0..grid.node_count() {
            let rho = grid.nodes()[g];
            for (n, c) in out.field.node(g).iter().enumerate() {
                let _ = writeln!(csv, "{rho},{n},{},{}", c.re, c.im);
            }
        }
        std::fs::write(&mpath, csv)?;
        modes_path = Some(mpath);
    }
    println!(
        "iterations={} residual={:.3e} wall={:.3}s seconds_per_apply={:.3e}",
        out.iterations, residual, wall, out.seconds_per_apply
    );
    Ok(SingleSolveSummary {
        iterations: out.iterations,
        residual,
        wall_seconds: wall,
        raster_path,
        modes_path,
    })
}

/// Companion modal-coefficient file for a raster output path.
pub fn modes_file_for(path: &std::path::Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}_modes.csv"))
}

/// Parse a raster CSV back into (rho, theta, value) triples.
pub fn read_raster(path: &std::path::Path) -> Result<Vec<(f64, f64, Complex64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("rho") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("bad raster line: {line:?}")));
        }
        let p = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))
        };
        out.push((
            p(fields[0])?,
            p(fields[1])?,
            Complex64::new(p(fields[2])?, p(fields[3])?),
        ));
    }
    Ok(out)
}

/// Reconstruct a field value from a solve for scoring (used by tests to
/// verify the raster round-trip).
pub fn reconstruct(field: &ModalField, grid: &RadialGrid, g: usize, theta: f64) -> Complex64 {
    let _ = grid;
    field.eval_at_node(g, theta.cos())
}
