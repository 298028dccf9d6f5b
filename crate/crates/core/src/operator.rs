//! The discrete Lippmann-Schwinger operator and the scattering solve.
//!
//! The unknown is the modal field `u_n(rho_g)` (Legendre coefficients of the
//! total field at every radial node). One operator application chains
//!
//! 1. angular integration per node: `I_n = tau_n FLT(IFLT(u) . IFLT(m))` at
//!    a padded power-of-two size covering the degree-3F product,
//! 2. per-interval Chebyshev fits of `I_n(rho)`,
//! 3. the radial sweeps assembling `K_n` at every node,
//!
//! giving `A v = v - (i/2) K[v]`; the solve targets `A u = u^i` with the
//! incident field as initial iterate (Born start) under restarted GMRES.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flt::{self, FltPlan, TablePrecision};
use crate::gmres::{gmres_solve, GmresConfig, GmresOutcome};
use crate::radialkernel::{
    fit_radial, load_or_compute, radial_sweep, BesselNodeTable, ModalField, MomentTable,
    RadialGrid,
};
use crate::scatterers::{incident_coeffs, IncidentKind, Scatterer};

/// Discretization and solver parameters.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Angular truncation order: modes 0..=f.
    pub f: usize,
    /// Radial interval count.
    pub n_i: usize,
    /// Chebyshev nodes per interval.
    pub n_d: usize,
    pub wavenumber: f64,
    /// Domain radius (the scatterer must fit inside).
    pub r_max: f64,
    /// Relative residual target.
    pub tol: f64,
    pub max_iters: usize,
    pub restart: usize,
    /// Worker threads for the embarrassingly parallel stages (1 = serial).
    pub threads: usize,
}

impl SolverConfig {
    pub fn new(f: usize, n_i: usize, n_d: usize, wavenumber: f64) -> SolverConfig {
        SolverConfig {
            f,
            n_i,
            n_d,
            wavenumber,
            r_max: 4.0,
            tol: 1e-10,
            max_iters: 400,
            restart: 50,
            threads: 1,
        }
    }

    /// Transform coefficient count: smallest power of two >= 3F + 1.
    pub fn transform_size(&self) -> usize {
        (3 * self.f + 1).next_power_of_two().max(2)
    }
}

/// Everything immutable a solve needs: grid, moment table, transform plan,
/// Bessel values and contrast coefficients at every node.
pub struct OperatorContext {
    pub cfg: SolverConfig,
    pub grid: RadialGrid,
    pub moments: Arc<MomentTable>,
    pub plan: Arc<FltPlan>,
    bessel: BesselNodeTable,
    /// m_l(rho_g) for l = 0..=2F, node-major.
    contrast: Vec<Complex64>,
}

impl OperatorContext {
    /// Assemble a context. An existing moment table or plan covering the
    /// configuration can be shared; anything missing is computed.
    pub fn build(
        cfg: SolverConfig,
        scatterer: &Scatterer,
        moments: Option<Arc<MomentTable>>,
        plan: Option<Arc<FltPlan>>,
    ) -> Result<OperatorContext> {
        scatterer.validate()?;
        let support = scatterer.radial_support();
        if support.1 > cfg.r_max + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "scatterer support extends to {} beyond r_max = {}",
                support.1, cfg.r_max
            )));
        }
        let grid = RadialGrid::build(cfg.r_max, cfg.n_i, cfg.n_d)?;
        let moments = match moments {
            Some(m) if m.matches(&grid, cfg.f, cfg.wavenumber) => m,
            Some(_) => {
                return Err(Error::CacheMismatch(
                    "supplied moment table does not match the configuration".into(),
                ))
            }
            None => Arc::new(load_or_compute(
                None,
                &grid,
                cfg.f,
                cfg.wavenumber,
                cfg.threads,
            )?),
        };
        let p = cfg.transform_size();
        let plan = match plan {
            Some(pl) if pl.coeff_count() == p => pl,
            Some(_) => {
                return Err(Error::CacheMismatch(
                    "supplied transform plan has the wrong size".into(),
                ))
            }
            None => Arc::new(FltPlan::new(p, TablePrecision::Extended)?),
        };
        let bessel = BesselNodeTable::build(&grid, cfg.wavenumber, cfg.f)?;
        let l_max = 2 * cfg.f;
        let mut contrast = Vec::with_capacity(grid.node_count() * (l_max + 1));
        for &rho in grid.nodes() {
            contrast.extend_from_slice(&scatterer.contrast_coeffs(rho, l_max)?);
        }
        Ok(OperatorContext {
            cfg,
            grid,
            moments,
            plan,
            bessel,
            contrast,
        })
    }

    pub fn contrast_at(&self, g: usize) -> &[Complex64] {
        let l = 2 * self.cfg.f + 1;
        &self.contrast[g * l..(g + 1) * l]
    }

    /// Incident modal field on the grid.
    pub fn incident_field(&self, kind: IncidentKind) -> Result<ModalField> {
        let mut field = ModalField::zeros(self.cfg.f + 1, self.grid.node_count());
        for g in 0..self.grid.node_count() {
            let coeffs = incident_coeffs(kind, self.cfg.wavenumber, self.grid.nodes()[g], self.cfg.f)?;
            field.node_mut(g).copy_from_slice(&coeffs);
        }
        Ok(field)
    }

    /// Angular integration at node `g`: `I_n` for n = 0..=F from the mode
    /// coefficients of u at that node and the stored contrast.
    pub fn angular_integrate(&self, g: usize, u_modes: &[Complex64]) -> Result<Vec<Complex64>> {
        angular_product(&self.plan, u_modes, self.contrast_at(g), self.cfg.f)
    }

    /// Apply `A = I - (i/2) K` to a modal field.
    pub fn apply_forward(&self, v: &ModalField) -> Result<ModalField> {
        let f = self.cfg.f;
        let n_modes = f + 1;
        let n_nodes = self.grid.node_count();
        if v.n_modes != n_modes || v.n_nodes != n_nodes {
            return Err(Error::InvalidArgument(
                "apply_forward: field shape does not match configuration".into(),
            ));
        }
        // angular stage, node-major intermediate
        let mut i_all = vec![Complex64::default(); n_modes * n_nodes];
        run_chunked(self.cfg.threads, &mut i_all, n_modes, |g0, chunk| {
            for (off, out) in chunk.chunks_mut(n_modes).enumerate() {
                let g = g0 + off;
                let coeffs = self.angular_integrate(g, v.node(g))?;
                out.copy_from_slice(&coeffs);
            }
            Ok(())
        })?;
        // radial stage, mode-major output
        let mut k_all = vec![Complex64::default(); n_modes * n_nodes];
        run_chunked(self.cfg.threads, &mut k_all, n_nodes, |n0, chunk| {
            let mut samples = vec![Complex64::default(); n_nodes];
            for (off, out) in chunk.chunks_mut(n_nodes).enumerate() {
                let n = n0 + off;
                for g in 0..n_nodes {
                    samples[g] = i_all[g * n_modes + n];
                }
                let coeffs = fit_radial(&self.grid, &samples)?;
                radial_sweep(&self.grid, &self.moments, n, &coeffs, &self.bessel, out)?;
            }
            Ok(())
        })?;
        // combine
        let half_i = Complex64::new(0.0, 0.5);
        let mut out = ModalField::zeros(n_modes, n_nodes);
        for g in 0..n_nodes {
            for n in 0..n_modes {
                out.data[g * n_modes + n] =
                    v.data[g * n_modes + n] - half_i * k_all[n * n_nodes + g];
            }
        }
        Ok(out)
    }
}

/// Angular integration from raw mode vectors (testable without a context):
/// `I_n = tau_n c_n` where `c` is the Legendre transform of the pointwise
/// product of the two synthesized fields.
pub fn angular_product(
    plan: &FltPlan,
    u_modes: &[Complex64],
    m_modes: &[Complex64],
    f: usize,
) -> Result<Vec<Complex64>> {
    if u_modes.len() > plan.coeff_count() || m_modes.len() > plan.coeff_count() {
        return Err(Error::InvalidArgument(format!(
            "angular_product: {} u-modes / {} m-modes exceed plan size {}",
            u_modes.len(),
            m_modes.len(),
            plan.coeff_count()
        )));
    }
    let u_vals = flt::iflt(plan, u_modes)?;
    let m_vals = flt::iflt(plan, m_modes)?;
    let prod: Vec<Complex64> = u_vals.iter().zip(&m_vals).map(|(&a, &b)| a * b).collect();
    let coeffs = flt::flt_truncated(plan, &prod, f + 1)?;
    Ok(coeffs
        .into_iter()
        .enumerate()
        .map(|(n, c)| c * (2.0 / (2.0 * n as f64 + 1.0)))
        .collect())
}

/// Split `buf` into `units`-sized rows and process row ranges on `threads`
/// scoped threads (serial when threads <= 1). Chunk boundaries are fixed by
/// the thread count, so results are deterministic for a given count; each
/// chunk only writes its own disjoint slice.
fn run_chunked<W>(threads: usize, buf: &mut [Complex64], unit: usize, work: W) -> Result<()>
where
    W: Fn(usize, &mut [Complex64]) -> Result<()> + Sync,
{
    let rows = buf.len() / unit;
    if threads <= 1 || rows < 2 * threads {
        return work(0, buf);
    }
    let chunk_rows = rows.div_ceil(threads);
    let results: Vec<Result<()>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        let mut rest = buf;
        let mut row0 = 0;
        while row0 < rows {
            let take_rows = chunk_rows.min(rows - row0);
            let (head, tail) = rest.split_at_mut(take_rows * unit);
            rest = tail;
            let w = &work;
            let start = row0;
            handles.push(scope.spawn(move || w(start, head)));
            row0 += take_rows;
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for r in results {
        r?;
    }
    Ok(())
}

/// Result of a scattering solve.
pub struct ScatteringSolution {
    /// Total-field modal coefficients at every node.
    pub field: ModalField,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    /// Mean wall time of one operator application.
    pub seconds_per_apply: f64,
    pub applies: usize,
}

/// Incident-wave choice for a scatterer: bodies centered off the origin get
/// the matching phase reference.
pub fn incident_kind_for(scatterer: &Scatterer) -> IncidentKind {
    match scatterer {
        Scatterer::OffsetSphere { offset, .. } => IncidentKind::AxialShifted(*offset),
        _ => IncidentKind::Axial,
    }
}

/// Solve `(I - (i/2) K) u = u^i` for the given configuration and scatterer.
pub fn solve_scattering(
    cfg: &SolverConfig,
    scatterer: &Scatterer,
    cache_dir: Option<&std::path::Path>,
) -> Result<ScatteringSolution> {
    let grid = RadialGrid::build(cfg.r_max, cfg.n_i, cfg.n_d)?;
    let moments = Arc::new(load_or_compute(
        cache_dir,
        &grid,
        cfg.f,
        cfg.wavenumber,
        cfg.threads,
    )?);
    let ctx = OperatorContext::build(cfg.clone(), scatterer, Some(moments), None)?;
    solve_with_context(&ctx, scatterer)
}

/// Solve using a prebuilt context (lets studies share tables and plans).
pub fn solve_with_context(
    ctx: &OperatorContext,
    scatterer: &Scatterer,
) -> Result<ScatteringSolution> {
    let incident = ctx.incident_field(incident_kind_for(scatterer))?;
    let n_modes = ctx.cfg.f + 1;
    let n_nodes = ctx.grid.node_count();
    let apply_time = std::cell::Cell::new(0.0f64);
    let apply_count = std::cell::Cell::new(0usize);
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        let field = ModalField {
            n_modes,
            n_nodes,
            data: x.to_vec(),
        };
        let t = Instant::now();
        let out = ctx.apply_forward(&field).expect("operator application failed");
        apply_time.set(apply_time.get() + t.elapsed().as_secs_f64());
        apply_count.set(apply_count.get() + 1);
        out.data
    };
    let gcfg = GmresConfig {
        tol: ctx.cfg.tol,
        max_iters: ctx.cfg.max_iters,
        restart: ctx.cfg.restart,
    };
    let GmresOutcome {
        solution,
        iterations,
        residuals,
    } = gmres_solve(apply, &incident.data, Some(&incident.data), &gcfg)?;
    let applies = apply_count.get().max(1);
    Ok(ScatteringSolution {
        field: ModalField {
            n_modes,
            n_nodes,
            data: solution,
        },
        iterations,
        residuals,
        seconds_per_apply: apply_time.get() / applies as f64,
        applies: apply_count.get(),
    })
}
