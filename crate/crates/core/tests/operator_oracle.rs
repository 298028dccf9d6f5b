//! The fast operator against a dense brute-force application, and the
//! pointwise residual of a computed solution in the original integral
//! equation.

mod common;

use num_complex::Complex64;

use axiscat::operator::{
    incident_kind_for, solve_with_context, OperatorContext, SolverConfig,
};
use axiscat::radialkernel::fit_radial;
use axiscat::scatterers::Scatterer;

fn rng_stream(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed;
    move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }
}

#[test]
fn fast_apply_matches_bruteforce_operator() {
    let cfg = SolverConfig::new(8, 4, 4, 1.0);
    let sphere = Scatterer::HomogeneousSphere {
        radius: 1.0,
        index: 2.0,
    };
    let ctx = OperatorContext::build(cfg.clone(), &sphere, None, None).unwrap();
    let mut rng = rng_stream(41);
    let mut v = axiscat::radialkernel::ModalField::zeros(9, 16);
    for c in v.data.iter_mut() {
        *c = Complex64::new(rng(), rng());
    }
    let fast = ctx.apply_forward(&v).unwrap();
    let dense = common::apply_bruteforce(&ctx, &cfg, &sphere, &v.data);
    let scale = dense.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (i, (f, d)) in fast.data.iter().zip(&dense).enumerate() {
        assert!(
            (f - d).norm() <= 1e-6 * scale,
            "entry {i}: fast {f} vs dense {d} (scale {scale:.3e})"
        );
    }
}

#[test]
fn solution_satisfies_integral_equation_pointwise() {
    // solve at moderate resolution, then check
    //   u(rho, t) = u^i(rho, t) + (i/2) sum_n K_n(rho) P_n(t)
    // at random angles with K_n evaluated by adaptive quadrature from the
    // solution's own angular integrals
    let mut cfg = SolverConfig::new(24, 8, 4, 1.0);
    cfg.tol = 1e-11;
    let sphere = Scatterer::HomogeneousSphere {
        radius: 1.0,
        index: 2.0,
    };
    let ctx = OperatorContext::build(cfg.clone(), &sphere, None, None).unwrap();
    let out = solve_with_context(&ctx, &sphere).unwrap();
    let incident = ctx.incident_field(incident_kind_for(&sphere)).unwrap();
    let grid = &ctx.grid;
    let n_modes = cfg.f + 1;
    let n_nodes = grid.node_count();
    // angular integrals of the solution at every node, then fits per mode
    let mut i_all = vec![Complex64::default(); n_modes * n_nodes];
    for g in 0..n_nodes {
        let i_n = ctx.angular_integrate(g, out.field.node(g)).unwrap();
        for n in 0..n_modes {
            i_all[n * n_nodes + g] = i_n[n];
        }
    }
    let fits: Vec<Vec<Complex64>> = (0..n_modes)
        .map(|n| fit_radial(grid, &i_all[n * n_nodes..(n + 1) * n_nodes]).unwrap())
        .collect();
    let mut rng = rng_stream(97);
    let scale = out.field.sup_norm();
    for trial in 0..10 {
        let g = ((rng() + 0.5) * n_nodes as f64) as usize % n_nodes;
        let ct = 2.0 * rng();
        let rho = grid.nodes()[g];
        let u_here = out.field.eval_at_node(g, ct);
        let ui_here = incident.eval_at_node(g, ct);
        let col = axiscat::orthopoly::legendre_column(cfg.f, ct);
        let mut k_sum = Complex64::default();
        for n in 0..n_modes {
            let kn = common::kernel_bruteforce(grid, n, rho, cfg.wavenumber, &fits[n]);
            k_sum += kn * col[n];
        }
        let residual = (u_here - ui_here - Complex64::new(0.0, 0.5) * k_sum).norm();
        assert!(
            residual <= 1e-8 * scale,
            "trial {trial} (g={g}, ct={ct:.3}): residual {residual:.3e} vs scale {scale:.3e}"
        );
    }
}
