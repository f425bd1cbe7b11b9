//! Shared oracles: a full-grid backward Euler step built from the same kernels as the
//! solver but without compression, and a quadrature check of the half moments.
#![allow(dead_code)]

use kinetic_ar::bench::{BenchmarkSpec, ProblemTag};
use kinetic_ar::config::Overrides;
use kinetic_ar::integrator::Solver;
use kinetic_ar::lowrank::{DenseMatrix, FnOracle};
use kinetic_ar::macro_solver::{
    assemble_residual, half_moments_maxwellian, half_weights, jfnk_solve, FluxClosure, JfnkOptions,
    Side, SplitGhosts,
};
use kinetic_ar::weno::{weno5_interpolate, Ghost};
use kinetic_ar::{compute_dt, DirkTableau, MomentField, PhaseGrid, Primitive, SolverState};

pub fn moments(f: &DenseMatrix, grid: &PhaseGrid) -> MomentField {
    let mut raw = [vec![0.0; grid.nx], vec![0.0; grid.nx], vec![0.0; grid.nx]];
    for i in 0..grid.nx {
        for (j, &v) in grid.v_centers.iter().enumerate() {
            let w = f.get(i, j) * grid.dv;
            raw[0][i] += w;
            raw[1][i] += w * v;
            raw[2][i] += 0.5 * w * v * v;
        }
    }
    MomentField::from_conserved(&raw[0], &raw[1], &raw[2]).unwrap()
}

fn split_flux(p: &Primitive, side: Side) -> [f64; 3] {
    let m = half_moments_maxwellian(p.rho, p.u, p.temperature, side).unwrap();
    [m[1], m[2], 0.5 * m[3]]
}

/// One periodic backward Euler step of the dense distribution `f` with macroscopic
/// state `u_old` (packed). Returns the new distribution and macroscopic state.
pub fn dense_be_step(
    f: &DenseMatrix,
    u_old: &[f64],
    grid: &PhaseGrid,
    dt: f64,
    knudsen: &[f64],
    opts: &JfnkOptions,
) -> (DenseMatrix, Vec<f64>) {
    let (nx, nv) = (grid.nx, grid.nv);
    let mut tilde = DenseMatrix::zeros(nx, nv);
    for (j, &v) in grid.v_centers.iter().enumerate() {
        let col: Vec<f64> = (0..nx).map(|i| f.get(i, j)).collect();
        for (i, x) in weno5_interpolate(&col, v * dt / grid.dx, Ghost::Periodic)
            .into_iter()
            .enumerate()
        {
            tilde.set(i, j, x);
        }
    }
    let mt = moments(&tilde, grid);
    let star = DenseMatrix::from_fn(nx, nv, |i, j| {
        let m = mt.cell(i).maxwellian(grid.v_centers[j]);
        (knudsen[i] * tilde.get(i, j) + dt * m) / (knudsen[i] + dt)
    });
    let ms = moments(&star, grid);
    let mut fixed = [
        [vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]],
        [vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]],
    ];
    for (s, side) in [Side::Plus, Side::Minus].into_iter().enumerate() {
        let w = half_weights(grid, side);
        for i in 0..nx {
            let h = split_flux(&ms.cell(i), side);
            for c in 0..3 {
                let sum: f64 = (0..nv).map(|j| star.get(i, j) * w[c][j]).sum();
                fixed[s][c][i] = sum - h[c];
            }
        }
    }
    let [fixed_plus, fixed_minus] = fixed;
    let closure = FluxClosure {
        fixed_plus,
        fixed_minus,
        ghosts: SplitGhosts::Periodic,
    };
    let lambda = dt / grid.dx;
    let prior = vec![0.0; 3 * nx];
    let (u_newton, _) = jfnk_solve(
        |u| assemble_residual(u, u_old, &prior, &closure, lambda, 1.0),
        ms.to_packed(),
        opts,
    )
    .unwrap();
    let div = closure.flux_divergence(&u_newton).unwrap();
    let u_new: Vec<f64> = u_old
        .iter()
        .zip(&div)
        .map(|(u, d)| u - lambda * d)
        .collect();
    let converged = MomentField::from_packed(&u_new).unwrap();
    let f_new = DenseMatrix::from_fn(nx, nv, |i, j| {
        let v = grid.v_centers[j];
        star.get(i, j) - ms.cell(i).maxwellian(v) + converged.cell(i).maxwellian(v)
    });
    (f_new, u_new)
}

/// Max entry difference between one compressed backward Euler step at tight tolerances
/// and the full-grid reference.
pub fn be_step_gap(epsilon: f64, n: usize) -> f64 {
    let o = Overrides {
        nx: Some(n),
        nv: Some(n),
        epsilon: Some(epsilon),
        eps_c: Some(1e-12),
        eps_s: Some(1e-12),
        ..Default::default()
    };
    let mut spec = BenchmarkSpec::new(ProblemTag::ConsistentIc, &o).unwrap();
    spec.config.tableau = DirkTableau::backward_euler();
    let grid = spec.grid().unwrap();
    let solver = Solver::new(&grid, &spec.config).unwrap();
    let exact = DenseMatrix::from_fn(n, n, |i, j| {
        spec.initial_value(grid.x_centers[i], grid.v_centers[j])
    });
    let (f0, _) = solver
        .compress(&FnOracle::new(n, n, |i, j| exact.get(i, j)), 1)
        .unwrap();
    let state = SolverState::new(f0, &grid).unwrap();
    let dt = compute_dt(&grid, spec.config.cfl).unwrap();
    let (next, _) = solver.step(&state, dt).unwrap();

    let u0 = moments(&exact, &grid).to_packed();
    let opts = JfnkOptions {
        newton_tol: spec.config.newton_tol,
        ..Default::default()
    };
    let (reference, _) = dense_be_step(&exact, &u0, &grid, dt, solver.knudsen(), &opts);
    next.f.to_dense().sub(&reference).max_abs()
}

/// Composite Simpson rule for `int M v^n dv` over one half line, `points` subintervals.
fn quadrature(p: &Primitive, side: Side, points: usize) -> [f64; 4] {
    let reach = p.u.abs() + 40.0 * p.temperature.sqrt();
    let (a, b) = match side {
        Side::Plus => (0.0, reach),
        Side::Minus => (-reach, 0.0),
    };
    let h = (b - a) / points as f64;
    let mut acc = [0.0; 4];
    for k in 0..=points {
        let v = a + k as f64 * h;
        let w = if k == 0 || k == points {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let m = w * p.maxwellian(v);
        acc[0] += m;
        acc[1] += m * v;
        acc[2] += m * v * v;
        acc[3] += m * v * v * v;
    }
    acc.map(|x| x * h / 3.0)
}

fn states() -> Vec<Primitive> {
    let mut out = Vec::new();
    for rho in [0.1, 1.0, 3.0] {
        for u in [-2.0, -0.5, 0.0, 0.7, 2.0] {
            for t in [0.05, 0.4, 2.0] {
                out.push(Primitive::new(rho, u, t));
            }
        }
    }
    out
}

/// Largest error of the closed-form half moments against the quadrature oracle, each
/// measured relative to `int M |v|^n dv`, the scale of the moment it belongs to.
pub fn worst_half_moment_error(points: usize) -> f64 {
    let mut worst = 0.0f64;
    for p in states() {
        let plus = half_moments_maxwellian(p.rho, p.u, p.temperature, Side::Plus).unwrap();
        let minus = half_moments_maxwellian(p.rho, p.u, p.temperature, Side::Minus).unwrap();
        let qp = quadrature(&p, Side::Plus, points);
        let qm = quadrature(&p, Side::Minus, points);
        for n in 0..4 {
            let scale = qp[n].abs() + qm[n].abs();
            worst = worst
                .max((plus[n] - qp[n]).abs() / scale)
                .max((minus[n] - qm[n]).abs() / scale);
        }
    }
    worst
}

/// Largest relative gap between `plus + minus` and the full raw moments.
pub fn worst_telescoping_error() -> f64 {
    let mut worst = 0.0f64;
    for p in states() {
        let (rho, u, t) = (p.rho, p.u, p.temperature);
        let full = [
            rho,
            rho * u,
            rho * (u * u + t),
            rho * (u * u * u + 3.0 * u * t),
        ];
        let plus = half_moments_maxwellian(rho, u, t, Side::Plus).unwrap();
        let minus = half_moments_maxwellian(rho, u, t, Side::Minus).unwrap();
        let abs_scale = [
            rho,
            rho * (u.abs() + t.sqrt()),
            rho * (u * u + t),
            rho * (u.abs() + t.sqrt()).powi(3),
        ];
        for n in 0..4 {
            worst = worst.max((plus[n] + minus[n] - full[n]).abs() / abs_scale[n]);
        }
    }
    worst
}
