//! One DIRK time step of the adaptive-rank scheme, and the time loop around it.
//!
//! Stage `k` of a step of size `dt` runs:
//! 1. transport: `f~ = S_{c_k dt}[f^n] + sum_{l<k} (a_kl / a_ll) S_{(c_k - c_l) dt}[F*_l - f~_l]`,
//!    compressed by ACA + SVD;
//! 2. relaxation: `F* = (eps f~ + a_kk dt M[f~]) / (eps + a_kk dt)`, compressed again;
//! 3. a Newton-Krylov solve of the stage moment equations with the flux closure of `F*`;
//! 4. moment correction `F_k = F* - M[U(F*)] + M[U_k]`, kept unevaluated.
//!
//! `F*_l - f~_l` equals `a_ll dt` times the stage collision term `(M[F_l] - F_l) / eps`,
//! so no division by the Knudsen number is needed. The last stage is the new solution; it is recompressed
//! once and the macroscopic state `U_s` is carried along unchanged.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{compute_dt, Boundary, PhaseGrid, SolverConfig};
use crate::kinetic::{
    collision_oracle, moments_from_lowrank, DistributionView, GhostPolicy, MomentField,
    TransportOracle,
};
use crate::lomac::{build_closure, correct_with};
use crate::lowrank::{Compression, RankDiagnostics, SvdMatrix};
use crate::macro_solver::{
    assemble_residual, jfnk_solve, JfnkOptions, JfnkReport, MacroState, SplitGhosts,
};

/// Kinetic and macroscopic solution at one time level.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub f: Arc<SvdMatrix>,
    /// Conservative moments, advanced by the implicit flux solve.
    pub macro_state: MacroState,
    pub t: f64,
    pub step: usize,
}

impl SolverState {
    /// Starts from `f`, taking the macroscopic state from its moments.
    pub fn new(f: SvdMatrix, grid: &PhaseGrid) -> Result<Self> {
        let m = moments_from_lowrank(&f, grid)?;
        Ok(SolverState {
            f: Arc::new(f),
            macro_state: m.to_packed(),
            t: 0.0,
            step: 0,
        })
    }

    pub fn moments(&self) -> Result<MomentField> {
        MomentField::from_packed(&self.macro_state)
    }

    /// `dx * sum_i (rho, rho u, E)_i`.
    pub fn conserved_totals(&self, grid: &PhaseGrid) -> [f64; 3] {
        let nx = grid.nx;
        std::array::from_fn(|c| {
            grid.dx * self.macro_state[c * nx..(c + 1) * nx].iter().sum::<f64>()
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageDiagnostics {
    pub stage: usize,
    /// ACA + SVD of the transported distribution.
    pub transport: RankDiagnostics,
    /// ACA + SVD of the relaxed distribution.
    pub relaxation: RankDiagnostics,
    pub jfnk: JfnkReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// Index of the step just completed, starting at 1.
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub stages: Vec<StageDiagnostics>,
    /// Compression of the final stage into the stored solution.
    pub output: RankDiagnostics,
    pub conserved: [f64; 3],
    pub wall_time: f64,
}

impl StepDiagnostics {
    pub fn cur_rank(&self) -> usize {
        self.output.cur_rank
    }

    pub fn svd_rank(&self) -> usize {
        self.output.svd_rank
    }

    pub fn newton_iters(&self) -> usize {
        self.stages.iter().map(|s| s.jfnk.newton_iters).sum()
    }

    pub fn krylov_iters(&self) -> usize {
        self.stages.iter().map(|s| s.jfnk.total_krylov()).sum()
    }
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub final_state: SolverState,
    pub initial_totals: [f64; 3],
    pub history: Vec<StepDiagnostics>,
}

impl SimulationResult {
    pub fn steps(&self) -> usize {
        self.history.len()
    }

    /// Largest `|total(t_n) - total(0)|` over all steps, per conserved component.
    pub fn max_drift(&self) -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for d in &self.history {
            for c in 0..3 {
                out[c] = out[c].max((d.conserved[c] - self.initial_totals[c]).abs());
            }
        }
        out
    }

    pub fn mean_svd_rank(&self) -> f64 {
        mean(self.history.iter().map(|d| d.svd_rank() as f64))
    }

    pub fn max_svd_rank(&self) -> usize {
        self.history.iter().map(|d| d.svd_rank()).max().unwrap_or(0)
    }

    /// Average Newton iterations per stage.
    pub fn mean_newton_per_stage(&self) -> f64 {
        mean(
            self.history
                .iter()
                .flat_map(|d| d.stages.iter().map(|s| s.jfnk.newton_iters as f64)),
        )
    }

    /// Average Krylov iterations per Newton iteration.
    pub fn mean_krylov_per_newton(&self) -> f64 {
        mean(self.history.iter().flat_map(|d| {
            d.stages
                .iter()
                .flat_map(|s| s.jfnk.krylov_iters_per_newton.iter().map(|&k| k as f64))
        }))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Deterministic seed for one ACA call.
fn derive_seed(seed: u64, step: usize, stage: usize, which: usize) -> u64 {
    let mut z = seed ^ ((step as u64) << 20) ^ ((stage as u64) << 8) ^ which as u64;
    // splitmix64 finaliser
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct StageRecord {
    tilde: Arc<SvdMatrix>,
    star: Arc<SvdMatrix>,
    star_moments: Arc<MomentField>,
    converged: Arc<MomentField>,
    divergence: Vec<f64>,
}

/// Solver bound to a grid and configuration.
pub struct Solver {
    pub grid: PhaseGrid,
    pub cfg: SolverConfig,
    knudsen: Vec<f64>,
    compression: Compression,
    jfnk: JfnkOptions,
    ghosts: GhostPolicy,
    split_ghosts: SplitGhosts,
}

impl Solver {
    pub fn new(grid: &PhaseGrid, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate(grid)?;
        let (ghosts, split_ghosts) = match &cfg.bc {
            Boundary::Periodic => (GhostPolicy::Periodic, SplitGhosts::Periodic),
            Boundary::FixedInflow { left, right } => (
                GhostPolicy::maxwellian_inflow(grid, left, right),
                SplitGhosts::maxwellian(left, right),
            ),
        };
        Ok(Solver {
            grid: grid.clone(),
            cfg: cfg.clone(),
            knudsen: cfg.knudsen.field(grid)?,
            compression: Compression {
                eps_c: cfg.eps_c,
                eps_s: cfg.eps_s,
                max_rank: cfg.max_rank_for(grid),
                candidates: cfg.aca_candidates,
            },
            jfnk: JfnkOptions {
                newton_tol: cfg.newton_tol,
                krylov_tol: cfg.krylov_tol,
                max_newton: cfg.max_newton,
                max_krylov: cfg.max_krylov,
                restart: cfg.gmres_restart,
                perturbation: cfg.jfnk_perturbation,
                ..Default::default()
            },
            ghosts,
            split_ghosts,
        })
    }

    pub fn knudsen(&self) -> &[f64] {
        &self.knudsen
    }

    /// Compresses an arbitrary oracle with the solver's tolerances.
    pub fn compress(
        &self,
        oracle: &impl crate::lowrank::EntryOracle,
        seed: u64,
    ) -> Result<(SvdMatrix, RankDiagnostics)> {
        self.compression.compress(oracle, seed)
    }

    pub fn step(&self, state: &SolverState, dt: f64) -> Result<(SolverState, StepDiagnostics)> {
        if !(dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let start = Instant::now();
        let step_index = state.step + 1;
        let grid = &self.grid;
        let tab = &self.cfg.tableau;
        let s = tab.stages();
        let lambda = dt / grid.dx;
        let seed = self.cfg.seed;
        let f_view = DistributionView::from_lowrank(grid, state.f.clone(), self.ghosts.clone());

        let mut records: Vec<StageRecord> = Vec::with_capacity(s);
        let mut stage_diags = Vec::with_capacity(s);
        for k in 0..s {
            let run_stage = || -> Result<(StageRecord, StageDiagnostics)> {
                let akk = tab.a[k][k];
                let mut transport = TransportOracle::new(grid);
                transport.add(grid, 1.0, &f_view, tab.c[k] * dt)?;
                for (l, rec) in records.iter().enumerate() {
                    let akl = tab.a[k][l];
                    if akl == 0.0 {
                        continue;
                    }
                    let ghosts = match self.ghosts {
                        GhostPolicy::Periodic => GhostPolicy::Periodic,
                        _ => GhostPolicy::Extrapolate,
                    };
                    let collision = DistributionView::from_lowrank(grid, rec.star.clone(), ghosts)
                        .with_lowrank(-1.0, rec.tilde.clone());
                    transport.add(
                        grid,
                        akl / tab.a[l][l],
                        &collision,
                        (tab.c[k] - tab.c[l]) * dt,
                    )?;
                }
                let (tilde, transport_diag) = self
                    .compression
                    .compress(&transport, derive_seed(seed, step_index, k, 0))?;
                drop(transport);
                let tilde = Arc::new(tilde);
                let tilde_moments = moments_from_lowrank(&tilde, grid)?;
                let relax =
                    collision_oracle(tilde.clone(), &tilde_moments, grid, akk * dt, &self.knudsen)?;
                let (star, relax_diag) = self
                    .compression
                    .compress(&relax, derive_seed(seed, step_index, k, 1))?;
                let star = Arc::new(star);

                let (closure, star_moments) =
                    build_closure(&star, grid, self.split_ghosts.clone())?;
                let n3 = 3 * grid.nx;
                let mut prior = vec![0.0; n3];
                for (l, rec) in records.iter().enumerate() {
                    let akl = tab.a[k][l];
                    for (p, d) in prior.iter_mut().zip(&rec.divergence) {
                        *p += akl * d;
                    }
                }
                let u_old = &state.macro_state;
                let (u_newton, report) = jfnk_solve(
                    |u| assemble_residual(u, u_old, &prior, &closure, lambda, akk),
                    star_moments.to_packed(),
                    &self.jfnk,
                )?;
                // Re-apply the converged fluxes explicitly so that totals change only by
                // telescoping flux differences, independent of the Newton residual.
                let divergence = closure.flux_divergence(&u_newton)?;
                let u_stage: Vec<f64> = (0..n3)
                    .map(|q| u_old[q] - lambda * (akk * divergence[q] + prior[q]))
                    .collect();
                let converged = MomentField::from_packed(&u_stage)?;
                Ok((
                    StageRecord {
                        tilde,
                        star,
                        star_moments: Arc::new(star_moments),
                        converged: Arc::new(converged),
                        divergence,
                    },
                    StageDiagnostics {
                        stage: k,
                        transport: transport_diag,
                        relaxation: relax_diag,
                        jfnk: report,
                    },
                ))
            };
            let (rec, diag) = run_stage().map_err(|e| e.in_stage(step_index, k))?;
            records.push(rec);
            stage_diags.push(diag);
        }

        let last = records.pop().expect("at least one stage");
        let final_view = correct_with(
            last.star.clone(),
            last.star_moments.clone(),
            last.converged.clone(),
            grid,
            self.ghosts.clone(),
        )
        .compile(grid)?;
        let (f_next, output_diag) = self
            .compression
            .compress(&final_view, derive_seed(seed, step_index, s, 2))
            .map_err(|e| e.in_stage(step_index, s))?;

        let next = SolverState {
            f: Arc::new(f_next),
            macro_state: last.converged.to_packed(),
            t: state.t + dt,
            step: step_index,
        };
        let diag = StepDiagnostics {
            step: step_index,
            t: next.t,
            dt,
            stages: stage_diags,
            output: output_diag,
            conserved: next.conserved_totals(grid),
            wall_time: start.elapsed().as_secs_f64(),
        };
        Ok((next, diag))
    }

    /// Steps from `initial` to `t_final` with `dt = cfl dx / max|v|`, shortening the
    /// last step to land on `t_final`. `observer` sees every completed step.
    pub fn run(
        &self,
        initial: SolverState,
        t_final: f64,
        mut observer: impl FnMut(&StepDiagnostics, &SolverState),
    ) -> Result<SimulationResult> {
        if !(t_final > initial.t) {
            return Err(Error::InvalidConfig(format!(
                "final time {t_final} must exceed the start time {}",
                initial.t
            )));
        }
        let dt0 = compute_dt(&self.grid, self.cfg.cfl)?;
        let t0 = initial.t;
        let initial_totals = initial.conserved_totals(&self.grid);
        let mut state = initial;
        let mut history = Vec::new();
        let mut full_steps = 0usize;
        loop {
            let remaining = t_final - state.t;
            if remaining <= 1e-12 * dt0 {
                break;
            }
            let last = remaining <= dt0 * (1.0 + 1e-10);
            let dt = if last { remaining } else { dt0 };
            let (mut next, mut diag) = self.step(&state, dt)?;
            if last {
                next.t = t_final;
            } else {
                full_steps += 1;
                next.t = t0 + full_steps as f64 * dt0;
            }
            diag.t = next.t;
            observer(&diag, &next);
            history.push(diag);
            state = next;
        }
        Ok(SimulationResult {
            final_state: state,
            initial_totals,
            history,
        })
    }
}

/// One time step; see [`Solver::step`].
pub fn step(
    state: &SolverState,
    dt: f64,
    cfg: &SolverConfig,
    grid: &PhaseGrid,
) -> Result<(SolverState, StepDiagnostics)> {
    Solver::new(grid, cfg)?.step(state, dt)
}

/// Time loop; see [`Solver::run`].
pub fn run(
    initial: SolverState,
    t_final: f64,
    cfg: &SolverConfig,
    grid: &PhaseGrid,
    observer: impl FnMut(&StepDiagnostics, &SolverState),
) -> Result<SimulationResult> {
    Solver::new(grid, cfg)?.run(initial, t_final, observer)
}
