//! Adaptive-rank semi-Lagrangian solver for the 1D1V BGK equation.
//!
//! The distribution function lives on a cell-centred `(x, v)` mesh and is kept as a
//! truncated SVD. Each implicit stage transports the previous solution along
//! characteristics, relaxes it towards the local Maxwellian, and then corrects its
//! moments to match a conservative macroscopic solve.

pub mod bench;
pub mod config;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod kinetic;
pub mod lomac;
pub mod lowrank;
pub mod macro_solver;
pub mod weno;

pub use error::{Error, Result};
pub use grid::{compute_dt, make_grid, Boundary, DirkTableau, Knudsen, PhaseGrid, SolverConfig};
pub use integrator::{run, step, SimulationResult, SolverState, StepDiagnostics};
pub use kinetic::{maxwellian, DistributionView, MomentField, Primitive};
pub use lowrank::{
    aca_decompose, add_lowrank, evaluate_entries, svd_truncate, CurFactors, EntryOracle, SvdMatrix,
};
