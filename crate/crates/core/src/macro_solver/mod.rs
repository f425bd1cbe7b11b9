//! Implicit conservative solver for the moment system: kinetic flux-vector splitting,
//! WENO-JS interface fluxes and a Jacobian-free Newton-Krylov driver.

mod flux;
mod half_moments;
mod krylov;

pub use flux::{assemble_residual, divergence, weno_flux_reconstruct, FluxClosure, SplitGhosts};
pub use half_moments::{half_moments_maxwellian, half_sums_lowrank, half_weights, Side};
pub use krylov::{gmres, jfnk_solve, GmresOutcome, JfnkOptions, JfnkReport};

pub(crate) use half_moments::maxwellian_split_flux;

/// Packed macroscopic state `[rho_0.., (rho u)_0.., E_0..]`.
pub type MacroState = Vec<f64>;
