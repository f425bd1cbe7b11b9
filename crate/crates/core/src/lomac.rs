//! Moment correction of a provisional kinetic solution: the flux closure handed to
//! the macroscopic solver, and the corrected distribution built from its answer.

use std::sync::Arc;

use crate::error::Result;
use crate::grid::PhaseGrid;
use crate::kinetic::{moments_from_lowrank, DistributionView, GhostPolicy, MomentField};
use crate::lowrank::SvdMatrix;
use crate::macro_solver::{
    half_sums_lowrank, maxwellian_split_flux, FluxClosure, Side, SplitGhosts,
};

/// Freezes the non-equilibrium part of the split fluxes of `f_star`.
///
/// Returns the closure together with `U(f_star)`, the Newton initial guess.
pub fn build_closure(
    f_star: &SvdMatrix,
    grid: &PhaseGrid,
    ghosts: SplitGhosts,
) -> Result<(FluxClosure, MomentField)> {
    let moments = moments_from_lowrank(f_star, grid)?;
    let mut fixed_plus = half_sums_lowrank(f_star, grid, Side::Plus);
    let mut fixed_minus = half_sums_lowrank(f_star, grid, Side::Minus);
    for i in 0..grid.nx {
        let p = moments.cell(i);
        let hp = maxwellian_split_flux(&p, Side::Plus);
        let hm = maxwellian_split_flux(&p, Side::Minus);
        for c in 0..3 {
            fixed_plus[c][i] -= hp[c];
            fixed_minus[c][i] -= hm[c];
        }
    }
    Ok((
        FluxClosure {
            fixed_plus,
            fixed_minus,
            ghosts,
        },
        moments,
    ))
}

/// `f_star - M[U(f_star)] + M[U]`, kept unevaluated.
pub fn correct(
    f_star: Arc<SvdMatrix>,
    u_converged: &MomentField,
    grid: &PhaseGrid,
    ghosts: GhostPolicy,
) -> Result<DistributionView> {
    let provisional = moments_from_lowrank(&f_star, grid)?;
    Ok(correct_with(
        f_star,
        Arc::new(provisional),
        Arc::new(u_converged.clone()),
        grid,
        ghosts,
    ))
}

/// Same as [`correct`] with `U(f_star)` already known.
pub fn correct_with(
    f_star: Arc<SvdMatrix>,
    provisional: Arc<MomentField>,
    converged: Arc<MomentField>,
    grid: &PhaseGrid,
    ghosts: GhostPolicy,
) -> DistributionView {
    DistributionView::from_lowrank(grid, f_star, ghosts)
        .with_maxwellian(-1.0, provisional)
        .with_maxwellian(1.0, converged)
}
