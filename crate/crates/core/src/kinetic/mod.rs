//! Pointwise kinetic physics: Maxwellians, moments, characteristic transport and
//! the stage relaxation formula, all exposed through entry oracles.

mod maxwellian;
mod oracles;
mod view;

pub use crate::weno::weno5_interpolate;
pub use maxwellian::{
    maxwellian, moments_from_lowrank, raw_moments_lowrank, raw_moments_maxwellian, MomentField,
    Primitive,
};
pub use oracles::{collision_oracle, sl_oracle, CollisionOracle, TransportOracle};
pub use view::{CompiledView, DistributionView, GhostPolicy};
