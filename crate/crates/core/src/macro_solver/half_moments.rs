use std::f64::consts::PI;

use crate::error::Result;
use crate::grid::PhaseGrid;
use crate::kinetic::Primitive;
use crate::lowrank::SvdMatrix;

/// Half of the velocity axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// `int M v^n dv` over `v > 0` (`Plus`) or `v < 0` (`Minus`) for `n = 0..=3`.
///
/// With `m_n` the half moments and `M0 = M(v = 0)`, integration by parts gives
/// `m_1 = u m_0 +- T M0`, `m_2 = u m_1 + T m_0`, `m_3 = u m_2 + 2 T m_1`.
pub fn half_moments_maxwellian(rho: f64, u: f64, temperature: f64, side: Side) -> Result<[f64; 4]> {
    let p = Primitive::new(rho, u, temperature);
    p.validate(0)?;
    Ok(half_moments_unchecked(&p, side))
}

#[inline]
pub(crate) fn half_moments_unchecked(p: &Primitive, side: Side) -> [f64; 4] {
    let s = side.sign();
    let (rho, u, t) = (p.rho, p.u, p.temperature);
    let m0 = 0.5 * rho * libm::erfc(-s * u / (2.0 * t).sqrt());
    let at_zero = rho / (2.0 * PI * t).sqrt() * (-u * u / (2.0 * t)).exp();
    let m1 = u * m0 + s * t * at_zero;
    let m2 = u * m1 + t * m0;
    let m3 = u * m2 + 2.0 * t * m1;
    [m0, m1, m2, m3]
}

/// Split Maxwellian flux `(m_1, m_2, m_3 / 2)` of the conserved variables.
#[inline]
pub(crate) fn maxwellian_split_flux(p: &Primitive, side: Side) -> [f64; 3] {
    let m = half_moments_unchecked(p, side);
    [m[1], m[2], 0.5 * m[3]]
}

/// Midpoint quadrature weights `dv * (v+, v+^2, v+^3 / 2)` on the chosen side
/// (`v+ = max(v, 0)` or `min(v, 0)`). A cell centred exactly at `v = 0` carries zero
/// weight for all three, so it belongs to neither side.
pub fn half_weights(grid: &PhaseGrid, side: Side) -> [Vec<f64>; 3] {
    let vs: Vec<f64> = grid
        .v_centers
        .iter()
        .map(|&v| match side {
            Side::Plus => v.max(0.0),
            Side::Minus => v.min(0.0),
        })
        .collect();
    let dv = grid.dv;
    [
        vs.iter().map(|v| dv * v).collect(),
        vs.iter().map(|v| dv * v * v).collect(),
        vs.iter().map(|v| 0.5 * dv * v * v * v).collect(),
    ]
}

/// Midpoint half sums `dv * sum_j f_ij w(v_j)`, see [`half_weights`].
pub fn half_sums_lowrank(f: &SvdMatrix, grid: &PhaseGrid, side: Side) -> [Vec<f64>; 3] {
    let [w1, w2, w3] = half_weights(grid, side);
    [f.apply_right(&w1), f.apply_right(&w2), f.apply_right(&w3)]
}
