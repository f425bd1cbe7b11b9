use crate::error::Result;
use crate::kinetic::Primitive;
use crate::weno::weno5_reconstruct;

use super::half_moments::{maxwellian_split_flux, Side};

/// Split fluxes outside the domain.
#[derive(Clone, Debug, PartialEq)]
pub enum SplitGhosts {
    Periodic,
    /// `(plus, minus)` split fluxes held fixed left and right of the domain.
    Fixed {
        left: ([f64; 3], [f64; 3]),
        right: ([f64; 3], [f64; 3]),
    },
}

impl SplitGhosts {
    /// Ghost split fluxes of two frozen Maxwellian boundary states.
    pub fn maxwellian(left: &Primitive, right: &Primitive) -> Self {
        SplitGhosts::Fixed {
            left: (
                maxwellian_split_flux(left, Side::Plus),
                maxwellian_split_flux(left, Side::Minus),
            ),
            right: (
                maxwellian_split_flux(right, Side::Plus),
                maxwellian_split_flux(right, Side::Minus),
            ),
        }
    }
}

/// Interface fluxes `F_{p - 1/2}` for `p = 0..=nx` from cell-wise split fluxes.
///
/// `F_{i+1/2} = R+(F+_{i-2..=i+2}) + R-(F-_{i-1..=i+3})` with fifth-order WENO-JS on each
/// conserved component.
pub fn weno_flux_reconstruct(
    plus: &[Vec<f64>; 3],
    minus: &[Vec<f64>; 3],
    ghosts: &SplitGhosts,
) -> Vec<[f64; 3]> {
    let nx = plus[0].len();
    let n = nx as isize;
    let get = |side: &[Vec<f64>; 3], is_plus: bool, c: usize, k: isize| -> f64 {
        if (0..n).contains(&k) {
            return side[c][k as usize];
        }
        match ghosts {
            SplitGhosts::Periodic => side[c][k.rem_euclid(n) as usize],
            SplitGhosts::Fixed { left, right } => {
                let g = if k < 0 { left } else { right };
                if is_plus {
                    g.0[c]
                } else {
                    g.1[c]
                }
            }
        }
    };
    let interfaces = if matches!(ghosts, SplitGhosts::Periodic) {
        nx
    } else {
        nx + 1
    };
    let mut out = Vec::with_capacity(nx + 1);
    for p in 0..interfaces as isize {
        let mut flux = [0.0; 3];
        for (c, fc) in flux.iter_mut().enumerate() {
            let fp = std::array::from_fn(|k| get(plus, true, c, p - 3 + k as isize));
            let fm = std::array::from_fn(|k| get(minus, false, c, p + 2 - k as isize));
            *fc = weno5_reconstruct(fp) + weno5_reconstruct(fm);
        }
        out.push(flux);
    }
    if interfaces == nx {
        // Periodic: the last interface is the first one, bit for bit.
        out.push(out[0]);
    }
    out
}

/// Part of the interface flux that stays frozen during a Newton solve.
///
/// For each side this is the half sum of the provisional distribution minus the
/// analytic half moments of its own Maxwellian.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxClosure {
    pub fixed_plus: [Vec<f64>; 3],
    pub fixed_minus: [Vec<f64>; 3],
    pub ghosts: SplitGhosts,
}

impl FluxClosure {
    /// A closure with no non-equilibrium part (pure kinetic flux-vector splitting).
    pub fn equilibrium(nx: usize, ghosts: SplitGhosts) -> Self {
        FluxClosure {
            fixed_plus: [vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]],
            fixed_minus: [vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]],
            ghosts,
        }
    }

    pub fn nx(&self) -> usize {
        self.fixed_plus[0].len()
    }

    /// Split fluxes of the trial state `u` (packed), fixed part included.
    pub fn split_fluxes(&self, u: &[f64]) -> Result<([Vec<f64>; 3], [Vec<f64>; 3])> {
        let nx = self.nx();
        let mut plus = self.fixed_plus.clone();
        let mut minus = self.fixed_minus.clone();
        for i in 0..nx {
            let p = Primitive::from_conserved(i, u[i], u[nx + i], u[2 * nx + i])?;
            let hp = maxwellian_split_flux(&p, Side::Plus);
            let hm = maxwellian_split_flux(&p, Side::Minus);
            for c in 0..3 {
                plus[c][i] += hp[c];
                minus[c][i] += hm[c];
            }
        }
        Ok((plus, minus))
    }

    pub fn interface_fluxes(&self, u: &[f64]) -> Result<Vec<[f64; 3]>> {
        let (plus, minus) = self.split_fluxes(u)?;
        Ok(weno_flux_reconstruct(
            &plus,
            &minus,
            &self.effective_ghosts(),
        ))
    }

    /// Fixed ghosts carry the boundary Maxwellian plus the frozen non-equilibrium part
    /// of the adjacent cell. Without the latter, any bias in the frozen part (compression
    /// error, quadrature error of the half sums) cancels in the interior but not at the
    /// first and last interfaces.
    fn effective_ghosts(&self) -> SplitGhosts {
        match &self.ghosts {
            SplitGhosts::Periodic => SplitGhosts::Periodic,
            SplitGhosts::Fixed { left, right } => {
                let last = self.nx() - 1;
                let shift = |g: &[f64; 3], fixed: &[Vec<f64>; 3], i: usize| -> [f64; 3] {
                    std::array::from_fn(|c| g[c] + fixed[c][i])
                };
                SplitGhosts::Fixed {
                    left: (
                        shift(&left.0, &self.fixed_plus, 0),
                        shift(&left.1, &self.fixed_minus, 0),
                    ),
                    right: (
                        shift(&right.0, &self.fixed_plus, last),
                        shift(&right.1, &self.fixed_minus, last),
                    ),
                }
            }
        }
    }

    /// Packed `F_{i+1/2} - F_{i-1/2}` for every cell.
    pub fn flux_divergence(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(divergence(&self.interface_fluxes(u)?))
    }
}

/// Packed differences of consecutive interface fluxes.
pub fn divergence(interfaces: &[[f64; 3]]) -> Vec<f64> {
    let nx = interfaces.len() - 1;
    let mut out = vec![0.0; 3 * nx];
    for c in 0..3 {
        for i in 0..nx {
            out[c * nx + i] = interfaces[i + 1][c] - interfaces[i][c];
        }
    }
    out
}

/// `G(U) = U - U_old + lambda * (a_kk * D(U) + prior)`, where `lambda = dt / dx`,
/// `D` is the flux divergence under `closure` and `prior = sum_{l<k} a_kl D_l`.
pub fn assemble_residual(
    u_trial: &[f64],
    u_old: &[f64],
    prior: &[f64],
    closure: &FluxClosure,
    lambda: f64,
    a_kk: f64,
) -> Result<Vec<f64>> {
    let d = closure.flux_divergence(u_trial)?;
    Ok(u_trial
        .iter()
        .zip(u_old)
        .zip(d.iter().zip(prior))
        .map(|((u, uo), (d, p))| u - uo + lambda * (a_kk * d + p))
        .collect())
}
