use std::f64::consts::PI;
use std::sync::Arc;

use super::maxwellian::MomentField;
use super::view::{CompiledView, DistributionView};
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::lowrank::{EntryOracle, SvdMatrix};
use crate::weno::{interpolate_at, split_shift};

struct TransportTerm {
    coef: f64,
    view: CompiledView,
    /// Integer and fractional part of the shift `v_j dt / dx`, per velocity.
    shifts: Vec<(isize, f64)>,
}

/// Sum of distributions, each evaluated at its own characteristic foot
/// `x_i - v_j * dt_eff` by WENO interpolation along `x`.
pub struct TransportOracle {
    nx: usize,
    nv: usize,
    terms: Vec<TransportTerm>,
}

impl TransportOracle {
    pub fn new(grid: &PhaseGrid) -> Self {
        TransportOracle {
            nx: grid.nx,
            nv: grid.nv,
            terms: Vec::new(),
        }
    }

    /// Adds `coef * f(x - v dt_eff, v)`. Negative `dt_eff` traces characteristics forward.
    pub fn add(
        &mut self,
        grid: &PhaseGrid,
        coef: f64,
        view: &DistributionView,
        dt_eff: f64,
    ) -> Result<()> {
        if !dt_eff.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "transport time must be finite, got {dt_eff}"
            )));
        }
        let view = view.compile(grid)?;
        let shifts = grid
            .v_centers
            .iter()
            .map(|&v| split_shift(v * dt_eff / grid.dx))
            .collect();
        self.terms.push(TransportTerm { coef, view, shifts });
        Ok(())
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

/// Semi-Lagrangian oracle for a single distribution.
pub fn sl_oracle(
    view: &DistributionView,
    grid: &PhaseGrid,
    dt_eff: f64,
) -> Result<TransportOracle> {
    let mut oracle = TransportOracle::new(grid);
    oracle.add(grid, 1.0, view, dt_eff)?;
    Ok(oracle)
}

impl EntryOracle for TransportOracle {
    fn shape(&self) -> (usize, usize) {
        (self.nx, self.nv)
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let (n, theta) = t.shifts[j];
                t.coef * interpolate_at(|k| t.view.value(k, j), i, n, theta)
            })
            .sum()
    }

    fn col(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut base = vec![0.0; self.nx];
        for t in &self.terms {
            t.view.column(j, &mut base);
            let ghost = t.view.ghost(j);
            let (n, theta) = t.shifts[j];
            for (i, o) in out.iter_mut().enumerate() {
                *o += t.coef * interpolate_at(|k| ghost.get(&base, k), i, n, theta);
            }
        }
    }
}

/// Stage relaxation `(eps f~ + a dt M[f~]) / (eps + a dt)`, evaluated entry by entry.
pub struct CollisionOracle {
    tilde: Arc<SvdMatrix>,
    keep: Vec<f64>,
    relax: Vec<f64>,
    u: Vec<f64>,
    inv_2t: Vec<f64>,
    v: Vec<f64>,
}

pub fn collision_oracle(
    tilde: Arc<SvdMatrix>,
    tilde_moments: &MomentField,
    grid: &PhaseGrid,
    a_kk_dt: f64,
    knudsen: &[f64],
) -> Result<CollisionOracle> {
    if !(a_kk_dt > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "a_kk dt must be positive, got {a_kk_dt}"
        )));
    }
    if tilde.shape() != grid.shape() {
        return Err(Error::ShapeMismatch {
            expected: grid.shape(),
            found: tilde.shape(),
        });
    }
    if knudsen.len() != grid.nx || tilde_moments.len() != grid.nx {
        return Err(Error::InvalidConfig(
            "per-cell inputs must have length nx".into(),
        ));
    }
    let mut keep = Vec::with_capacity(grid.nx);
    let mut relax = Vec::with_capacity(grid.nx);
    for i in 0..grid.nx {
        tilde_moments.cell(i).validate(i)?;
        let eps = knudsen[i];
        let denom = eps + a_kk_dt;
        keep.push(eps / denom);
        relax.push(
            a_kk_dt / denom * tilde_moments.rho[i]
                / (2.0 * PI * tilde_moments.temperature[i]).sqrt(),
        );
    }
    Ok(CollisionOracle {
        tilde,
        keep,
        relax,
        u: tilde_moments.u.clone(),
        inv_2t: tilde_moments.temperature.iter().map(|t| 0.5 / t).collect(),
        v: grid.v_centers.clone(),
    })
}

impl EntryOracle for CollisionOracle {
    fn shape(&self) -> (usize, usize) {
        self.tilde.shape()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let d = self.v[j] - self.u[i];
        self.keep[i] * self.tilde.get(i, j) + self.relax[i] * (-d * d * self.inv_2t[i]).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::kinetic::maxwellian::moments_from_lowrank;
    use crate::kinetic::view::GhostPolicy;
    use crate::lowrank::DenseMatrix;

    fn bump_state(g: &PhaseGrid) -> SvdMatrix {
        let d = DenseMatrix::from_fn(g.nx, g.nv, |i, j| {
            let x = g.x_centers[i];
            let v = g.v_centers[j];
            (1.0 + 0.3 * (2.0 * PI * x).sin()) * (-v * v / 2.0).exp()
                + 0.1 * (-(v - 1.0).powi(2)).exp() * (2.0 * PI * x).cos()
        });
        SvdMatrix::from_dense(&d, 1e-15).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let g = make_grid(0.0, 1.0, -6.0, 6.0, 16, 16).unwrap();
        let f = Arc::new(bump_state(&g));
        let view = DistributionView::from_lowrank(&g, f.clone(), GhostPolicy::Periodic);
        let o = sl_oracle(&view, &g, 0.0).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(o.entry(i, j), view.compile(&g).unwrap().inner(i, j));
            }
        }
    }

    #[test]
    fn rows_columns_and_entries_agree() {
        let g = make_grid(0.0, 1.0, -6.0, 6.0, 16, 12).unwrap();
        let f = Arc::new(bump_state(&g));
        let view = DistributionView::from_lowrank(&g, f, GhostPolicy::zero_inflow(&g));
        let o = sl_oracle(&view, &g, 0.013).unwrap();
        let mut col = vec![0.0; 16];
        let mut row = vec![0.0; 12];
        for j in 0..12 {
            o.col(j, &mut col);
            for i in 0..16 {
                assert!((col[i] - o.entry(i, j)).abs() < 1e-14);
            }
        }
        for i in 0..16 {
            o.row(i, &mut row);
            for j in 0..12 {
                assert!((row[j] - o.entry(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn collision_limits() {
        let g = make_grid(0.0, 1.0, -10.0, 10.0, 8, 64).unwrap();
        let f = Arc::new(bump_state(&g));
        let m = moments_from_lowrank(&f, &g).unwrap();
        let lazy = collision_oracle(f.clone(), &m, &g, 0.01, &[1e30; 8]).unwrap();
        let fluid = collision_oracle(f.clone(), &m, &g, 0.01, &[1e-16; 8]).unwrap();
        let mean = collision_oracle(f.clone(), &m, &g, 0.01, &[0.01; 8]).unwrap();
        for i in 0..8 {
            for j in 0..64 {
                let ft = f.get(i, j);
                let mx = m.cell(i).maxwellian(g.v_centers[j]);
                assert!((lazy.entry(i, j) - ft).abs() <= 1e-12 * ft.abs() + 1e-30);
                assert!((fluid.entry(i, j) - mx).abs() <= 1e-13 * mx + 1e-14 * ft.abs());
                assert!((mean.entry(i, j) - 0.5 * (ft + mx)).abs() <= 1e-15);
            }
        }
    }
}
