use std::f64::consts::PI;
use std::sync::Arc;

use super::maxwellian::{raw_moments_lowrank, raw_moments_maxwellian, MomentField, Primitive};
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::lowrank::{EntryOracle, SvdMatrix};

/// What the distribution looks like outside `[x_min, x_max]`.
#[derive(Clone, Debug, PartialEq)]
pub enum GhostPolicy {
    Periodic,
    /// Per-velocity values used left of the domain and right of it.
    Inflow {
        left: Vec<f64>,
        right: Vec<f64>,
    },
    /// Zero-gradient continuation of the edge cells.
    Extrapolate,
}

impl GhostPolicy {
    /// Ghosts frozen at the Maxwellians of two boundary states.
    pub fn maxwellian_inflow(grid: &PhaseGrid, left: &Primitive, right: &Primitive) -> Self {
        GhostPolicy::Inflow {
            left: grid.v_centers.iter().map(|&v| left.maxwellian(v)).collect(),
            right: grid
                .v_centers
                .iter()
                .map(|&v| right.maxwellian(v))
                .collect(),
        }
    }

    pub fn zero_inflow(grid: &PhaseGrid) -> Self {
        GhostPolicy::Inflow {
            left: vec![0.0; grid.nv],
            right: vec![0.0; grid.nv],
        }
    }
}

/// A lazily evaluated linear combination of factored matrices and Maxwellians.
///
/// `entry(i, j) = sum_k a_k L_k(i, j) + sum_m b_m M_{U_m}(x_i, v_j)`.
#[derive(Clone, Debug)]
pub struct DistributionView {
    pub nx: usize,
    pub nv: usize,
    pub lowrank: Vec<(f64, Arc<SvdMatrix>)>,
    pub maxwellians: Vec<(f64, Arc<MomentField>)>,
    pub ghosts: GhostPolicy,
}

impl DistributionView {
    pub fn new(grid: &PhaseGrid, ghosts: GhostPolicy) -> Self {
        DistributionView {
            nx: grid.nx,
            nv: grid.nv,
            lowrank: Vec::new(),
            maxwellians: Vec::new(),
            ghosts,
        }
    }

    pub fn from_lowrank(grid: &PhaseGrid, f: Arc<SvdMatrix>, ghosts: GhostPolicy) -> Self {
        let mut view = Self::new(grid, ghosts);
        view.lowrank.push((1.0, f));
        view
    }

    pub fn with_lowrank(mut self, coef: f64, f: Arc<SvdMatrix>) -> Self {
        self.lowrank.push((coef, f));
        self
    }

    pub fn with_maxwellian(mut self, coef: f64, field: Arc<MomentField>) -> Self {
        self.maxwellians.push((coef, field));
        self
    }

    pub fn check(&self, grid: &PhaseGrid) -> Result<()> {
        for (_, f) in &self.lowrank {
            if f.shape() != grid.shape() {
                return Err(Error::ShapeMismatch {
                    expected: grid.shape(),
                    found: f.shape(),
                });
            }
        }
        for (_, m) in &self.maxwellians {
            if m.len() != grid.nx {
                return Err(Error::ShapeMismatch {
                    expected: grid.shape(),
                    found: (m.len(), grid.nv),
                });
            }
        }
        if let GhostPolicy::Inflow { left, right } = &self.ghosts {
            if left.len() != grid.nv || right.len() != grid.nv {
                return Err(Error::ShapeMismatch {
                    expected: grid.shape(),
                    found: (grid.nx, left.len().min(right.len())),
                });
            }
        }
        Ok(())
    }

    pub fn compile(&self, grid: &PhaseGrid) -> Result<CompiledView> {
        CompiledView::new(self, grid)
    }

    /// Midpoint moments of the view, term by term.
    pub fn raw_moments(&self, grid: &PhaseGrid) -> Result<[Vec<f64>; 3]> {
        self.check(grid)?;
        let mut out = [vec![0.0; grid.nx], vec![0.0; grid.nx], vec![0.0; grid.nx]];
        let mut add = |coef: f64, m: [Vec<f64>; 3]| {
            for (o, t) in out.iter_mut().zip(m) {
                for (a, b) in o.iter_mut().zip(t) {
                    *a += coef * b;
                }
            }
        };
        for (c, f) in &self.lowrank {
            add(*c, raw_moments_lowrank(f, grid)?);
        }
        for (c, m) in &self.maxwellians {
            add(*c, raw_moments_maxwellian(m, grid));
        }
        Ok(out)
    }

    pub fn moments(&self, grid: &PhaseGrid) -> Result<MomentField> {
        let [r, m, e] = self.raw_moments(grid)?;
        MomentField::from_conserved(&r, &m, &e)
    }
}

#[derive(Clone, Copy, Debug)]
struct MaxwellCell {
    amp: f64,
    u: f64,
    inv_2t: f64,
}

/// A [`DistributionView`] flattened for fast evaluation: all factored terms are merged
/// into one `left (nx x R) * right (nv x R)^T` product and Maxwellian parameters are
/// precomputed per cell.
#[derive(Clone, Debug)]
pub struct CompiledView {
    pub nx: usize,
    pub nv: usize,
    rank: usize,
    left: Vec<f64>,
    right: Vec<f64>,
    n_maxwell: usize,
    maxwell: Vec<MaxwellCell>,
    v: Vec<f64>,
    ghosts: GhostPolicy,
}

impl CompiledView {
    fn new(view: &DistributionView, grid: &PhaseGrid) -> Result<Self> {
        view.check(grid)?;
        let (nx, nv) = grid.shape();
        let rank: usize = view.lowrank.iter().map(|(_, f)| f.rank()).sum();
        let mut left = vec![0.0; nx * rank];
        let mut right = vec![0.0; nv * rank];
        let mut offset = 0;
        for (coef, f) in &view.lowrank {
            let r = f.rank();
            for i in 0..nx {
                left[i * rank + offset..i * rank + offset + r].copy_from_slice(f.u_row(i));
            }
            for j in 0..nv {
                let vj = f.v_row(j);
                for l in 0..r {
                    right[j * rank + offset + l] = coef * f.sigma[l] * vj[l];
                }
            }
            offset += r;
        }
        let n_maxwell = view.maxwellians.len();
        let mut maxwell = Vec::with_capacity(n_maxwell * nx);
        for i in 0..nx {
            for (coef, m) in &view.maxwellians {
                let t = m.temperature[i];
                maxwell.push(MaxwellCell {
                    amp: coef * m.rho[i] / (2.0 * PI * t).sqrt(),
                    u: m.u[i],
                    inv_2t: 0.5 / t,
                });
            }
        }
        Ok(CompiledView {
            nx,
            nv,
            rank,
            left,
            right,
            n_maxwell,
            maxwell,
            v: grid.v_centers.clone(),
            ghosts: view.ghosts.clone(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ghosts(&self) -> &GhostPolicy {
        &self.ghosts
    }

    /// Value inside the domain.
    #[inline]
    pub fn inner(&self, i: usize, j: usize) -> f64 {
        let r = self.rank;
        let a = &self.left[i * r..(i + 1) * r];
        let b = &self.right[j * r..(j + 1) * r];
        let mut s = 0.0;
        for l in 0..r {
            s += a[l] * b[l];
        }
        let v = self.v[j];
        for m in &self.maxwell[i * self.n_maxwell..(i + 1) * self.n_maxwell] {
            let d = v - m.u;
            s += m.amp * (-d * d * m.inv_2t).exp();
        }
        s
    }

    /// Value at any integer cell index, applying the ghost policy outside the domain.
    #[inline]
    pub fn value(&self, i: isize, j: usize) -> f64 {
        let n = self.nx as isize;
        if (0..n).contains(&i) {
            return self.inner(i as usize, j);
        }
        match &self.ghosts {
            GhostPolicy::Periodic => self.inner(i.rem_euclid(n) as usize, j),
            GhostPolicy::Inflow { left, right } => {
                if i < 0 {
                    left[j]
                } else {
                    right[j]
                }
            }
            GhostPolicy::Extrapolate => self.inner(i.clamp(0, n - 1) as usize, j),
        }
    }

    /// Column `j` on the interior cells.
    pub fn column(&self, j: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.inner(i, j);
        }
    }

    /// Ghost values of column `j` in the form the interpolation kernels expect.
    pub fn ghost(&self, j: usize) -> crate::weno::Ghost {
        match &self.ghosts {
            GhostPolicy::Periodic => crate::weno::Ghost::Periodic,
            GhostPolicy::Inflow { left, right } => crate::weno::Ghost::Fixed {
                left: left[j],
                right: right[j],
            },
            GhostPolicy::Extrapolate => crate::weno::Ghost::Extrapolate,
        }
    }
}

impl EntryOracle for CompiledView {
    fn shape(&self) -> (usize, usize) {
        (self.nx, self.nv)
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.inner(i, j)
    }
}
