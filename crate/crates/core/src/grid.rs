//! Phase-space mesh, time-step selection and the shared solver configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetic::Primitive;

/// Minimum cell count per direction; the six-point WENO stencil needs room.
pub const MIN_CELLS: usize = 8;

/// Uniform cell-centred tensor-product mesh on `[x_min, x_max] x [v_min, v_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nx: usize,
    pub nv: usize,
    pub dx: f64,
    pub dv: f64,
    pub x_centers: Vec<f64>,
    pub v_centers: Vec<f64>,
}

pub fn make_grid(
    x_min: f64,
    x_max: f64,
    v_min: f64,
    v_max: f64,
    nx: usize,
    nv: usize,
) -> Result<PhaseGrid> {
    if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::InvalidBounds(format!(
            "x bounds [{x_min}, {x_max}] are empty or not finite"
        )));
    }
    if !(v_max > v_min) || !v_min.is_finite() || !v_max.is_finite() {
        return Err(Error::InvalidBounds(format!(
            "v bounds [{v_min}, {v_max}] are empty or not finite"
        )));
    }
    if nx < MIN_CELLS || nv < MIN_CELLS {
        return Err(Error::InvalidBounds(format!(
            "need at least {MIN_CELLS} cells per direction, got {nx}x{nv}"
        )));
    }
    let dx = (x_max - x_min) / nx as f64;
    let dv = (v_max - v_min) / nv as f64;
    let x_centers = (0..nx).map(|i| x_min + (i as f64 + 0.5) * dx).collect();
    let v_centers = (0..nv).map(|j| v_min + (j as f64 + 0.5) * dv).collect();
    Ok(PhaseGrid {
        x_min,
        x_max,
        v_min,
        v_max,
        nx,
        nv,
        dx,
        dv,
        x_centers,
        v_centers,
    })
}

impl PhaseGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.nv)
    }

    pub fn max_speed(&self) -> f64 {
        self.v_min.abs().max(self.v_max.abs())
    }
}

/// `dt = cfl * dx / max(|v_min|, |v_max|)`.
pub fn compute_dt(grid: &PhaseGrid, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0) || !cfl.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "cfl must be positive, got {cfl}"
        )));
    }
    Ok(cfl * grid.dx / grid.max_speed())
}

/// Knudsen number, either uniform or varying in x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Knudsen {
    Constant {
        value: f64,
    },
    /// `eps0 + (tanh(1 - a0 x) + tanh(1 + a0 x)) / 2`
    Tanh {
        eps0: f64,
        a0: f64,
    },
    Field {
        values: Vec<f64>,
    },
}

impl Knudsen {
    pub fn constant(value: f64) -> Self {
        Knudsen::Constant { value }
    }

    pub fn tanh_at(eps0: f64, a0: f64, x: f64) -> f64 {
        eps0 + 0.5 * ((1.0 - a0 * x).tanh() + (1.0 + a0 * x).tanh())
    }

    /// Per-cell values on `grid`.
    pub fn field(&self, grid: &PhaseGrid) -> Result<Vec<f64>> {
        let values: Vec<f64> = match self {
            Knudsen::Constant { value } => vec![*value; grid.nx],
            Knudsen::Tanh { eps0, a0 } => grid
                .x_centers
                .iter()
                .map(|&x| Self::tanh_at(*eps0, *a0, x))
                .collect(),
            Knudsen::Field { values } => {
                if values.len() != grid.nx {
                    return Err(Error::InvalidConfig(format!(
                        "Knudsen field has {} values for {} cells",
                        values.len(),
                        grid.nx
                    )));
                }
                values.clone()
            }
        };
        if let Some(bad) = values.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "Knudsen number must be positive, found {bad}"
            )));
        }
        Ok(values)
    }
}

/// Spatial boundary treatment, shared by the kinetic and macroscopic solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Ghost states frozen at the given left/right Maxwellian states.
    FixedInflow {
        left: Primitive,
        right: Primitive,
    },
}

/// Butcher tableau of a diagonally implicit Runge-Kutta method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirkTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl DirkTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn backward_euler() -> Self {
        DirkTableau {
            a: vec![vec![1.0]],
            b: vec![1.0],
            c: vec![1.0],
        }
    }

    /// Four-stage, third-order, stiffly accurate DIRK with constant diagonal 1/2
    /// (the implicit part of the ARS(4,4,3) IMEX pair with its explicit first stage removed).
    pub fn sa_dirk3() -> Self {
        DirkTableau {
            a: vec![
                vec![0.5, 0.0, 0.0, 0.0],
                vec![1.0 / 6.0, 0.5, 0.0, 0.0],
                vec![-0.5, 0.5, 0.5, 0.0],
                vec![1.5, -1.5, 0.5, 0.5],
            ],
            b: vec![1.5, -1.5, 0.5, 0.5],
            c: vec![0.5, 2.0 / 3.0, 0.5, 1.0],
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "backward_euler" | "be" => Ok(Self::backward_euler()),
            "sa_dirk3" | "dirk3" => Ok(Self::sa_dirk3()),
            other => Err(Error::InvalidConfig(format!("unknown tableau '{other}'"))),
        }
    }

    /// Checks lower-triangular structure, positive diagonal, stiff accuracy and row-sum consistency.
    pub fn validate(&self) -> Result<()> {
        let s = self.stages();
        let bad = |msg: String| Err(Error::InvalidConfig(format!("DIRK tableau: {msg}")));
        if s == 0 || self.c.len() != s || self.a.len() != s {
            return bad("inconsistent stage counts".into());
        }
        for (k, row) in self.a.iter().enumerate() {
            if row.len() != s {
                return bad(format!("row {k} has {} entries", row.len()));
            }
            if row[k + 1..].iter().any(|&x| x != 0.0) {
                return bad(format!("row {k} is not lower triangular"));
            }
            if !(row[k] > 0.0) {
                return bad(format!("diagonal entry a[{k}][{k}] must be positive"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - self.c[k]).abs() > 1e-12 {
                return bad(format!("row {k} sums to {sum}, c = {}", self.c[k]));
            }
        }
        let last = &self.a[s - 1];
        if last.iter().zip(&self.b).any(|(a, b)| (a - b).abs() > 1e-14) {
            return bad("last row differs from b (not stiffly accurate)".into());
        }
        if (self.c[s - 1] - 1.0).abs() > 1e-14 {
            return bad("c[s-1] must equal 1".into());
        }
        Ok(())
    }
}

impl Default for DirkTableau {
    fn default() -> Self {
        Self::sa_dirk3()
    }
}

/// Every knob of the solver. Tolerances `eps_c`/`eps_s` are relative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub knudsen: Knudsen,
    pub cfl: f64,
    pub eps_c: f64,
    pub eps_s: f64,
    /// `None` means `min(nx, nv)`.
    pub max_rank: Option<usize>,
    pub aca_candidates: usize,
    pub newton_tol: f64,
    pub krylov_tol: f64,
    pub max_newton: usize,
    pub max_krylov: usize,
    pub gmres_restart: usize,
    pub jfnk_perturbation: f64,
    pub bc: Boundary,
    pub tableau: DirkTableau,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            knudsen: Knudsen::constant(1e-2),
            cfl: 4.0,
            eps_c: 1e-9,
            eps_s: 1e-8,
            max_rank: None,
            aca_candidates: 12,
            newton_tol: 1e-14,
            krylov_tol: 1e-6,
            max_newton: 30,
            max_krylov: 300,
            gmres_restart: 30,
            jfnk_perturbation: f64::EPSILON.sqrt(),
            bc: Boundary::Periodic,
            tableau: DirkTableau::sa_dirk3(),
            seed: 42,
        }
    }
}

impl SolverConfig {
    pub fn max_rank_for(&self, grid: &PhaseGrid) -> usize {
        self.max_rank
            .unwrap_or(usize::MAX)
            .min(grid.nx.min(grid.nv))
    }

    pub fn validate(&self, grid: &PhaseGrid) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        self.knudsen.field(grid)?;
        if !(self.cfl > 0.0) {
            return bad(format!("cfl must be positive, got {}", self.cfl));
        }
        for (name, tol) in [("eps_c", self.eps_c), ("eps_s", self.eps_s)] {
            if !(tol > 0.0 && tol < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {tol}"));
            }
        }
        if let Some(r) = self.max_rank {
            if r == 0 || r > grid.nx.min(grid.nv) {
                return bad(format!(
                    "max_rank {r} must lie in [1, {}]",
                    grid.nx.min(grid.nv)
                ));
            }
        }
        if self.aca_candidates == 0 {
            return bad("aca_candidates must be positive".into());
        }
        if !(self.newton_tol > 0.0) || !(self.krylov_tol > 0.0 && self.krylov_tol < 1.0) {
            return bad("Newton/Krylov tolerances must be positive (Krylov < 1)".into());
        }
        if self.max_newton == 0 || self.max_krylov == 0 || self.gmres_restart == 0 {
            return bad("iteration caps must be positive".into());
        }
        if !(self.jfnk_perturbation > 0.0) {
            return bad("jfnk_perturbation must be positive".into());
        }
        if let Boundary::FixedInflow { left, right } = &self.bc {
            left.validate(0)?;
            right.validate(grid.nx - 1)?;
        }
        self.tableau.validate()
    }
}
