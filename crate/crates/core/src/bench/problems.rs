use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::config::Overrides;
use crate::error::{Error, Result};
use crate::grid::{make_grid, Boundary, DirkTableau, Knudsen, PhaseGrid, SolverConfig};
use crate::integrator::{Solver, SolverState};
use crate::kinetic::Primitive;
use crate::lowrank::{FnOracle, RankDiagnostics, SvdMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemTag {
    ConsistentIc,
    Riemann,
    MixedRegime,
}

impl ProblemTag {
    pub const ALL: [ProblemTag; 3] = [
        ProblemTag::ConsistentIc,
        ProblemTag::Riemann,
        ProblemTag::MixedRegime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemTag::ConsistentIc => "consistent_ic",
            ProblemTag::Riemann => "riemann",
            ProblemTag::MixedRegime => "mixed_regime",
        }
    }
}

impl fmt::Display for ProblemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// Riemann data: left and right states, split at `x = 0.5`.
pub const RIEMANN_LEFT: Primitive = Primitive {
    rho: 2.25,
    u: 0.0,
    temperature: 1.125,
};
pub const RIEMANN_RIGHT: Primitive = Primitive {
    rho: 3.0 / 7.0,
    u: 0.0,
    temperature: 1.0 / 6.0,
};

/// Full setup of one benchmark.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkSpec {
    pub tag: ProblemTag,
    pub x_bounds: (f64, f64),
    pub v_bounds: (f64, f64),
    pub nx: usize,
    pub nv: usize,
    pub t_final: f64,
    pub config: SolverConfig,
}

impl BenchmarkSpec {
    /// Default setup for `tag`, with `overrides` applied on top.
    pub fn new(tag: ProblemTag, o: &Overrides) -> Result<Self> {
        let mut config = SolverConfig::default();
        let (x_bounds, n, t_final) = match tag {
            ProblemTag::ConsistentIc => {
                config.cfl = 4.0;
                config.eps_c = 1e-9;
                config.eps_s = 1e-8;
                config.knudsen = Knudsen::constant(o.epsilon.unwrap_or(1e-2));
                ((-1.0, 1.0), 128, 0.04)
            }
            ProblemTag::Riemann => {
                config.cfl = 4.0;
                config.eps_c = 1e-4;
                config.eps_s = 1e-3;
                config.knudsen = Knudsen::constant(o.epsilon.unwrap_or(1e-2));
                config.bc = Boundary::FixedInflow {
                    left: RIEMANN_LEFT,
                    right: RIEMANN_RIGHT,
                };
                ((0.0, 1.0), 256, 0.16)
            }
            ProblemTag::MixedRegime => {
                config.cfl = 1.0;
                config.eps_c = 1e-8;
                config.eps_s = 1e-7;
                config.knudsen = match o.epsilon {
                    Some(value) => Knudsen::constant(value),
                    None => Knudsen::Tanh {
                        eps0: o.eps0.unwrap_or(1e-6),
                        a0: o.a0.unwrap_or(11.0),
                    },
                };
                ((-0.5, 0.5), 256, 0.45)
            }
        };
        if let Some(x) = o.cfl {
            config.cfl = x;
        }
        if let Some(x) = o.eps_c {
            config.eps_c = x;
        }
        if let Some(x) = o.eps_s {
            config.eps_s = x;
        }
        if let Some(x) = o.seed {
            config.seed = x;
        }
        if o.max_rank.is_some() {
            config.max_rank = o.max_rank;
        }
        if let Some(x) = o.aca_candidates {
            config.aca_candidates = x;
        }
        if let Some(x) = o.newton_tol {
            config.newton_tol = x;
        }
        if let Some(x) = o.krylov_tol {
            config.krylov_tol = x;
        }
        if let Some(x) = o.max_newton {
            config.max_newton = x;
        }
        if let Some(x) = o.max_krylov {
            config.max_krylov = x;
        }
        if let Some(x) = o.gmres_restart {
            config.gmres_restart = x;
        }
        if let Some(x) = o.jfnk_perturbation {
            config.jfnk_perturbation = x;
        }
        if let Some(name) = &o.tableau {
            config.tableau = DirkTableau::by_name(name)?;
        }
        Ok(BenchmarkSpec {
            tag,
            x_bounds,
            v_bounds: (-10.0, 10.0),
            nx: o.nx.unwrap_or(n),
            nv: o.nv.unwrap_or(n),
            t_final: o.t_final.unwrap_or(t_final),
            config,
        })
    }

    pub fn grid(&self) -> Result<PhaseGrid> {
        make_grid(
            self.x_bounds.0,
            self.x_bounds.1,
            self.v_bounds.0,
            self.v_bounds.1,
            self.nx,
            self.nv,
        )
    }

    /// Analytic initial distribution at `(x, v)`.
    pub fn initial_value(&self, x: f64, v: f64) -> f64 {
        match self.tag {
            ProblemTag::ConsistentIc => {
                let u0 = 0.1
                    * ((-(10.0 * x - 1.0).powi(2)).exp() - 2.0 * (-(10.0 * x + 3.0).powi(2)).exp());
                Primitive::new(1.0, u0, 1.0).maxwellian(v)
            }
            ProblemTag::Riemann => {
                if x <= 0.5 {
                    RIEMANN_LEFT.maxwellian(v)
                } else {
                    RIEMANN_RIGHT.maxwellian(v)
                }
            }
            ProblemTag::MixedRegime => {
                let s = (2.0 * PI * x).sin();
                let rho = 1.0 + 0.875 * s;
                let t = 0.5 + 0.4 * s;
                let u = 0.75;
                let norm = rho / (2.0 * (2.0 * PI * t).sqrt());
                norm * ((-(v - u).powi(2) / (2.0 * t)).exp() + (-(v + u).powi(2) / (2.0 * t)).exp())
            }
        }
    }
}

/// A ready-to-run benchmark.
pub struct Problem {
    pub spec: BenchmarkSpec,
    pub grid: PhaseGrid,
    pub solver: Solver,
    pub initial: SvdMatrix,
    pub initial_ranks: RankDiagnostics,
}

impl Problem {
    pub fn initial_state(&self) -> Result<SolverState> {
        SolverState::new(self.initial.clone(), &self.grid)
    }
}

/// Builds the grid, solver and compressed initial condition of a benchmark.
pub fn build_problem(tag: &str, overrides: &Overrides) -> Result<Problem> {
    let tag: ProblemTag = tag.parse()?;
    let spec = BenchmarkSpec::new(tag, overrides)?;
    let grid = spec.grid()?;
    let solver = Solver::new(&grid, &spec.config)?;
    let oracle = FnOracle::new(grid.nx, grid.nv, |i, j| {
        spec.initial_value(grid.x_centers[i], grid.v_centers[j])
    });
    let (initial, initial_ranks) = solver.compress(&oracle, spec.config.seed)?;
    Ok(Problem {
        spec,
        grid,
        solver,
        initial,
        initial_ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_roundtrip() {
        for t in ProblemTag::ALL {
            assert_eq!(t.name().parse::<ProblemTag>().unwrap(), t);
        }
        assert!(matches!(
            "sod".parse::<ProblemTag>(),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn consistent_defaults() {
        let s = BenchmarkSpec::new(ProblemTag::ConsistentIc, &Overrides::default()).unwrap();
        assert_eq!((s.nx, s.nv), (128, 128));
        assert_eq!(s.x_bounds, (-1.0, 1.0));
        assert_eq!(s.v_bounds, (-10.0, 10.0));
        assert_eq!((s.config.eps_c, s.config.eps_s), (1e-9, 1e-8));
        assert_eq!(s.t_final, 0.04);
        assert_eq!(s.config.bc, Boundary::Periodic);
    }

    #[test]
    fn riemann_defaults() {
        let s = BenchmarkSpec::new(ProblemTag::Riemann, &Overrides::default()).unwrap();
        assert_eq!((s.nx, s.nv), (256, 256));
        assert_eq!(s.config.cfl, 4.0);
        assert_eq!((s.config.eps_c, s.config.eps_s), (1e-4, 1e-3));
        assert_eq!(s.t_final, 0.16);
        assert_eq!(s.initial_value(0.25, 0.0), RIEMANN_LEFT.maxwellian(0.0));
        assert_eq!(s.initial_value(0.75, 0.0), RIEMANN_RIGHT.maxwellian(0.0));
    }

    #[test]
    fn mixed_regime_profile() {
        let o = Overrides {
            a0: Some(40.0),
            ..Default::default()
        };
        let s = BenchmarkSpec::new(ProblemTag::MixedRegime, &o).unwrap();
        assert_eq!(
            s.config.knudsen,
            Knudsen::Tanh {
                eps0: 1e-6,
                a0: 40.0
            }
        );
        assert_eq!(s.t_final, 0.45);
        let centre = Knudsen::tanh_at(1e-6, 40.0, 0.0);
        assert!((centre - 0.761_595_1).abs() < 1e-6);
        let edge = Knudsen::tanh_at(1e-6, 40.0, 0.5);
        assert!(edge < 2e-6);
    }
}
