//! Run configuration: a flat TOML file whose keys mirror the CLI flags.
//!
//! ```toml
//! problem = "mixed_regime"
//! nx = 256
//! nv = 256
//! cfl = 1.5
//! a0 = 40
//! eps_c = 1e-8
//! eps_s = 1e-7
//! tableau = "sa_dirk3"
//! seed = 7
//! ```
//!
//! Every key is optional; unset keys fall back to the problem defaults. When both a
//! file and command-line flags are given, the flags win.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub problem: Option<String>,
    pub nx: Option<usize>,
    pub nv: Option<usize>,
    pub cfl: Option<f64>,
    pub eps_c: Option<f64>,
    pub eps_s: Option<f64>,
    /// Constant Knudsen number (consistent_ic and riemann).
    pub epsilon: Option<f64>,
    /// Steepness of the Knudsen profile (mixed_regime).
    pub a0: Option<f64>,
    /// Floor of the Knudsen profile (mixed_regime).
    pub eps0: Option<f64>,
    pub t_final: Option<f64>,
    pub seed: Option<u64>,
    pub max_rank: Option<usize>,
    pub aca_candidates: Option<usize>,
    pub newton_tol: Option<f64>,
    pub krylov_tol: Option<f64>,
    pub max_newton: Option<usize>,
    pub max_krylov: Option<usize>,
    pub gmres_restart: Option<usize>,
    pub jfnk_perturbation: Option<f64>,
    /// `sa_dirk3` or `backward_euler`.
    pub tableau: Option<String>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Field-wise `self.or(other)`: values set in `self` take precedence.
    pub fn or(self, other: Overrides) -> Overrides {
        Overrides {
            problem: self.problem.or(other.problem),
            nx: self.nx.or(other.nx),
            nv: self.nv.or(other.nv),
            cfl: self.cfl.or(other.cfl),
            eps_c: self.eps_c.or(other.eps_c),
            eps_s: self.eps_s.or(other.eps_s),
            epsilon: self.epsilon.or(other.epsilon),
            a0: self.a0.or(other.a0),
            eps0: self.eps0.or(other.eps0),
            t_final: self.t_final.or(other.t_final),
            seed: self.seed.or(other.seed),
            max_rank: self.max_rank.or(other.max_rank),
            aca_candidates: self.aca_candidates.or(other.aca_candidates),
            newton_tol: self.newton_tol.or(other.newton_tol),
            krylov_tol: self.krylov_tol.or(other.krylov_tol),
            max_newton: self.max_newton.or(other.max_newton),
            max_krylov: self.max_krylov.or(other.max_krylov),
            gmres_restart: self.gmres_restart.or(other.gmres_restart),
            jfnk_perturbation: self.jfnk_perturbation.or(other.jfnk_perturbation),
            tableau: self.tableau.or(other.tableau),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let o = Overrides::from_toml(
            "problem = \"mixed_regime\"\nnx = 256\nnv = 256\ncfl = 1.5\na0 = 40\neps_c = 1e-8\neps_s = 1e-7\ntableau = \"sa_dirk3\"\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(o.problem.as_deref(), Some("mixed_regime"));
        assert_eq!(o.nx, Some(256));
        assert_eq!(o.a0, Some(40.0));
        assert_eq!(o.seed, Some(7));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(matches!(
            Overrides::from_toml("nxx = 3"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn cli_values_win() {
        let file = Overrides {
            nx: Some(64),
            cfl: Some(2.0),
            ..Default::default()
        };
        let cli = Overrides {
            cfl: Some(1.0),
            ..Default::default()
        };
        let merged = cli.or(file);
        assert_eq!(merged.nx, Some(64));
        assert_eq!(merged.cfl, Some(1.0));
    }
}
