use std::path::PathBuf;

use crate::macro_solver::JfnkReport;

/// Errors produced by the solver and its building blocks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate pivot {value:e} at ACA step {step}")]
    DegeneratePivot { step: usize, value: f64 },

    #[error("index ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-physical state in cell {cell}: rho = {rho:e}, T = {temperature:e}")]
    Positivity {
        cell: usize,
        rho: f64,
        temperature: f64,
    },

    #[error(
        "Newton iteration did not converge after {} iterations (residual {:e})",
        .report.newton_iters,
        .report.final_residual_norm
    )]
    NonConvergence { report: JfnkReport },

    #[error("step {step}, stage {stage}: {source}")]
    Stage {
        step: usize,
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown problem tag '{0}'")]
    UnknownProblem(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("dense SVD did not converge on a {nrows}x{ncols} matrix")]
    SvdFailure { nrows: usize, ncols: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach step/stage context unless the error already carries it.
    pub(crate) fn in_stage(self, step: usize, stage: usize) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                step,
                stage,
                source: Box::new(e),
            },
        }
    }
}
