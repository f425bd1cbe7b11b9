//! Cross approximation against entry oracles and SVD recompression.

mod aca;
mod oracle;
mod svd;

pub use aca::{
    aca_decompose, aca_decompose_with, AcaStats, CurFactors, DEFAULT_CANDIDATES, ZERO_PIVOT,
};
pub use oracle::{DenseMatrix, EntryOracle, FnOracle};
pub use svd::{
    add_lowrank, evaluate_entries, svd_truncate, svd_truncate_timed, SvdMatrix, TruncationStats,
};

use serde::Serialize;

use crate::error::Result;

/// Ranks and timings of one ACA + SVD compression.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RankDiagnostics {
    pub cur_rank: usize,
    pub svd_rank: usize,
    #[serde(skip)]
    pub pivots: Vec<f64>,
    pub rank_capped: bool,
    pub stalled: bool,
    pub aca_seconds: f64,
    pub svd_seconds: f64,
}

/// Settings shared by every ACA + SVD pass in a time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Compression {
    pub eps_c: f64,
    pub eps_s: f64,
    pub max_rank: usize,
    pub candidates: usize,
}

impl Compression {
    /// ACA to tolerance `eps_c`, then truncated SVD at `eps_s`.
    pub fn compress(
        &self,
        oracle: &impl EntryOracle,
        seed: u64,
    ) -> Result<(SvdMatrix, RankDiagnostics)> {
        let cur = aca_decompose_with(oracle, self.eps_c, self.max_rank, seed, self.candidates)?;
        let (m, stats) = svd_truncate_timed(&cur, self.eps_s)?;
        let diag = RankDiagnostics {
            cur_rank: cur.rank(),
            svd_rank: m.rank(),
            pivots: cur.pivots.clone(),
            rank_capped: cur.stats.rank_capped,
            stalled: cur.stats.stalled,
            aca_seconds: cur.stats.seconds,
            svd_seconds: stats.seconds,
        };
        Ok((m, diag))
    }
}
