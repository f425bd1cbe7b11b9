use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::EntryOracle;
use crate::error::{Error, Result};

/// Pivots smaller than this are treated as exact zeros.
pub const ZERO_PIVOT: f64 = 1e-300;

/// A pivot this small relative to the largest accepted pivot is rounding noise.
const ROUNDOFF_PIVOT: f64 = 1e3 * f64::EPSILON;

/// Default number of random candidate entries examined per ACA step.
pub const DEFAULT_CANDIDATES: usize = 12;

/// Cross approximation `A_k = C diag(1/p) R` built from residual columns and rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CurFactors {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// `col_factors[l]` is the residual column `R_{l-1}(:, cols[l])` (length `nrows`).
    pub col_factors: Vec<Vec<f64>>,
    /// `row_factors[l]` is the residual row `R_{l-1}(rows[l], :)` (length `ncols`).
    pub row_factors: Vec<Vec<f64>>,
    pub pivots: Vec<f64>,
    /// Why the iteration stopped and how expensive it was.
    pub stats: AcaStats,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AcaStats {
    /// Frobenius norm of the final rank-one term.
    pub last_term_norm: f64,
    /// Frobenius norm of the approximation, accumulated from the factors.
    pub approx_norm: f64,
    /// The rank cap was reached before the tolerance test fired.
    pub rank_capped: bool,
    /// Candidate sampling only found zero residuals twice in a row.
    pub stalled: bool,
    pub seconds: f64,
}

impl CurFactors {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.col_factors
            .iter()
            .zip(&self.row_factors)
            .zip(&self.pivots)
            .map(|((c, r), p)| c[i] * r[j] / p)
            .sum()
    }

    fn empty(nrows: usize, ncols: usize) -> Self {
        CurFactors {
            nrows,
            ncols,
            rows: Vec::new(),
            cols: Vec::new(),
            col_factors: Vec::new(),
            row_factors: Vec::new(),
            pivots: Vec::new(),
            stats: AcaStats::default(),
        }
    }

    fn residual_entry(&self, oracle: &impl EntryOracle, i: usize, j: usize) -> f64 {
        oracle.entry(i, j) - self.entry(i, j)
    }

    fn residual_col(&self, oracle: &impl EntryOracle, j: usize, out: &mut [f64]) {
        oracle.col(j, out);
        for ((c, r), p) in self
            .col_factors
            .iter()
            .zip(&self.row_factors)
            .zip(&self.pivots)
        {
            let s = r[j] / p;
            for (o, ci) in out.iter_mut().zip(c) {
                *o -= ci * s;
            }
        }
    }

    fn residual_row(&self, oracle: &impl EntryOracle, i: usize, out: &mut [f64]) {
        oracle.row(i, out);
        for ((c, r), p) in self
            .col_factors
            .iter()
            .zip(&self.row_factors)
            .zip(&self.pivots)
        {
            let s = c[i] / p;
            for (o, rj) in out.iter_mut().zip(r) {
                *o -= rj * s;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn argmax_unselected(values: &[f64], selected: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, (v, s)) in values.iter().zip(selected).enumerate() {
        if *s {
            continue;
        }
        let a = v.abs();
        match best {
            Some((_, b)) if a <= b => {}
            _ => best = Some((idx, a)),
        }
    }
    best.map(|(idx, _)| idx)
}

fn sample_unselected(rng: &mut ChaCha8Rng, pool: &[usize]) -> usize {
    pool[rng.random_range(0..pool.len())]
}

/// Greedy adaptive cross approximation with random candidate sampling.
///
/// Stops once the latest rank-one term satisfies `||c r^T / p||_F <= eps_c ||A_k||_F`,
/// when `max_rank` is reached, or when sampling keeps landing on zero residuals.
pub fn aca_decompose(
    oracle: &impl EntryOracle,
    eps_c: f64,
    max_rank: usize,
    seed: u64,
) -> Result<CurFactors> {
    aca_decompose_with(oracle, eps_c, max_rank, seed, DEFAULT_CANDIDATES)
}

pub fn aca_decompose_with(
    oracle: &impl EntryOracle,
    eps_c: f64,
    max_rank: usize,
    seed: u64,
    candidates: usize,
) -> Result<CurFactors> {
    let start = Instant::now();
    let (nrows, ncols) = oracle.shape();
    if nrows == 0 || ncols == 0 {
        return Err(Error::InvalidConfig(format!(
            "ACA needs a nonempty matrix, got {nrows}x{ncols}"
        )));
    }
    if !(eps_c > 0.0 && eps_c < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "eps_c must lie in (0, 1), got {eps_c}"
        )));
    }
    if max_rank == 0 || candidates == 0 {
        return Err(Error::InvalidConfig(
            "max_rank and candidates must be positive".into(),
        ));
    }
    let max_rank = max_rank.min(nrows).min(ncols);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = CurFactors::empty(nrows, ncols);
    let mut row_taken = vec![false; nrows];
    let mut col_taken = vec![false; ncols];
    let mut free_rows: Vec<usize> = (0..nrows).collect();
    let mut free_cols: Vec<usize> = (0..ncols).collect();
    let mut col_buf = vec![0.0; nrows];
    let mut row_buf = vec![0.0; ncols];
    let mut norm_sq = 0.0;
    let mut converged = false;

    while cur.rank() < max_rank {
        let step = cur.rank();

        // Phase I: best of a few random residual entries, resampled once if all vanish.
        let mut best = (0usize, 0usize, 0.0f64);
        for _attempt in 0..2 {
            for _ in 0..candidates {
                let i = sample_unselected(&mut rng, &free_rows);
                let j = sample_unselected(&mut rng, &free_cols);
                let r = cur.residual_entry(oracle, i, j);
                if !r.is_finite() {
                    return Err(Error::DegeneratePivot { step, value: r });
                }
                if r.abs() > best.2.abs() {
                    best = (i, j, r);
                }
            }
            if best.2.abs() > ZERO_PIVOT {
                break;
            }
        }
        if best.2.abs() <= ZERO_PIVOT {
            cur.stats.stalled = true;
            break;
        }

        // Greedy refinement: one column sweep, then one row sweep.
        let j_star = best.1;
        cur.residual_col(oracle, j_star, &mut col_buf);
        let i_k = argmax_unselected(&col_buf, &row_taken).expect("an unselected row exists");
        cur.residual_row(oracle, i_k, &mut row_buf);
        let j_k = argmax_unselected(&row_buf, &col_taken).expect("an unselected column exists");
        let pivot = row_buf[j_k];
        if !pivot.is_finite() {
            return Err(Error::DegeneratePivot { step, value: pivot });
        }
        // A sampled residual at rounding level can lead the sweeps to an exactly zero row.
        let largest = cur.pivots.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        if pivot.abs() <= ZERO_PIVOT.max(ROUNDOFF_PIVOT * largest) {
            if cur.rank() == 0 {
                cur.stats.stalled = true;
            } else {
                converged = true;
            }
            break;
        }
        if j_k != j_star {
            cur.residual_col(oracle, j_k, &mut col_buf);
        }
        // The column sweep and the row sweep see the pivot from both sides; use the row value.
        col_buf[i_k] = pivot;

        // Phase II: rank-one update and incremental norm of the approximation.
        let c = col_buf.clone();
        let r = row_buf.clone();
        let cc = dot(&c, &c);
        let rr = dot(&r, &r);
        let mut cross = 0.0;
        for ((cl, rl), pl) in cur
            .col_factors
            .iter()
            .zip(&cur.row_factors)
            .zip(&cur.pivots)
        {
            cross += dot(cl, &c) * dot(rl, &r) / (pl * pivot);
        }
        let term_sq = cc * rr / (pivot * pivot);
        norm_sq = (norm_sq + 2.0 * cross + term_sq).max(0.0);

        row_taken[i_k] = true;
        col_taken[j_k] = true;
        free_rows.retain(|&x| x != i_k);
        free_cols.retain(|&x| x != j_k);
        cur.rows.push(i_k);
        cur.cols.push(j_k);
        cur.col_factors.push(c);
        cur.row_factors.push(r);
        cur.pivots.push(pivot);
        cur.stats.last_term_norm = term_sq.sqrt();
        cur.stats.approx_norm = norm_sq.sqrt();

        if term_sq.sqrt() <= eps_c * norm_sq.sqrt() {
            converged = true;
            break;
        }
    }
    cur.stats.rank_capped = !converged && !cur.stats.stalled && cur.rank() == max_rank;
    cur.stats.seconds = start.elapsed().as_secs_f64();
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowrank::oracle::{DenseMatrix, FnOracle};

    fn random_lowrank(n: usize, m: usize, r: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n * r).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..m * r).map(|_| rng.random_range(-1.0..1.0)).collect();
        DenseMatrix::from_fn(n, m, |i, j| {
            (0..r).map(|l| a[i * r + l] * b[j * r + l]).sum()
        })
    }

    #[test]
    fn rank_one_captured_in_one_step() {
        let a = random_lowrank(40, 30, 1, 1);
        let cur = aca_decompose(&a, 1e-10, 30, 7).unwrap();
        assert_eq!(cur.rank(), 1);
        let err = DenseMatrix::from_fn(40, 30, |i, j| cur.entry(i, j)).sub(&a);
        assert!(err.frobenius_norm() <= 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn zero_matrix_gives_rank_zero() {
        let z = FnOracle::new(10, 12, |_, _| 0.0);
        let cur = aca_decompose(&z, 1e-8, 10, 0).unwrap();
        assert_eq!(cur.rank(), 0);
        assert!(cur.stats.stalled);
    }

    #[test]
    fn nan_entry_is_degenerate() {
        let bad = FnOracle::new(10, 10, |_, _| f64::NAN);
        assert!(matches!(
            aca_decompose(&bad, 1e-8, 10, 0),
            Err(Error::DegeneratePivot { .. })
        ));
    }

    #[test]
    fn interpolates_selected_rows_and_columns() {
        let a = FnOracle::new(50, 40, |i, j| 1.0 / (1.0 + i as f64 + 2.0 * j as f64));
        let cur = aca_decompose(&a, 1e-6, 40, 3).unwrap();
        assert!(cur.rank() >= 2);
        let scale = 1.0;
        for &i in &cur.rows {
            for j in 0..40 {
                assert!((cur.entry(i, j) - a.entry(i, j)).abs() <= 1e-11 * scale);
            }
        }
        for &j in &cur.cols {
            for i in 0..50 {
                assert!((cur.entry(i, j) - a.entry(i, j)).abs() <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn rank_cap_is_flagged() {
        let a = random_lowrank(30, 30, 10, 5);
        let cur = aca_decompose(&a, 1e-12, 4, 1).unwrap();
        assert_eq!(cur.rank(), 4);
        assert!(cur.stats.rank_capped);
    }

    #[test]
    fn indices_are_unique() {
        let a = random_lowrank(25, 20, 6, 9);
        let cur = aca_decompose(&a, 1e-14, 20, 2).unwrap();
        let mut rows = cur.rows.clone();
        rows.sort();
        rows.dedup();
        assert_eq!(rows.len(), cur.rank());
        let mut cols = cur.cols.clone();
        cols.sort();
        cols.dedup();
        assert_eq!(cols.len(), cur.rank());
    }
}
