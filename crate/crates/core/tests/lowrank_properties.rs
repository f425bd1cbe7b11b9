use kinetic_ar::lowrank::{aca_decompose, svd_truncate, DenseMatrix, SvdMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random `m x n` matrix of exact rank `r` with singular values spread over two decades.
fn random_rank(m: usize, n: usize, r: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<f64>> = (0..r)
        .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let b: Vec<Vec<f64>> = (0..r)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let scale: Vec<f64> = (0..r)
        .map(|l| 10f64.powf(-2.0 * l as f64 / r.max(2) as f64))
        .collect();
    DenseMatrix::from_fn(m, n, |i, j| {
        (0..r).map(|l| scale[l] * a[l][i] * b[l][j]).sum()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cross_interpolates_selected_rows_and_columns(
        m in 8usize..48, n in 8usize..48, r in 1usize..7, seed in 0u64..1000, aca_seed in 0u64..1000,
    ) {
        let a = random_rank(m, n, r, seed);
        let cur = aca_decompose(&a, 1e-3, usize::MAX, aca_seed).unwrap();
        let scale = a.max_abs();
        for &i in &cur.rows {
            for j in 0..n {
                prop_assert!((cur.entry(i, j) - a.get(i, j)).abs() <= 1e-11 * scale);
            }
        }
        for &j in &cur.cols {
            for i in 0..m {
                prop_assert!((cur.entry(i, j) - a.get(i, j)).abs() <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn recovers_synthetic_rank(
        m in 8usize..64, n in 8usize..64, r in 1usize..7, seed in 0u64..1000, aca_seed in 0u64..1000,
    ) {
        let tol = 1e-10;
        let a = random_rank(m, n, r, seed);
        let cur = aca_decompose(&a, tol, usize::MAX, aca_seed).unwrap();
        let svd = svd_truncate(&cur, tol).unwrap();
        prop_assert!(cur.rank() <= r + 2, "cross rank {} for rank {}", cur.rank(), r);
        prop_assert!(svd.rank() <= r + 2);
        let err = svd.to_dense().sub(&a).frobenius_norm();
        prop_assert!(err <= 10.0 * tol * a.frobenius_norm(), "error {err:e}");
    }

    #[test]
    fn truncation_meets_eckart_young(
        m in 6usize..40, n in 6usize..40, seed in 0u64..1000, eps_exp in 1i32..6,
    ) {
        // full-rank input, so truncation actually discards something
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(m, n, |i, j| {
            let decay = (-0.3 * (i + j) as f64).exp();
            decay + 1e-3 * rng.random_range(-1.0..1.0)
        });
        let eps = 10f64.powi(-eps_exp);
        let cur = aca_decompose(&a, 1e-15, usize::MAX, seed).unwrap();
        let truncated = svd_truncate(&cur, eps).unwrap();
        let full = SvdMatrix::from_dense(&a, 1e-300).unwrap();
        let k = truncated.rank();
        let tail: f64 = full.sigma.iter().skip(k).map(|s| s * s).sum::<f64>().sqrt();
        let err = truncated.to_dense().sub(&a).frobenius_norm();
        prop_assert!(err <= tail * (1.0 + 1e-6) + 1e-12 * a.frobenius_norm(), "err {err:e} tail {tail:e}");
        for s in &full.sigma[k..] {
            prop_assert!(*s < eps * full.sigma[0] * (1.0 + 1e-9));
        }
    }

    #[test]
    fn fixed_seed_is_deterministic(m in 8usize..40, n in 8usize..40, r in 1usize..5, seed in 0u64..1000) {
        let a = random_rank(m, n, r, seed);
        let x = aca_decompose(&a, 1e-8, usize::MAX, seed).unwrap();
        let y = aca_decompose(&a, 1e-8, usize::MAX, seed).unwrap();
        prop_assert_eq!(&x.rows, &y.rows);
        prop_assert_eq!(&x.cols, &y.cols);
        prop_assert_eq!(&x.pivots, &y.pivots);
        let (sx, sy) = (svd_truncate(&x, 1e-8).unwrap(), svd_truncate(&y, 1e-8).unwrap());
        prop_assert_eq!(sx.sigma, sy.sigma);
    }
}
