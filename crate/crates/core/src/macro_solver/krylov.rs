use serde::Serialize;

use crate::error::{Error, Result};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a (restarted) GMRES solve.
#[derive(Clone, Debug, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

/// Restarted GMRES from a zero initial guess, stopping at `||b - A x|| <= tol * ||b||`.
///
/// The residual norm is the one tracked by the Givens recurrence.
pub fn gmres(
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<GmresOutcome> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x,
            iterations: 0,
            residual_norm: 0.0,
            converged: true,
        });
    }
    let target = tol * bnorm;
    let restart = restart.max(1);
    let mut iterations = 0;
    let mut r = b.to_vec();
    let mut beta = bnorm;

    while iterations < max_iter {
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h: Vec<Vec<f64>> = Vec::new(); // column j has j + 2 entries
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut resid = beta;

        for j in 0..restart {
            if iterations >= max_iter {
                break;
            }
            iterations += 1;
            let mut w = apply(&basis[j])?;
            let mut col = vec![0.0; j + 2];
            for (k, q) in basis.iter().enumerate() {
                let hk = dot(&w, q);
                col[k] = hk;
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= hk * qi;
                }
            }
            let wn = norm(&w);
            col[j + 1] = wn;
            for k in 0..j {
                let t = cs[k] * col[k] + sn[k] * col[k + 1];
                col[k + 1] = -sn[k] * col[k] + cs[k] * col[k + 1];
                col[k] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[j] / denom, col[j + 1] / denom)
            };
            col[j] = denom;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            resid = g[j + 1].abs();
            h.push(col);
            let breakdown = wn <= 1e-14 * beta;
            if !breakdown {
                basis.push(w.iter().map(|v| v / wn).collect());
            }
            if resid <= target || breakdown {
                break;
            }
        }

        // back substitution for the least-squares coefficients
        let m = h.len();
        let mut y = vec![0.0; m];
        for k in (0..m).rev() {
            let mut s = g[k];
            for l in k + 1..m {
                s -= h[l][k] * y[l];
            }
            y[k] = if h[k][k] != 0.0 { s / h[k][k] } else { 0.0 };
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, qi) in x.iter_mut().zip(&basis[k]) {
                *xi += yk * qi;
            }
        }
        if resid <= target {
            return Ok(GmresOutcome {
                x,
                iterations,
                residual_norm: resid,
                converged: true,
            });
        }
        // explicit residual for the restart
        let ax = apply(&x)?;
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        beta = norm(&r);
        if beta <= target || beta == 0.0 {
            return Ok(GmresOutcome {
                x,
                iterations,
                residual_norm: beta,
                converged: true,
            });
        }
    }
    Ok(GmresOutcome {
        x,
        iterations,
        residual_norm: beta,
        converged: false,
    })
}

/// Iteration counts of one Newton-Krylov solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct JfnkReport {
    pub newton_iters: usize,
    pub krylov_iters_per_newton: Vec<usize>,
    /// Root-mean-square residual at exit.
    pub final_residual_norm: f64,
    pub converged: bool,
    /// Step halvings triggered by non-physical trial states.
    pub backtracks: usize,
}

impl JfnkReport {
    pub fn total_krylov(&self) -> usize {
        self.krylov_iters_per_newton.iter().sum()
    }
}

/// Tolerances and limits for [`jfnk_solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JfnkOptions {
    /// Stop once `||G||_2 / sqrt(n)` falls to this level.
    pub newton_tol: f64,
    pub krylov_tol: f64,
    pub max_newton: usize,
    pub max_krylov: usize,
    pub restart: usize,
    pub perturbation: f64,
    pub max_halvings: usize,
}

impl Default for JfnkOptions {
    fn default() -> Self {
        JfnkOptions {
            newton_tol: 1e-14,
            krylov_tol: 1e-6,
            max_newton: 30,
            max_krylov: 300,
            restart: 30,
            perturbation: f64::EPSILON.sqrt(),
            max_halvings: 8,
        }
    }
}

fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        norm(x) / (x.len() as f64).sqrt()
    }
}

/// Newton iteration for `G(U) = 0` with finite-difference Jacobian-vector products
/// `J v ~ (G(U + h v) - G(U)) / h`, `h = perturbation (1 + ||U||) / ||v||`.
///
/// Trial states that `G` rejects as non-physical shorten the Newton step by halving.
pub fn jfnk_solve(
    mut g: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    u_init: Vec<f64>,
    opts: &JfnkOptions,
) -> Result<(Vec<f64>, JfnkReport)> {
    let mut u = u_init;
    let mut gu = g(&u)?;
    let mut report = JfnkReport {
        final_residual_norm: rms(&gu),
        ..Default::default()
    };
    loop {
        if report.final_residual_norm <= opts.newton_tol {
            report.converged = true;
            return Ok((u, report));
        }
        if report.newton_iters >= opts.max_newton {
            return Err(Error::NonConvergence { report });
        }
        let unorm = norm(&u);
        let rhs: Vec<f64> = gu.iter().map(|x| -x).collect();
        let outcome = {
            let (u_ref, gu_ref) = (&u, &gu);
            let g_ref = &mut g;
            gmres(
                |v| {
                    let vn = norm(v);
                    if vn == 0.0 {
                        return Ok(vec![0.0; v.len()]);
                    }
                    let h = opts.perturbation * (1.0 + unorm) / vn;
                    let shifted: Vec<f64> = u_ref.iter().zip(v).map(|(a, b)| a + h * b).collect();
                    let gs = g_ref(&shifted)?;
                    Ok(gs.iter().zip(gu_ref).map(|(a, b)| (a - b) / h).collect())
                },
                &rhs,
                opts.krylov_tol,
                opts.restart,
                opts.max_krylov,
            )?
        };
        report.newton_iters += 1;
        report.krylov_iters_per_newton.push(outcome.iterations);

        let mut step = 1.0;
        let mut halvings = 0;
        loop {
            let trial: Vec<f64> = u
                .iter()
                .zip(&outcome.x)
                .map(|(a, d)| a + step * d)
                .collect();
            match g(&trial) {
                Ok(gt) => {
                    u = trial;
                    gu = gt;
                    break;
                }
                Err(Error::Positivity { .. }) if halvings < opts.max_halvings => {
                    halvings += 1;
                    report.backtracks += 1;
                    step *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        report.final_residual_norm = rms(&gu);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| dot(row, x)).collect()
    }

    #[test]
    fn identity_system() {
        let b: Vec<f64> = (0..9).map(|k| k as f64 - 3.0).collect();
        let bb = b.clone();
        let (u, rep) = jfnk_solve(
            move |u| Ok(u.iter().zip(&bb).map(|(a, c)| a - c).collect()),
            vec![0.0; 9],
            &JfnkOptions::default(),
        )
        .unwrap();
        // The finite-difference directional derivative leaves an O(sqrt(eps)) residual
        // after the first update, which the second one removes.
        assert!(rep.newton_iters <= 2, "{rep:?}");
        assert_eq!(rep.krylov_iters_per_newton[0], 1);
        for (a, c) in u.iter().zip(&b) {
            assert!((a - c).abs() < 1e-14);
        }
    }

    #[test]
    fn gmres_spd_matches_direct_solve() {
        let n = 12;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i: usize| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            4.0
                        } else if i.abs_diff(j) == 1 {
                            -1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let out = gmres(|x| Ok(matvec(&a, x)), &b, 1e-12, 30, 100).unwrap();
        assert!(out.converged);
        let r: Vec<f64> = matvec(&a, &out.x)
            .iter()
            .zip(&b)
            .map(|(p, q)| p - q)
            .collect();
        assert!(norm(&r) <= 1e-11 * norm(&b));
    }

    #[test]
    fn gmres_restarts_still_converge() {
        let n = 40;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            2.0 + i as f64 / n as f64
                        } else if j == i + 1 {
                            0.5
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let b = vec![1.0; n];
        let out = gmres(|x| Ok(matvec(&a, x)), &b, 1e-10, 5, 500).unwrap();
        assert!(out.converged);
        let r: Vec<f64> = matvec(&a, &out.x)
            .iter()
            .zip(&b)
            .map(|(p, q)| p - q)
            .collect();
        assert!(norm(&r) <= 2e-10 * norm(&b));
    }

    #[test]
    fn scalar_newton_converges_quadratically() {
        let c = [2.0, 3.0, 0.5];
        let init: Vec<f64> = c.iter().map(|x: &f64| 1.5 * x.sqrt()).collect();
        let (u, rep) = jfnk_solve(
            |u| Ok(u.iter().zip(&c).map(|(a, b)| a * a - b).collect()),
            init,
            &JfnkOptions::default(),
        )
        .unwrap();
        assert!(rep.converged && rep.newton_iters <= 8);
        for (a, b) in u.iter().zip(&c) {
            assert!((a - b.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn nonconvergence_reports() {
        let opts = JfnkOptions {
            max_newton: 2,
            ..Default::default()
        };
        let err = jfnk_solve(
            |u| Ok(u.iter().map(|x| x * x + 1.0).collect()),
            vec![1.0; 3],
            &opts,
        )
        .unwrap_err();
        match err {
            Error::NonConvergence { report } => {
                assert_eq!(report.newton_iters, 2);
                assert!(!report.converged);
            }
            e => panic!("unexpected {e}"),
        }
    }
}
