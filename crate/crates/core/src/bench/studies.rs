use std::time::Instant;

use serde::Serialize;

use super::problems::{build_problem, BenchmarkSpec, Problem, ProblemTag};
use crate::config::Overrides;
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::integrator::SimulationResult;

/// A refinement study has saturated from the first level whose local order drops below
/// this value; the smallest error from there on is the floor.
pub const SATURATION_ORDER: f64 = 1.5;

/// Levels whose error lies within this factor of the floor are excluded from fits too,
/// since the floor already distorts their error by more than about ten percent.
pub const SATURATION_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Temporal,
    Spatial,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    /// Cells per direction (spatial) or CFL number (temporal).
    pub resolution: f64,
    pub error: f64,
    /// `log2(e_prev / e)` scaled by the refinement ratio; absent on the first row.
    pub order: Option<f64>,
    pub steps: usize,
    pub mean_svd_rank: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub axis: Axis,
    pub epsilon: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Number of leading rows before saturation.
    pub fit_rows: usize,
    /// Least-squares slope of `log(error)` against `log(h)` over the fitted rows.
    pub fitted_slope: Option<f64>,
}

/// L1 density error `dx * sum |rho - rho_ref|`.
pub fn l1_error(rho: &[f64], reference: &[f64], dx: f64) -> f64 {
    dx * rho
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// Samples a periodic fine-grid field at the centres of a grid `ratio` times coarser.
///
/// For even ratios the coarse centres sit on fine cell faces; the value there comes
/// from the six-point midpoint interpolant `(3, -25, 150, 150, -25, 3) / 256`.
pub fn restrict_periodic(fine: &[f64], ratio: usize) -> Result<Vec<f64>> {
    let n = fine.len();
    if ratio == 0 || !n.is_multiple_of(ratio) {
        return Err(Error::InvalidConfig(format!(
            "cannot restrict {n} cells by a factor {ratio}"
        )));
    }
    let get = |k: isize| fine[k.rem_euclid(n as isize) as usize];
    let coarse = n / ratio;
    if ratio == 1 {
        return Ok(fine.to_vec());
    }
    if ratio % 2 == 1 {
        return Ok((0..coarse).map(|i| fine[i * ratio + ratio / 2]).collect());
    }
    const W: [f64; 6] = [3.0, -25.0, 150.0, 150.0, -25.0, 3.0];
    Ok((0..coarse)
        .map(|i| {
            let left = (i * ratio + ratio / 2) as isize - 1;
            W.iter()
                .enumerate()
                .map(|(k, w)| w * get(left - 2 + k as isize))
                .sum::<f64>()
                / 256.0
        })
        .collect())
}

/// Local orders between consecutive rows for a refinement ratio `ratio`.
fn local_orders(errors: &[f64], ratio: f64) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for w in errors.windows(2) {
        out.push(Some((w[0] / w[1]).ln() / ratio.ln()));
    }
    out
}

/// Number of leading rows that are free of saturation, given errors at levels refined
/// by `ratio` each.
pub fn pre_saturation_rows(errors: &[f64], ratio: f64) -> usize {
    let orders = local_orders(errors, ratio);
    let Some(first) = orders
        .iter()
        .position(|o| matches!(o, Some(p) if *p < SATURATION_ORDER))
    else {
        return errors.len();
    };
    let floor = errors[first..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    errors
        .iter()
        .take_while(|&&e| e >= SATURATION_FACTOR * floor)
        .count()
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

fn run_problem(problem: &Problem) -> Result<SimulationResult> {
    problem
        .solver
        .run(problem.initial_state()?, problem.spec.t_final, |_, _| {})
}

fn density(result: &SimulationResult, grid: &PhaseGrid) -> Vec<f64> {
    result.final_state.macro_state[..grid.nx].to_vec()
}

fn table(
    axis: Axis,
    epsilon: f64,
    resolution: Vec<f64>,
    errors: Vec<f64>,
    results: &[SimulationResult],
    ratio: f64,
) -> ConvergenceTable {
    let orders = local_orders(&errors, ratio);
    let fit_rows = pre_saturation_rows(&errors, ratio);
    let fitted_slope = if fit_rows >= 3 {
        loglog_slope(&resolution[..fit_rows], &errors[..fit_rows]).map(|s| match axis {
            Axis::Temporal => s,
            Axis::Spatial => -s,
        })
    } else {
        None
    };
    let rows = resolution
        .iter()
        .zip(&errors)
        .zip(orders)
        .zip(results)
        .map(|(((&resolution, &error), order), r)| ConvergenceRow {
            resolution,
            error,
            order,
            steps: r.steps(),
            mean_svd_rank: r.mean_svd_rank(),
        })
        .collect();
    ConvergenceTable {
        axis,
        epsilon,
        rows,
        fit_rows,
        fitted_slope,
    }
}

/// Spatial refinement on the consistent-IC problem against a finer run.
///
/// Every level uses `N x N` cells; the reference uses `reference_n` cells per direction
/// with tolerances tightened tenfold, and is restricted to each coarse grid.
pub fn spatial_study(
    epsilon: f64,
    levels: &[usize],
    reference_n: usize,
    base: &Overrides,
) -> Result<ConvergenceTable> {
    if levels.len() < 3 {
        return Err(Error::InvalidConfig(
            "a convergence study needs at least 3 levels".into(),
        ));
    }
    let tag = ProblemTag::ConsistentIc.name();
    let defaults = BenchmarkSpec::new(ProblemTag::ConsistentIc, base)?.config;
    let with_n = |n: usize, tighten: f64| -> Result<Problem> {
        let o = Overrides {
            nx: Some(n),
            nv: Some(n),
            epsilon: Some(epsilon),
            eps_c: Some(defaults.eps_c / tighten),
            eps_s: Some(defaults.eps_s / tighten),
            ..base.clone()
        };
        build_problem(tag, &o)
    };
    let reference = with_n(reference_n, 10.0)?;
    let ref_result = run_problem(&reference)?;
    let ref_rho = density(&ref_result, &reference.grid);
    let mut errors = Vec::new();
    let mut results = Vec::new();
    for &n in levels {
        let p = with_n(n, 1.0)?;
        if !reference_n.is_multiple_of(n) {
            return Err(Error::InvalidConfig(format!(
                "level {n} does not divide the reference {reference_n}"
            )));
        }
        let r = run_problem(&p)?;
        let restricted = restrict_periodic(&ref_rho, reference_n / n)?;
        errors.push(l1_error(&density(&r, &p.grid), &restricted, p.grid.dx));
        results.push(r);
    }
    let res: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    Ok(table(Axis::Spatial, epsilon, res, errors, &results, 2.0))
}

/// Default compression tolerances of temporal studies. A reference run takes tens of
/// thousands of steps, and truncation errors at the problem defaults would add up to
/// more than the time discretisation error being measured.
pub const TEMPORAL_EPS_C: f64 = 1e-12;
pub const TEMPORAL_EPS_S: f64 = 1e-11;

/// CFL refinement on the consistent-IC problem at a fixed mesh against a run at `reference_cfl`.
pub fn temporal_study(
    epsilon: f64,
    cfls: &[f64],
    reference_cfl: f64,
    base: &Overrides,
) -> Result<ConvergenceTable> {
    if cfls.len() < 3 {
        return Err(Error::InvalidConfig(
            "a convergence study needs at least 3 levels".into(),
        ));
    }
    let tag = ProblemTag::ConsistentIc.name();
    let with_cfl = |cfl: f64| {
        let o = Overrides {
            cfl: Some(cfl),
            epsilon: Some(epsilon),
            eps_c: Some(base.eps_c.unwrap_or(TEMPORAL_EPS_C)),
            eps_s: Some(base.eps_s.unwrap_or(TEMPORAL_EPS_S)),
            ..base.clone()
        };
        build_problem(tag, &o)
    };
    let reference = with_cfl(reference_cfl)?;
    let ref_result = run_problem(&reference)?;
    let ref_rho = density(&ref_result, &reference.grid);
    let mut errors = Vec::new();
    let mut results = Vec::new();
    for &cfl in cfls {
        let p = with_cfl(cfl)?;
        let r = run_problem(&p)?;
        errors.push(l1_error(&density(&r, &p.grid), &ref_rho, p.grid.dx));
        results.push(r);
    }
    let ratio = if cfls.len() >= 2 {
        cfls[0] / cfls[1]
    } else {
        2.0
    };
    Ok(table(
        Axis::Temporal,
        epsilon,
        cfls.to_vec(),
        errors,
        &results,
        ratio,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub steps_timed: usize,
    /// Median wall time of one step, in seconds.
    pub wall_time_per_step: f64,
    pub mean_svd_rank: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingTable {
    pub problem: ProblemTag,
    pub rows: Vec<ScalingRow>,
    /// Log-log slope of time per step against `N`; needs at least two rows.
    pub slope: Option<f64>,
}

/// Times steps on `N x N` meshes over a short horizon (`t = 0.001`, CFL 1 unless overridden).
///
/// Short runs are repeated until at least `min_steps` steps were timed, and the median
/// step time is reported.
pub fn scaling_study(
    tag: ProblemTag,
    n_list: &[usize],
    base: &Overrides,
    min_steps: usize,
) -> Result<ScalingTable> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("mesh sizes must be ascending".into()));
    }
    let mut rows = Vec::new();
    for &n in n_list {
        let o = Overrides {
            nx: Some(n),
            nv: Some(n),
            cfl: Some(base.cfl.unwrap_or(1.0)),
            t_final: Some(base.t_final.unwrap_or(1e-3)),
            ..base.clone()
        };
        let p = build_problem(tag.name(), &o)?;
        let mut times = Vec::new();
        let mut ranks = Vec::new();
        while times.len() < min_steps.max(1) {
            let start = Instant::now();
            let r = run_problem(&p)?;
            let total = start.elapsed().as_secs_f64();
            if r.history.is_empty() {
                times.push(total);
            }
            for d in &r.history {
                times.push(d.wall_time.max(f64::MIN_POSITIVE));
                ranks.push(d.svd_rank() as f64);
            }
        }
        times.sort_by(f64::total_cmp);
        let median = times[times.len() / 2];
        rows.push(ScalingRow {
            n,
            steps_timed: times.len(),
            wall_time_per_step: median,
            mean_svd_rank: ranks.iter().sum::<f64>() / ranks.len().max(1) as f64,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.wall_time_per_step).collect();
    Ok(ScalingTable {
        problem: tag,
        slope: loglog_slope(&x, &y),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_is_high_order() {
        let field = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|i| (2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64).sin())
                .collect()
        };
        let coarse = restrict_periodic(&field(256), 4).unwrap();
        let exact = field(64);
        let err = coarse
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert_eq!(
            restrict_periodic(&field(9), 3).unwrap(),
            field(9)
                .iter()
                .skip(1)
                .step_by(3)
                .copied()
                .collect::<Vec<_>>()
        );
        assert!(restrict_periodic(&field(10), 3).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 2.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn saturation_detection() {
        // Local orders 3.06, 2.91, 2.68, 1.18, 0.14: the floor is 1.0e-6, so 2.5e-6 is out too.
        let errors = [1e-3, 1.2e-4, 1.6e-5, 2.5e-6, 1.1e-6, 1.0e-6];
        assert_eq!(pre_saturation_rows(&errors, 2.0), 3);
        let clean = [1.0, 0.125, 0.015625, 0.001953125];
        assert_eq!(pre_saturation_rows(&clean, 2.0), 4);
        assert_eq!(pre_saturation_rows(&[], 2.0), 0);
    }

    #[test]
    fn l1_of_constant_offset() {
        assert!((l1_error(&[1.0; 8], &[0.5; 8], 0.25) - 1.0).abs() < 1e-15);
    }
}
