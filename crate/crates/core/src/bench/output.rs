use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::problems::BenchmarkSpec;
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::integrator::SimulationResult;
use crate::kinetic::MomentField;

/// Moments of the solution at one time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub moments: MomentField,
}

/// Which files [`emit_outputs`] writes besides the CSVs and the summary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OutputFlags {
    pub plots: bool,
    pub timings: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub problem: BenchmarkSpec,
    pub seed: u64,
    pub steps: usize,
    pub final_time: f64,
    pub initial_totals: [f64; 3],
    pub final_totals: [f64; 3],
    /// Largest absolute deviation of each conserved total from its initial value.
    pub conservation_drift: [f64; 3],
    pub mean_svd_rank: f64,
    pub max_svd_rank: usize,
    pub mean_cur_rank: f64,
    pub mean_newton_per_stage: f64,
    pub mean_krylov_per_newton: f64,
}

impl Summary {
    pub fn new(spec: &BenchmarkSpec, result: &SimulationResult) -> Self {
        let n = result.history.len().max(1) as f64;
        Summary {
            problem: spec.clone(),
            seed: spec.config.seed,
            steps: result.steps(),
            final_time: result.final_state.t,
            initial_totals: result.initial_totals,
            final_totals: result
                .history
                .last()
                .map(|d| d.conserved)
                .unwrap_or(result.initial_totals),
            conservation_drift: result.max_drift(),
            mean_svd_rank: result.mean_svd_rank(),
            max_svd_rank: result.max_svd_rank(),
            mean_cur_rank: result
                .history
                .iter()
                .map(|d| d.cur_rank() as f64)
                .sum::<f64>()
                / n,
            mean_newton_per_stage: result.mean_newton_per_stage(),
            mean_krylov_per_newton: result.mean_krylov_per_newton(),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `t,x,rho,u,T`, one row per cell per snapshot.
pub fn moments_csv(grid: &PhaseGrid, snapshots: &[Snapshot]) -> String {
    let mut s = String::from("t,x,rho,u,T\n");
    for snap in snapshots {
        for (i, x) in grid.x_centers.iter().enumerate() {
            let m = &snap.moments;
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{:e}",
                snap.t, x, m.rho[i], m.u[i], m.temperature[i]
            );
        }
    }
    s
}

/// Per-step observer stream without timings, so reruns reproduce it byte for byte.
pub fn diagnostics_csv(result: &SimulationResult) -> String {
    let mut s = String::from(
        "step,t,dt,mass,momentum,energy,cur_rank,svd_rank,newton_iters,krylov_iters\n",
    );
    for d in &result.history {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{:e},{},{},{},{}",
            d.step,
            d.t,
            d.dt,
            d.conserved[0],
            d.conserved[1],
            d.conserved[2],
            d.cur_rank(),
            d.svd_rank(),
            d.newton_iters(),
            d.krylov_iters()
        );
    }
    s
}

/// One row per stage Newton solve.
pub fn jfnk_csv(result: &SimulationResult) -> String {
    let mut s = String::from("step,stage,newton_iters,total_krylov_iters,final_residual\n");
    for d in &result.history {
        for st in &d.stages {
            let _ = writeln!(
                s,
                "{},{},{},{},{:e}",
                d.step,
                st.stage,
                st.jfnk.newton_iters,
                st.jfnk.total_krylov(),
                st.jfnk.final_residual_norm
            );
        }
    }
    s
}

pub fn timing_csv(result: &SimulationResult) -> String {
    let mut s = String::from("step,wall_time\n");
    for d in &result.history {
        let _ = writeln!(s, "{},{:e}", d.step, d.wall_time);
    }
    s
}

/// A minimal line chart: one or more series over a shared x range.
pub fn svg_line_plot(title: &str, x_label: &str, series: &[(&str, &[f64], &[f64])]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
    ];
    let finite = |v: &[f64]| {
        v.iter()
            .copied()
            .filter(|x| x.is_finite())
            .collect::<Vec<_>>()
    };
    let xs: Vec<f64> = series.iter().flat_map(|s| finite(s.1)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| finite(s.2)).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo <= 1e-300 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>",
        W / 2.0
    );
    let _ = writeln!(
        s,
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>",
        W / 2.0,
        H - 10.0
    );
    for (v, y) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{v:.4}</text>",
            M - 4.0,
            y + 4.0
        );
    }
    for (v, x) in [(x0, px(x0)), (x1, px(x1))] {
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{v:.4}</text>",
            H - M + 16.0
        );
    }
    for (k, (name, x, y)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = x
            .iter()
            .zip(y.iter())
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{name}</text>",
            W - M - 100.0,
            M + 16.0 * (k as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `moments.csv`, `diagnostics.csv`, `jfnk.csv` and `summary.json` into `dir`,
/// plus `timing.csv` and SVG plots when requested. Returns the written paths.
pub fn emit_outputs(
    dir: &Path,
    spec: &BenchmarkSpec,
    grid: &PhaseGrid,
    result: &SimulationResult,
    snapshots: &[Snapshot],
    flags: OutputFlags,
) -> Result<Vec<PathBuf>> {
    if result.history.is_empty() {
        return Err(Error::InvalidConfig(
            "nothing to write: the run took no steps".into(),
        ));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        write(&path, &text)?;
        written.push(path);
        Ok(())
    };
    put("moments.csv", moments_csv(grid, snapshots))?;
    put("diagnostics.csv", diagnostics_csv(result))?;
    put("jfnk.csv", jfnk_csv(result))?;
    let summary = Summary::new(spec, result);
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
    put("summary.json", json + "\n")?;
    if flags.timings {
        put("timing.csv", timing_csv(result))?;
    }
    if flags.plots {
        if let Some(last) = snapshots.last() {
            let x = &grid.x_centers;
            let m = &last.moments;
            let title = format!("{} at t = {}", spec.tag, last.t);
            put(
                "moments.svg",
                svg_line_plot(
                    &title,
                    "x",
                    &[("rho", x, &m.rho), ("u", x, &m.u), ("T", x, &m.temperature)],
                ),
            )?;
        }
        let t: Vec<f64> = result.history.iter().map(|d| d.t).collect();
        let svd: Vec<f64> = result.history.iter().map(|d| d.svd_rank() as f64).collect();
        let cur: Vec<f64> = result.history.iter().map(|d| d.cur_rank() as f64).collect();
        put(
            "ranks.svg",
            svg_line_plot(
                "rank versus time",
                "t",
                &[("SVD", &t, &svd), ("CUR", &t, &cur)],
            ),
        )?;
    }
    Ok(written)
}
