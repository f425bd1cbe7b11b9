use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kinetic_ar::bench::{
    build_problem, emit_outputs, scaling_study, spatial_study, svg_line_plot, temporal_study,
    ConvergenceTable, OutputFlags, ProblemTag, ScalingTable, Snapshot,
};
use kinetic_ar::config::Overrides;
use kinetic_ar::{Error, Result};

#[derive(Parser)]
#[command(name = "kinetic-ar", version, about = "Adaptive-rank BGK benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark and write its outputs.
    Run(RunArgs),
    /// Refinement or timing study.
    Study(StudyArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nv: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    eps_c: Option<f64>,
    #[arg(long)]
    eps_s: Option<f64>,
    /// Constant Knudsen number.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Steepness of the mixed-regime Knudsen profile.
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_rank: Option<usize>,
    /// Random candidates per ACA pivot search.
    #[arg(long)]
    aca_candidates: Option<usize>,
    /// Newton stops when the RMS residual drops below this.
    #[arg(long)]
    newton_tol: Option<f64>,
    #[arg(long)]
    krylov_tol: Option<f64>,
    #[arg(long)]
    max_newton: Option<usize>,
    #[arg(long)]
    max_krylov: Option<usize>,
    #[arg(long)]
    gmres_restart: Option<usize>,
    #[arg(long)]
    jfnk_perturbation: Option<f64>,
    /// `sa_dirk3` or `backward_euler`.
    #[arg(long)]
    tableau: Option<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl Common {
    fn overrides(&self, problem: Option<&str>) -> Result<Overrides> {
        let cli = Overrides {
            problem: problem.map(str::to_string),
            nx: self.nx,
            nv: self.nv,
            cfl: self.cfl,
            eps_c: self.eps_c,
            eps_s: self.eps_s,
            epsilon: self.epsilon,
            a0: self.a0,
            eps0: self.eps0,
            t_final: self.t_final,
            seed: self.seed,
            max_rank: self.max_rank,
            aca_candidates: self.aca_candidates,
            newton_tol: self.newton_tol,
            krylov_tol: self.krylov_tol,
            max_newton: self.max_newton,
            max_krylov: self.max_krylov,
            gmres_restart: self.gmres_restart,
            jfnk_perturbation: self.jfnk_perturbation,
            tableau: self.tableau.clone(),
        };
        Ok(match &self.config {
            Some(path) => cli.or(Overrides::load(path)?),
            None => cli,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    /// consistent_ic, riemann or mixed_regime.
    #[arg(long)]
    problem: Option<String>,
    #[command(flatten)]
    common: Common,
    /// Also write SVG plots of the final moments and the rank history.
    #[arg(long)]
    plots: bool,
    /// Also write per-step wall times to timing.csv.
    #[arg(long)]
    timings: bool,
    /// Record moments every this many steps (the final state is always recorded).
    #[arg(long, default_value_t = 0)]
    snapshot_every: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Temporal,
    Spatial,
    Scaling,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Problem for the scaling study.
    #[arg(long, default_value = "mixed_regime")]
    problem: String,
    /// Levels: CFL numbers (temporal) or cells per direction (spatial, scaling).
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Reference CFL (temporal) or cells per direction (spatial).
    #[arg(long)]
    reference: Option<f64>,
    /// Minimum number of timed steps per mesh (scaling).
    #[arg(long, default_value_t = 5)]
    min_steps: usize,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(args) => run(args),
        Command::Study(args) => study(args),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let o = args.common.overrides(args.problem.as_deref())?;
    let name = o.problem.clone().ok_or_else(|| {
        Error::InvalidConfig("no problem given (use --problem or a config file)".into())
    })?;
    let problem = build_problem(&name, &o)?;
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        moments: problem.initial_state()?.moments()?,
    }];
    let every = args.snapshot_every;
    let t_final = problem.spec.t_final;
    let mut failed = None;
    let result = problem
        .solver
        .run(problem.initial_state()?, t_final, |d, s| {
            let due = (every > 0 && d.step % every == 0) || s.t >= t_final;
            if due {
                match s.moments() {
                    Ok(moments) => snapshots.push(Snapshot { t: s.t, moments }),
                    Err(e) => failed = Some(e),
                }
            }
            eprintln!(
                "step {:5}  t = {:.6}  svd rank {:3}  newton {:2}",
                d.step,
                d.t,
                d.svd_rank(),
                d.newton_iters()
            );
        })?;
    if let Some(e) = failed {
        return Err(e);
    }
    let flags = OutputFlags {
        plots: args.plots,
        timings: args.timings,
    };
    let written = emit_outputs(
        &args.common.out_dir,
        &problem.spec,
        &problem.grid,
        &result,
        &snapshots,
        flags,
    )?;
    let drift = result.max_drift();
    println!(
        "{}: {} steps to t = {}, mean SVD rank {:.2}, max conservation drift {:.3e}",
        name,
        result.steps(),
        result.final_state.t,
        result.mean_svd_rank(),
        drift.iter().fold(0.0f64, |m, d| m.max(*d))
    );
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn to_json(value: &impl serde::Serialize) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

fn convergence_report(table: &ConvergenceTable, x_label: &str) -> String {
    let mut s = format!("{x_label},error,order,steps,mean_svd_rank\n");
    for r in &table.rows {
        let order = r.order.map(|o| format!("{o:.4}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:e},{},{},{:.3}",
            r.resolution, r.error, order, r.steps, r.mean_svd_rank
        );
    }
    s
}

fn study(args: StudyArgs) -> Result<()> {
    let o = args.common.overrides(None)?;
    let dir = &args.common.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let eps = o.epsilon.unwrap_or(1e-2);
    let (csv, json, svg) = match args.axis {
        AxisArg::Temporal => {
            let levels = args
                .levels
                .unwrap_or_else(|| (0..8).map(|k| 12.8 / f64::powi(2.0, k)).collect());
            let table = temporal_study(eps, &levels, args.reference.unwrap_or(0.001), &o)?;
            println!(
                "fitted order {:?} over {} levels",
                table.fitted_slope, table.fit_rows
            );
            let x: Vec<f64> = table.rows.iter().map(|r| r.resolution.log10()).collect();
            let y: Vec<f64> = table.rows.iter().map(|r| r.error.log10()).collect();
            let svg = svg_line_plot("L1 density error", "log10 CFL", &[("log10 error", &x, &y)]);
            (convergence_report(&table, "cfl"), to_json(&table)?, svg)
        }
        AxisArg::Spatial => {
            let levels: Vec<usize> = args
                .levels
                .map(|l| l.iter().map(|&n| n as usize).collect())
                .unwrap_or_else(|| vec![32, 64, 128, 256]);
            let reference = args.reference.map(|r| r as usize).unwrap_or(512);
            let table = spatial_study(eps, &levels, reference, &o)?;
            println!(
                "fitted order {:?} over {} levels",
                table.fitted_slope, table.fit_rows
            );
            let x: Vec<f64> = table.rows.iter().map(|r| r.resolution.log10()).collect();
            let y: Vec<f64> = table.rows.iter().map(|r| r.error.log10()).collect();
            let svg = svg_line_plot("L1 density error", "log10 N", &[("log10 error", &x, &y)]);
            (convergence_report(&table, "n"), to_json(&table)?, svg)
        }
        AxisArg::Scaling => {
            let tag: ProblemTag = args.problem.parse()?;
            let levels: Vec<usize> = args
                .levels
                .map(|l| l.iter().map(|&n| n as usize).collect())
                .unwrap_or_else(|| vec![64, 128, 256, 512, 1024]);
            let table: ScalingTable = scaling_study(tag, &levels, &o, args.min_steps)?;
            println!("log-log slope {:?}", table.slope);
            let mut csv = String::from("n,steps_timed,wall_time_per_step,mean_svd_rank\n");
            for r in &table.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{:e},{:.3}",
                    r.n, r.steps_timed, r.wall_time_per_step, r.mean_svd_rank
                );
            }
            let x: Vec<f64> = table.rows.iter().map(|r| (r.n as f64).log10()).collect();
            let y: Vec<f64> = table
                .rows
                .iter()
                .map(|r| r.wall_time_per_step.log10())
                .collect();
            let svg = svg_line_plot("time per step", "log10 N", &[("log10 seconds", &x, &y)]);
            (csv, to_json(&table)?, svg)
        }
    };
    print!("{csv}");
    write_file(&dir.join("study.csv"), &csv)?;
    write_file(&dir.join("study.json"), &(json + "\n"))?;
    write_file(&dir.join("study.svg"), &svg)?;
    Ok(())
}
