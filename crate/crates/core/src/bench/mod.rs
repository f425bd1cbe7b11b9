//! The benchmark problems, refinement studies and output writers behind the CLI.

mod output;
mod problems;
mod studies;

pub use output::{
    diagnostics_csv, emit_outputs, jfnk_csv, moments_csv, svg_line_plot, timing_csv, OutputFlags,
    Snapshot, Summary,
};
pub use problems::{
    build_problem, BenchmarkSpec, Problem, ProblemTag, RIEMANN_LEFT, RIEMANN_RIGHT,
};
pub use studies::{
    l1_error, loglog_slope, pre_saturation_rows, restrict_periodic, scaling_study, spatial_study,
    temporal_study, Axis, ConvergenceRow, ConvergenceTable, ScalingRow, ScalingTable,
    SATURATION_FACTOR, SATURATION_ORDER, TEMPORAL_EPS_C, TEMPORAL_EPS_S,
};
