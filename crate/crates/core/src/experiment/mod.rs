//! Sweeps over variants × λ × seeds, run manifests and CSV reports.

mod config;
mod manifest;
mod reports;
mod sweep;

pub use config::{default_out_dir, lambda_grid, DataConfig, ExperimentConfig, Splits, OUT_ENV};
pub use manifest::{canonical_config, content_hash, replay, run_one, write_atomic, RunManifest};
pub use reports::{
    emit_reports, format_pareto, format_runs, format_selection, format_summary, pareto_rows,
    read_pareto, read_runs, read_runs_from, read_selection, read_summary, run_record,
    selection_rows, summarize, ParetoRow, ReportFiles, RunRow, SelectionRow, SummaryRow,
    SELECTION_SLACKS,
};
pub use sweep::{load_manifests, plan, run_sweep, runs_dir, SweepOutcome};
