//! Accuracy, TPR gaps, fairness, DTO, Pareto frontiers and model selection.

mod aggregate;
mod dto;
mod eval;
mod io;
mod pareto;
mod select;

pub use aggregate::{aggregate_runs, mean_std, MeanStd, ReportSummary};
pub use dto::{dto, Utopia};
pub use eval::{
    accuracy, demographic_parity_gap, evaluate, fairness, gap_per_class, rms_gap, tpr_table,
    EvalReport, PredictionSet, TprTable,
};
pub use io::{
    format_report, parse_report, read_predictions, read_predictions_from, write_predictions,
    write_predictions_to,
};
pub use pareto::{
    frontier_coverage, frontier_fairness_at, pareto_frontier, CandidatePoint, Provenance,
};
pub use select::{constrained_select, Selection};
