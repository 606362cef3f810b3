use serde::{Deserialize, Serialize};

use super::eval::EvalReport;
use crate::error::{Error, Result};

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Sample statistics (`n − 1` denominator, std 0 for a single value).
pub fn mean_std(values: &[f64]) -> Result<MeanStd> {
    if values.is_empty() {
        return Err(Error::Empty("aggregate over zero runs"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(MeanStd { mean, std, n })
}

/// Per-field statistics over several runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub accuracy: MeanStd,
    pub rms_gap: MeanStd,
    pub fairness: MeanStd,
    pub dto: MeanStd,
}

pub fn aggregate_runs(reports: &[EvalReport]) -> Result<ReportSummary> {
    let field = |f: fn(&EvalReport) -> f64| mean_std(&reports.iter().map(f).collect::<Vec<_>>());
    Ok(ReportSummary {
        accuracy: field(|r| r.accuracy)?,
        rms_gap: field(|r| r.rms_gap)?,
        fairness: field(|r| r.fairness)?,
        dto: field(|r| r.dto)?,
    })
}
