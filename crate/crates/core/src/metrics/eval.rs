use serde::{Deserialize, Serialize};

use super::dto::{dto, Utopia};
use crate::error::{Error, Result};

/// Predictions with gold targets and (possibly missing) protected labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSet {
    pub yhat: Vec<usize>,
    pub y: Vec<usize>,
    pub g: Vec<Option<usize>>,
    pub n_classes: usize,
    pub n_groups: usize,
}

impl PredictionSet {
    pub fn new(
        yhat: Vec<usize>,
        y: Vec<usize>,
        g: Vec<Option<usize>>,
        n_classes: usize,
        n_groups: usize,
    ) -> Result<Self> {
        if yhat.len() != y.len() || g.len() != y.len() {
            return Err(Error::shape(
                "PredictionSet",
                format!("{} rows", y.len()),
                format!("{} yhat / {} g", yhat.len(), g.len()),
            ));
        }
        if let Some(bad) = yhat.iter().chain(&y).find(|&&c| c >= n_classes) {
            return Err(Error::InvalidArgument(format!(
                "class {bad} out of range for {n_classes} classes"
            )));
        }
        if let Some(bad) = g.iter().flatten().find(|&&v| v >= n_groups) {
            return Err(Error::InvalidArgument(format!(
                "group {bad} out of range for {n_groups} groups"
            )));
        }
        Ok(PredictionSet {
            yhat,
            y,
            g,
            n_classes,
            n_groups,
        })
    }

    /// Infers class and group counts from the largest labels present.
    pub fn inferred(yhat: Vec<usize>, y: Vec<usize>, g: Vec<Option<usize>>) -> Result<Self> {
        let n_classes = yhat.iter().chain(&y).max().map_or(1, |m| m + 1);
        let n_groups = g.iter().flatten().max().map_or(1, |m| m + 1);
        Self::new(yhat, y, g, n_classes, n_groups)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Percentage of correct predictions.
pub fn accuracy(preds: &PredictionSet) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::Empty("accuracy over an empty prediction set"));
    }
    let correct = preds
        .yhat
        .iter()
        .zip(&preds.y)
        .filter(|(p, y)| p == y)
        .count();
    Ok(100.0 * correct as f64 / preds.len() as f64)
}

/// True-positive rates per (class, group) and per class pooled over groups.
///
/// Only instances with a known group enter the table. A cell without support
/// is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct TprTable {
    pub n_classes: usize,
    pub n_groups: usize,
    /// `[class][group]`
    pub cells: Vec<Vec<Option<f64>>>,
    pub overall: Vec<Option<f64>>,
    pub support: Vec<Vec<usize>>,
}

impl TprTable {
    /// `(class, group)` pairs without support.
    pub fn undefined_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (c, row) in self.cells.iter().enumerate() {
            for (g, v) in row.iter().enumerate() {
                if v.is_none() {
                    out.push((c, g));
                }
            }
        }
        out
    }
}

pub fn tpr_table(preds: &PredictionSet) -> TprTable {
    let (nc, ng) = (preds.n_classes, preds.n_groups);
    let mut hits = vec![vec![0usize; ng]; nc];
    let mut support = vec![vec![0usize; ng]; nc];
    for i in 0..preds.len() {
        if let Some(g) = preds.g[i] {
            let y = preds.y[i];
            support[y][g] += 1;
            if preds.yhat[i] == y {
                hits[y][g] += 1;
            }
        }
    }
    let rate = |h: usize, n: usize| (n > 0).then(|| h as f64 / n as f64);
    let cells = (0..nc)
        .map(|c| (0..ng).map(|g| rate(hits[c][g], support[c][g])).collect())
        .collect();
    let overall = (0..nc)
        .map(|c| rate(hits[c].iter().sum(), support[c].iter().sum()))
        .collect();
    TprTable {
        n_classes: nc,
        n_groups: ng,
        cells,
        overall,
        support,
    }
}

/// `Σ_g |TPR_{g,y} − TPR_y|` over groups with support.
pub fn gap_per_class(table: &TprTable, class: usize) -> Result<f64> {
    let overall = table
        .overall
        .get(class)
        .copied()
        .flatten()
        .ok_or_else(|| Error::InvalidArgument(format!("class {class} has no support")))?;
    Ok(table.cells[class]
        .iter()
        .flatten()
        .map(|tpr| (tpr - overall).abs())
        .sum())
}

/// Root mean square of per-class gaps.
pub fn rms_gap(per_class_gaps: &[f64]) -> f64 {
    if per_class_gaps.is_empty() {
        return 0.0;
    }
    let mean_sq = per_class_gaps.iter().map(|g| g * g).sum::<f64>() / per_class_gaps.len() as f64;
    mean_sq.sqrt()
}

/// `100 · (1 − gap)`. Not clamped: with more than two groups the gap can
/// exceed 1.
pub fn fairness(rms_gap: f64) -> f64 {
    100.0 * (1.0 - rms_gap)
}

/// RMS over classes of `Σ_g |P(ŷ=y | g) − P(ŷ=y)|` on instances with a known
/// group.
pub fn demographic_parity_gap(preds: &PredictionSet) -> f64 {
    let (nc, ng) = (preds.n_classes, preds.n_groups);
    let mut counts = vec![vec![0usize; nc]; ng];
    let mut group_sizes = vec![0usize; ng];
    for (p, g) in preds.yhat.iter().zip(&preds.g) {
        if let Some(g) = g {
            counts[*g][*p] += 1;
            group_sizes[*g] += 1;
        }
    }
    let total: usize = group_sizes.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let gaps: Vec<f64> = (0..nc)
        .map(|c| {
            let pooled = (0..ng).map(|g| counts[g][c]).sum::<usize>() as f64 / total as f64;
            (0..ng)
                .filter(|&g| group_sizes[g] > 0)
                .map(|g| (counts[g][c] as f64 / group_sizes[g] as f64 - pooled).abs())
                .sum()
        })
        .collect();
    rms_gap(&gaps)
}

/// Headline evaluation of one model on one split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub rms_gap: f64,
    pub fairness: f64,
    pub dto: f64,
}

/// Accuracy, RMS TPR gap over classes with support, fairness and DTO.
pub fn evaluate(preds: &PredictionSet, utopia: Utopia) -> Result<EvalReport> {
    let acc = accuracy(preds)?;
    let table = tpr_table(preds);
    let gaps: Vec<f64> = (0..table.n_classes)
        .filter(|&c| table.overall[c].is_some())
        .map(|c| gap_per_class(&table, c))
        .collect::<Result<_>>()?;
    let gap = rms_gap(&gaps);
    let fair = fairness(gap);
    Ok(EvalReport {
        accuracy: acc,
        rms_gap: gap,
        fairness: fair,
        dto: dto(acc, fair, utopia),
    })
}
