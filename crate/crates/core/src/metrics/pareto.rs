use serde::{Deserialize, Serialize};

/// Where a candidate came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub variant: String,
    pub lambda: f64,
    pub seed: u64,
    pub epoch: usize,
}

/// One (accuracy, fairness) operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePoint {
    pub accuracy: f64,
    pub fairness: f64,
    pub provenance: Provenance,
}

impl CandidatePoint {
    pub fn new(accuracy: f64, fairness: f64, provenance: Provenance) -> Self {
        CandidatePoint {
            accuracy,
            fairness,
            provenance,
        }
    }

    /// `self` is at least as good on both axes and strictly better on one.
    pub fn dominates(&self, other: &CandidatePoint) -> bool {
        self.accuracy >= other.accuracy
            && self.fairness >= other.fairness
            && (self.accuracy > other.accuracy || self.fairness > other.fairness)
    }
}

/// Non-dominated subset, sorted by accuracy ascending. Identical points are
/// all kept, and ties keep input order.
pub fn pareto_frontier(points: &[CandidatePoint]) -> Vec<CandidatePoint> {
    let mut out: Vec<CandidatePoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| q.dominates(p)))
        .cloned()
        .collect();
    out.sort_by(|a, b| a.accuracy.total_cmp(&b.accuracy));
    out
}

/// Best fairness reachable at accuracy ≥ `accuracy` on a frontier; `None`
/// above the frontier's accuracy range.
pub fn frontier_fairness_at(frontier: &[CandidatePoint], accuracy: f64) -> Option<f64> {
    frontier
        .iter()
        .filter(|p| p.accuracy >= accuracy)
        .map(|p| p.fairness)
        .max_by(f64::total_cmp)
}

/// Fraction of the accuracy range where `a`'s step function is at least as
/// high as `b`'s, sampled on the union of both frontiers' accuracy values
/// that lie within both ranges.
pub fn frontier_coverage(a: &[CandidatePoint], b: &[CandidatePoint]) -> f64 {
    let mut grid: Vec<f64> = a.iter().chain(b).map(|p| p.accuracy).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut total = 0usize;
    let mut ok = 0usize;
    for acc in grid {
        if let (Some(fa), Some(fb)) = (frontier_fairness_at(a, acc), frontier_fairness_at(b, acc)) {
            total += 1;
            if fa >= fb {
                ok += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        ok as f64 / total as f64
    }
}
