use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Features with target labels and optional protected labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub g: Vec<Option<usize>>,
    pub n_classes: usize,
    pub n_groups: usize,
}

impl Dataset {
    pub fn new(
        x: Matrix,
        y: Vec<usize>,
        g: Vec<Option<usize>>,
        n_classes: usize,
        n_groups: usize,
    ) -> Result<Self> {
        if y.len() != x.rows() || g.len() != x.rows() {
            return Err(Error::shape(
                "Dataset::new",
                format!("{} labels", x.rows()),
                format!("{} y / {} g", y.len(), g.len()),
            ));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::InvalidArgument(format!(
                "target {bad} out of range for {n_classes} classes"
            )));
        }
        if let Some(bad) = g.iter().flatten().find(|&&v| v >= n_groups) {
            return Err(Error::InvalidArgument(format!(
                "group {bad} out of range for {n_groups} groups"
            )));
        }
        if !x.is_finite() {
            return Err(Error::InvalidArgument("features must be finite".into()));
        }
        Ok(Dataset {
            x,
            y,
            g,
            n_classes,
            n_groups,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            g: indices.iter().map(|&i| self.g[i]).collect(),
            n_classes: self.n_classes,
            n_groups: self.n_groups,
        }
    }

    /// Indices of instances carrying a protected label.
    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.g[i].is_some()).collect()
    }

    pub fn labeled_count(&self) -> usize {
        self.g.iter().filter(|g| g.is_some()).count()
    }

    /// Empirical `P(y, g)` over labeled instances, row-major `|C| × |G|`.
    pub fn joint_frequencies(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.n_classes * self.n_groups];
        let mut total = 0usize;
        for (y, g) in self.y.iter().zip(&self.g) {
            if let Some(g) = g {
                counts[y * self.n_groups + g] += 1;
                total += 1;
            }
        }
        counts
            .into_iter()
            .map(|c| c as f64 / total.max(1) as f64)
            .collect()
    }
}
