use super::Matrix;
use crate::error::{Error, Result};

/// Weighted softmax cross-entropy.
///
/// `loss = Σ_i w_i · −log softmax(logits_i)[label_i] / Σ_i w_i`, with the
/// exact gradient w.r.t. `logits`. `weights = None` means all ones.
pub fn softmax_xent(
    logits: &Matrix,
    labels: &[usize],
    weights: Option<&[f64]>,
) -> Result<(f64, Matrix)> {
    let (n, k) = logits.shape();
    if n == 0 {
        return Err(Error::Empty("softmax_xent batch"));
    }
    if labels.len() != n {
        return Err(Error::shape("softmax_xent labels", n, labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} out of range for {k} classes"
        )));
    }
    let total_weight = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::shape("softmax_xent weights", n, w.len()));
            }
            if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidArgument(
                    "weights must be finite and nonnegative".into(),
                ));
            }
            w.iter().sum::<f64>()
        }
        None => n as f64,
    };
    if total_weight <= 0.0 {
        return Err(Error::InvalidArgument("weights sum to zero".into()));
    }

    let mut loss = 0.0;
    let mut grad = Matrix::zeros(n, k);
    for i in 0..n {
        let row = logits.row(i);
        let w = weights.map_or(1.0, |w| w[i]) / total_weight;
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = row.iter().map(|&z| (z - max).exp()).sum();
        let log_z = max + sum_exp.ln();
        loss += w * (log_z - row[labels[i]]);
        let g = grad.row_mut(i);
        for (j, &z) in row.iter().enumerate() {
            g[j] = w * (z - log_z).exp();
        }
        g[labels[i]] -= w;
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite("softmax_xent"));
    }
    Ok((loss, grad))
}

/// Index of the largest entry per row; ties go to the lowest index.
pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    (0..m.rows())
        .map(|r| {
            let row = m.row(r);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
