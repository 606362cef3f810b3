use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Mean over unordered pairs of `‖R_pᵀ R_q / B‖²_F`.
pub fn orthogonality_penalty(reps: &[Matrix]) -> Result<f64> {
    Ok(orthogonality_penalty_grad(reps)?.0)
}

/// Penalty value together with its gradient w.r.t. each representation.
pub fn orthogonality_penalty_grad(reps: &[Matrix]) -> Result<(f64, Vec<Matrix>)> {
    if reps.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "orthogonality penalty needs >= 2 representations, got {}",
            reps.len()
        )));
    }
    let shape = reps[0].shape();
    if let Some(bad) = reps.iter().find(|r| r.shape() != shape) {
        return Err(Error::shape(
            "orthogonality_penalty",
            format!("{shape:?}"),
            format!("{:?}", bad.shape()),
        ));
    }
    let batch = shape.0.max(1) as f64;
    let n_pairs = (reps.len() * (reps.len() - 1) / 2) as f64;
    let mut value = 0.0;
    let mut grads: Vec<Matrix> = reps
        .iter()
        .map(|r| Matrix::zeros(r.rows(), r.cols()))
        .collect();
    for p in 0..reps.len() {
        for q in p + 1..reps.len() {
            let m = reps[p].t_matmul(&reps[q])?.scale(1.0 / batch);
            value += m.frobenius_sq();
            let k = 2.0 / (batch * n_pairs);
            grads[p].add_assign(&reps[q].matmul_t(&m)?.scale(k))?;
            grads[q].add_assign(&reps[p].matmul(&m)?.scale(k))?;
        }
    }
    Ok((value / n_pairs, grads))
}
