use super::Matrix;

/// Backward half of a gradient reversal layer: `−λ · upstream`.
pub fn grad_reverse(upstream: &Matrix, lambda: f64) -> Matrix {
    debug_assert!(lambda >= 0.0, "reversal strength must be nonnegative");
    upstream.map(|g| -lambda * g)
}

/// Identity on the way forward, `−λ`-scaled gradient on the way back.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientReversal {
    pub lambda: f64,
}

impl GradientReversal {
    pub fn new(lambda: f64) -> Self {
        GradientReversal { lambda }
    }

    pub fn forward(&self, h: &Matrix) -> Matrix {
        h.clone()
    }

    pub fn backward(&self, upstream: &Matrix) -> Matrix {
        grad_reverse(upstream, self.lambda)
    }
}
