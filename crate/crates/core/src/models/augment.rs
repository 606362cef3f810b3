use crate::error::{Error, Result};
use crate::nn::{Activation, ForwardTrace, Matrix, MlpGrads, MlpParams, MlpSpec, Tensors};
use crate::rng::SeededRng;

/// One-hot encoding of `labels` with `n` columns.
pub fn one_hot(labels: &[usize], n: usize) -> Result<Matrix> {
    let mut m = Matrix::zeros(labels.len(), n);
    for (i, &l) in labels.iter().enumerate() {
        if l >= n {
            return Err(Error::InvalidArgument(format!(
                "label {l} out of range for {n}"
            )));
        }
        m.set(i, l, 1.0);
    }
    Ok(m)
}

/// Inverse of [`one_hot`]; rejects any row that is not exactly one-hot.
pub fn decode_one_hot(m: &Matrix) -> Result<Vec<usize>> {
    (0..m.rows())
        .map(|r| {
            let row = m.row(r);
            let ones: Vec<usize> = (0..row.len()).filter(|&j| row[j] == 1.0).collect();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones.len() == 1 && zeros + 1 == row.len() {
                Ok(ones[0])
            } else {
                Err(Error::InvalidArgument(format!(
                    "row {r} is not one-hot: {row:?}"
                )))
            }
        })
        .collect()
}

/// Shared projector plus one private projector per target class:
/// `h^a_i = m^s(h_i) + m'_{y_i}(h_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentationLayer {
    pub shared: MlpParams,
    pub private: Vec<MlpParams>,
}

#[derive(Clone, Debug)]
pub struct AugmentTrace {
    rows: usize,
    shared: ForwardTrace,
    /// (class, rows of that class, private projector trace on those rows)
    routed: Vec<(usize, Vec<usize>, ForwardTrace)>,
}

/// Gradients of every projector. Projectors whose class is absent from the
/// batch get exact zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentGrads {
    pub shared: MlpGrads,
    pub private: Vec<MlpGrads>,
}

impl Tensors for AugmentationLayer {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.shared.tensors();
        for p in &self.private {
            t.extend(p.tensors());
        }
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.shared.tensors_mut();
        for p in &mut self.private {
            t.extend(p.tensors_mut());
        }
        t
    }
}

impl Tensors for AugmentGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.shared.tensors();
        for p in &self.private {
            t.extend(p.tensors());
        }
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.shared.tensors_mut();
        for p in &mut self.private {
            t.extend(p.tensors_mut());
        }
        t
    }
}

/// Single affine map plus activation, `hidden → hidden`.
pub fn projector_spec(hidden: usize, activation: Activation) -> MlpSpec {
    MlpSpec::new(hidden, &[], hidden)
        .with_activation(activation)
        .with_output_activation(activation)
}

impl AugmentationLayer {
    pub fn new(
        hidden: usize,
        n_classes: usize,
        activation: Activation,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if n_classes == 0 {
            return Err(Error::InvalidSpec(
                "augmentation layer needs >= 1 class".into(),
            ));
        }
        let spec = projector_spec(hidden, activation);
        let shared = MlpParams::init_with(&spec, rng)?;
        let private = (0..n_classes)
            .map(|_| MlpParams::init_with(&spec, rng))
            .collect::<Result<_>>()?;
        Ok(AugmentationLayer { shared, private })
    }

    /// All projectors must share one architecture.
    pub fn from_projectors(shared: MlpParams, private: Vec<MlpParams>) -> Result<Self> {
        if private.is_empty() {
            return Err(Error::InvalidSpec(
                "augmentation layer needs >= 1 class".into(),
            ));
        }
        if shared.input_dim() != shared.output_dim() {
            return Err(Error::InvalidSpec(
                "projectors must map hidden -> hidden".into(),
            ));
        }
        if let Some(k) = private.iter().position(|p| p.spec != shared.spec) {
            return Err(Error::InvalidSpec(format!(
                "private projector {k} differs in architecture from the shared projector"
            )));
        }
        Ok(AugmentationLayer { shared, private })
    }

    pub fn n_classes(&self) -> usize {
        self.private.len()
    }

    pub fn dim(&self) -> usize {
        self.shared.input_dim()
    }

    /// `augment(h, onehot(y))`.
    pub fn augment(&self, h: &Matrix, y_onehot: &Matrix) -> Result<Matrix> {
        if y_onehot.cols() != self.n_classes() || y_onehot.rows() != h.rows() {
            return Err(Error::shape(
                "augment",
                format!("{}x{} one-hot", h.rows(), self.n_classes()),
                format!("{}x{}", y_onehot.rows(), y_onehot.cols()),
            ));
        }
        let classes = decode_one_hot(y_onehot)?;
        Ok(self.forward(h, &classes)?.0)
    }

    pub fn forward(&self, h: &Matrix, classes: &[usize]) -> Result<(Matrix, AugmentTrace)> {
        if classes.len() != h.rows() {
            return Err(Error::shape("augment", h.rows(), classes.len()));
        }
        if let Some(&bad) = classes.iter().find(|&&c| c >= self.n_classes()) {
            return Err(Error::InvalidArgument(format!(
                "class {bad} out of range for {} projectors",
                self.n_classes()
            )));
        }
        let (mut out, shared) = self.shared.forward(h, None)?;
        let mut routed = Vec::new();
        for (c, proj) in self.private.iter().enumerate() {
            let rows: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == c).collect();
            if rows.is_empty() {
                continue;
            }
            let (private_out, trace) = proj.forward(&h.select_rows(&rows), None)?;
            out.scatter_add_rows(&rows, &private_out)?;
            routed.push((c, rows, trace));
        }
        Ok((
            out,
            AugmentTrace {
                rows: h.rows(),
                shared,
                routed,
            },
        ))
    }

    /// Returns projector gradients and `∂/∂h`.
    pub fn backward(&self, trace: &AugmentTrace, dout: &Matrix) -> Result<(AugmentGrads, Matrix)> {
        if dout.rows() != trace.rows {
            return Err(Error::shape("augment backward", trace.rows, dout.rows()));
        }
        let (shared, mut dh) = self.shared.backward(&trace.shared, dout)?;
        let mut private: Vec<MlpGrads> = self.private.iter().map(MlpGrads::zeros_like).collect();
        for (c, rows, t) in &trace.routed {
            let (g, dh_rows) = self.private[*c].backward(t, &dout.select_rows(rows))?;
            private[*c] = g;
            dh.scatter_add_rows(rows, &dh_rows)?;
        }
        Ok((AugmentGrads { shared, private }, dh))
    }
}
