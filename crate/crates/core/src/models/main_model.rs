use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{argmax_rows, Activation, Matrix, MlpGrads, MlpParams, MlpSpec, Tensors};
use crate::rng::{seeded, SeededRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainModelConfig {
    pub input_dim: usize,
    pub n_classes: usize,
    pub hidden: usize,
    pub n_hidden: usize,
    pub dropout: f64,
    pub activation: Activation,
}

impl MainModelConfig {
    /// 300-wide, two hidden layers, tanh, no dropout.
    pub fn new(input_dim: usize, n_classes: usize) -> Self {
        MainModelConfig {
            input_dim,
            n_classes,
            hidden: 300,
            n_hidden: 2,
            dropout: 0.0,
            activation: Activation::Tanh,
        }
    }

    pub fn encoder_spec(&self) -> MlpSpec {
        MlpSpec::new(
            self.input_dim,
            &vec![self.hidden; self.n_hidden.saturating_sub(1)],
            self.hidden,
        )
        .with_activation(self.activation)
        .with_output_activation(self.activation)
    }

    pub fn classifier_spec(&self) -> MlpSpec {
        MlpSpec::new(self.hidden, &[], self.n_classes).with_dropout(self.dropout)
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.n_classes == 0 || self.hidden == 0 || self.n_hidden == 0 {
            return Err(Error::InvalidSpec(format!(
                "main model dims must be >= 1: input {}, classes {}, hidden {}, layers {}",
                self.input_dim, self.n_classes, self.hidden, self.n_hidden
            )));
        }
        Ok(())
    }
}

/// Encoder `h = m(x)` followed by a single-layer classifier `ŷ = f(h)`.
/// Dropout, if any, sits on `h` inside the classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct MainModel {
    pub encoder: MlpParams,
    pub classifier: MlpParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MainGrads {
    pub encoder: MlpGrads,
    pub classifier: MlpGrads,
}

impl MainModel {
    pub fn build(cfg: &MainModelConfig, seed: u64) -> Result<Self> {
        Self::build_with(cfg, &mut seeded(seed))
    }

    pub fn build_with(cfg: &MainModelConfig, rng: &mut SeededRng) -> Result<Self> {
        cfg.validate()?;
        let encoder = MlpParams::init_with(&cfg.encoder_spec(), rng)?;
        let classifier = MlpParams::init_with(&cfg.classifier_spec(), rng)?;
        Ok(MainModel {
            encoder,
            classifier,
        })
    }

    pub fn from_parts(encoder: MlpParams, classifier: MlpParams) -> Result<Self> {
        if encoder.output_dim() != classifier.input_dim() {
            return Err(Error::shape(
                "MainModel::from_parts",
                encoder.output_dim(),
                classifier.input_dim(),
            ));
        }
        Ok(MainModel {
            encoder,
            classifier,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn n_classes(&self) -> usize {
        self.classifier.output_dim()
    }

    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        self.encoder.predict(x)
    }

    pub fn logits(&self, x: &Matrix) -> Result<Matrix> {
        self.classifier.predict(&self.encode(x)?)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.logits(x)?))
    }
}

impl Tensors for MainModel {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.classifier.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.classifier.tensors_mut());
        t
    }
}

impl Tensors for MainGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.classifier.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.classifier.tensors_mut());
        t
    }
}
