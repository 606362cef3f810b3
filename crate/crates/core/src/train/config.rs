use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{AdversaryConfig, MainModelConfig, Variant};
use crate::nn::Activation;

/// Everything that determines one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub variant: Variant,
    pub lambda: f64,
    pub epochs: usize,
    /// Early-stopping patience in epochs.
    pub patience: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub disc_lr: f64,
    pub lr_patience: usize,
    pub lr_factor: f64,
    pub hidden: usize,
    pub n_hidden: usize,
    pub dropout: f64,
    pub activation: Activation,
    /// Reweight discriminator instances so groups balance within each class.
    pub balanced: bool,
    /// Train the discriminator only on instances with known protected labels
    /// while the main task uses everything.
    pub decoupled: bool,
    pub seed: u64,
    pub n_sub: usize,
    pub ortho_weight: f64,
    /// Discriminator updates per main update.
    pub disc_steps: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            variant: Variant::Standard,
            lambda: 0.0,
            epochs: 100,
            patience: 10,
            batch_size: 1024,
            lr: 3e-3,
            disc_lr: 3e-3,
            lr_patience: 2,
            lr_factor: 0.5,
            hidden: 300,
            n_hidden: 2,
            dropout: 0.5,
            activation: Activation::Tanh,
            balanced: false,
            decoupled: false,
            seed: 0,
            n_sub: 3,
            ortho_weight: 1.0,
            disc_steps: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!(
                "lambda must be a finite value >= 0, got {}",
                self.lambda
            ));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be >= 1".into());
        }
        if !(self.lr > 0.0) || !(self.disc_lr > 0.0) {
            return bad("learning rates must be > 0".into());
        }
        if !(self.lr_factor > 0.0 && self.lr_factor < 1.0) {
            return bad(format!(
                "lr_factor must lie in (0, 1), got {}",
                self.lr_factor
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if self.hidden == 0 || self.n_hidden == 0 {
            return bad("hidden and n_hidden must be >= 1".into());
        }
        if self.variant.is_diverse() && self.n_sub < 2 {
            return bad(format!("{} needs n_sub >= 2", self.variant));
        }
        if !(self.ortho_weight >= 0.0) {
            return bad("ortho_weight must be >= 0".into());
        }
        if self.variant.is_adversarial() && self.disc_steps == 0 {
            return bad("disc_steps must be >= 1 for adversarial variants".into());
        }
        Ok(())
    }

    pub fn main_model_config(&self, input_dim: usize, n_classes: usize) -> MainModelConfig {
        MainModelConfig {
            input_dim,
            n_classes,
            hidden: self.hidden,
            n_hidden: self.n_hidden,
            dropout: self.dropout,
            activation: self.activation,
        }
    }

    /// `None` for the standard (non-adversarial) model.
    pub fn adversary_config(&self, n_groups: usize, n_classes: usize) -> Option<AdversaryConfig> {
        self.variant.is_adversarial().then(|| AdversaryConfig {
            activation: self.activation,
            n_sub: self.n_sub,
            ortho_weight: self.ortho_weight,
            ..AdversaryConfig::new(self.variant, self.hidden, n_groups, n_classes)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = TrainConfig::default();
        c.validate().unwrap();
        assert_eq!((c.epochs, c.patience, c.batch_size), (100, 10, 1024));
        assert!(c.adversary_config(2, 2).is_none());
    }

    #[test]
    fn rejects_bad_values() {
        for c in [
            TrainConfig {
                lambda: -1.0,
                ..Default::default()
            },
            TrainConfig {
                epochs: 0,
                ..Default::default()
            },
            TrainConfig {
                batch_size: 0,
                ..Default::default()
            },
            TrainConfig {
                dropout: 1.0,
                ..Default::default()
            },
            TrainConfig {
                lambda: f64::NAN,
                ..Default::default()
            },
            TrainConfig {
                variant: Variant::DAdv,
                n_sub: 1,
                ..Default::default()
            },
        ] {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
