use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{AdversaryStack, MainGrads, MainModel};
use crate::nn::{grad_reverse, softmax_xent, AdamState, Matrix, Tensors};
use crate::rng::{stream, SeededRng, Stream};

use super::config::TrainConfig;

/// Rows fed to the main sub-step.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub g: Vec<Option<usize>>,
}

impl Batch {
    pub fn from_rows(ds: &Dataset, rows: &[usize]) -> Self {
        Batch {
            x: ds.x.select_rows(rows),
            y: rows.iter().map(|&i| ds.y[i]).collect(),
            g: rows.iter().map(|&i| ds.g[i]).collect(),
        }
    }
}

/// Rows fed to the discriminator sub-step; every row has a protected label.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscBatch {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub g: Vec<usize>,
    pub weights: Option<Vec<f64>>,
}

impl DiscBatch {
    /// Rows without a protected label are skipped. `weights` is indexed by
    /// dataset row.
    pub fn from_rows(ds: &Dataset, rows: &[usize], weights: Option<&[f64]>) -> Self {
        let rows: Vec<usize> = rows
            .iter()
            .copied()
            .filter(|&i| ds.g[i].is_some())
            .collect();
        DiscBatch {
            x: ds.x.select_rows(&rows),
            y: rows.iter().map(|&i| ds.y[i]).collect(),
            g: rows.iter().map(|&i| ds.g[i].expect("filtered")).collect(),
            weights: weights.map(|w| rows.iter().map(|&i| w[i]).collect()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

/// Gradients of the main objective `X(y, ŷ) − λ X(g, ĝ)` with the adversary
/// frozen, plus the two branches of the encoder-output gradient.
#[derive(Clone, Debug)]
pub struct MainStepGrads {
    pub grads: MainGrads,
    pub cls_loss: f64,
    /// Adversary cross-entropy on the labeled rows of the batch.
    pub adv_loss: Option<f64>,
    /// `∂X(y, ŷ)/∂h`.
    pub dh_cls: Matrix,
    /// `∂X(g, ĝ)/∂h`, zero on rows without a protected label.
    pub dh_adv: Option<Matrix>,
}

/// Main sub-step gradients. The adversary branch reaches the encoder through
/// gradient reversal with strength `lambda`. Dropout is active iff
/// `dropout_rng` is given.
pub fn main_step_grads(
    model: &MainModel,
    adversary: Option<&AdversaryStack>,
    lambda: f64,
    batch: &Batch,
    dropout_rng: Option<&mut SeededRng>,
) -> Result<MainStepGrads> {
    let (h, enc_trace) = model.encoder.forward(&batch.x, None)?;
    let (logits, cls_trace) = model.classifier.forward(&h, dropout_rng)?;
    let (cls_loss, dlogits) = softmax_xent(&logits, &batch.y, None)?;
    let (cls_grads, dh_cls) = model.classifier.backward(&cls_trace, &dlogits)?;

    let mut dh = dh_cls.clone();
    let mut adv_loss = None;
    let mut dh_adv = None;
    if let Some(adv) = adversary {
        let rows: Vec<usize> = (0..batch.g.len())
            .filter(|&i| batch.g[i].is_some())
            .collect();
        if !rows.is_empty() {
            let g: Vec<usize> = rows
                .iter()
                .map(|&i| batch.g[i].expect("filtered"))
                .collect();
            let y: Vec<usize> = rows.iter().map(|&i| batch.y[i]).collect();
            let pass = adv.loss_and_grads(&h.select_rows(&rows), Some(&y), &g, None, false)?;
            let mut full = Matrix::zeros(h.rows(), h.cols());
            full.scatter_add_rows(&rows, &pass.dh)?;
            dh.add_assign(&grad_reverse(&full, lambda))?;
            adv_loss = Some(pass.xent);
            dh_adv = Some(full);
        }
    }
    let (enc_grads, _) = model.encoder.backward(&enc_trace, &dh)?;
    Ok(MainStepGrads {
        grads: MainGrads {
            encoder: enc_grads,
            classifier: cls_grads,
        },
        cls_loss,
        adv_loss,
        dh_cls,
        dh_adv,
    })
}

/// Losses observed during one [`Trainer::adversarial_step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLosses {
    pub cls_loss: f64,
    pub adv_loss: Option<f64>,
    /// Discriminator objective before its update, if a sub-step ran.
    pub disc_objective: Option<f64>,
}

/// The main model, the adversary and their optimizer states.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub config: TrainConfig,
    pub model: MainModel,
    pub adversary: Option<AdversaryStack>,
    pub main_opt: AdamState,
    pub adv_opt: Option<AdamState>,
    dropout_rng: SeededRng,
}

impl Trainer {
    pub fn new(
        config: &TrainConfig,
        input_dim: usize,
        n_classes: usize,
        n_groups: usize,
    ) -> Result<Self> {
        config.validate()?;
        let model = MainModel::build_with(
            &config.main_model_config(input_dim, n_classes),
            &mut stream(config.seed, Stream::MainInit),
        )?;
        let adversary = config
            .adversary_config(n_groups, n_classes)
            .map(|c| {
                AdversaryStack::build_with(&c, &mut stream(config.seed, Stream::AdversaryInit))
            })
            .transpose()?;
        let main_opt = AdamState::new(&model.tensor_lens(), config.lr);
        let adv_opt = adversary
            .as_ref()
            .map(|a| AdamState::new(&a.tensor_lens(), config.disc_lr));
        Ok(Trainer {
            config: config.clone(),
            model,
            adversary,
            main_opt,
            adv_opt,
            dropout_rng: stream(config.seed, Stream::Dropout),
        })
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.main_opt.lr = lr;
    }

    /// Discriminator objective on `batch` with `h` from the current encoder.
    pub fn discriminator_objective(&self, batch: &DiscBatch) -> Result<f64> {
        let adv = self.adversary.as_ref().ok_or_else(no_adversary)?;
        let h = self.model.encode(&batch.x)?;
        Ok(adv
            .loss_and_grads(&h, Some(&batch.y), &batch.g, batch.weights.as_deref(), true)?
            .objective)
    }

    /// One update of φ* on `batch`, with `h` treated as constant. Returns the
    /// objective before the update.
    pub fn discriminator_step(&mut self, batch: &DiscBatch) -> Result<f64> {
        let adv = self.adversary.as_mut().ok_or_else(no_adversary)?;
        let opt = self.adv_opt.as_mut().expect("adversary has an optimizer");
        let h = self.model.encode(&batch.x)?;
        let pass =
            adv.loss_and_grads(&h, Some(&batch.y), &batch.g, batch.weights.as_deref(), true)?;
        opt.step(&mut adv.tensors_mut(), &pass.grads.tensors())?;
        Ok(pass.objective)
    }

    /// One update of θ^m, θ^f with φ* frozen.
    pub fn main_step(&mut self, batch: &Batch) -> Result<MainStepGrads> {
        let step = main_step_grads(
            &self.model,
            self.adversary.as_ref(),
            self.config.lambda,
            batch,
            Some(&mut self.dropout_rng),
        )?;
        self.main_opt
            .step(&mut self.model.tensors_mut(), &step.grads.tensors())?;
        Ok(step)
    }

    /// Discriminator sub-step(s) on `disc` (if any), then the main sub-step.
    pub fn adversarial_step(
        &mut self,
        batch: &Batch,
        disc: Option<&DiscBatch>,
    ) -> Result<StepLosses> {
        if self.config.variant.needs_target() && batch.y.len() != batch.x.rows() {
            return Err(Error::MissingLabels("batch lacks target labels".into()));
        }
        let mut disc_objective = None;
        if let Some(d) = disc.filter(|d| !d.is_empty() && self.adversary.is_some()) {
            for _ in 0..self.config.disc_steps {
                let obj = self.discriminator_step(d)?;
                disc_objective.get_or_insert(obj);
            }
        }
        let step = self.main_step(batch)?;
        Ok(StepLosses {
            cls_loss: step.cls_loss,
            adv_loss: step.adv_loss,
            disc_objective,
        })
    }
}

fn no_adversary() -> Error {
    Error::InvalidArgument("the standard variant has no adversary".into())
}
