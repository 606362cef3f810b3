use serde::{Deserialize, Serialize};

use super::augment::{decode_one_hot, one_hot, AugmentGrads, AugmentTrace, AugmentationLayer};
use super::orthogonal::orthogonality_penalty_grad;
use super::Variant;
use crate::error::{Error, Result};
use crate::nn::{softmax_xent, Activation, Matrix, MlpGrads, MlpParams, MlpSpec, Tensors};
use crate::rng::{seeded, SeededRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    pub variant: Variant,
    pub hidden: usize,
    pub n_protected: usize,
    pub n_classes: usize,
    pub activation: Activation,
    /// Hidden width of every layer of the Adv+Large discriminator.
    pub large_width: usize,
    /// Hidden layer count of the Adv+Large discriminator.
    pub large_depth: usize,
    /// Sub-discriminator count for DAdv / A-DAdv.
    pub n_sub: usize,
    /// Weight of the orthogonality penalty in the adversary objective.
    pub ortho_weight: f64,
}

impl AdversaryConfig {
    pub fn new(variant: Variant, hidden: usize, n_protected: usize, n_classes: usize) -> Self {
        AdversaryConfig {
            variant,
            hidden,
            n_protected,
            n_classes,
            activation: Activation::Tanh,
            large_width: 512,
            large_depth: 3,
            n_sub: 3,
            ortho_weight: 1.0,
        }
    }

    pub fn discriminator_spec(&self) -> MlpSpec {
        let h = self.hidden;
        let spec = match self.variant {
            Variant::AdvLarge => MlpSpec::new(
                h,
                &vec![self.large_width; self.large_depth],
                self.n_protected,
            ),
            Variant::AdvY => MlpSpec::new(h + self.n_classes, &[h, h], self.n_protected),
            _ => MlpSpec::new(h, &[h, h], self.n_protected),
        };
        spec.with_activation(self.activation)
    }

    pub fn discriminator_count(&self) -> usize {
        match self.variant {
            Variant::AdvSep => self.n_classes,
            Variant::DAdv | Variant::ADAdv => self.n_sub,
            _ => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.variant.is_adversarial() {
            return Err(Error::InvalidArgument(
                "the standard variant has no adversary".into(),
            ));
        }
        if self.hidden == 0 || self.n_protected == 0 || self.n_classes == 0 {
            return Err(Error::InvalidSpec(format!(
                "adversary dims must be >= 1: hidden {}, groups {}, classes {}",
                self.hidden, self.n_protected, self.n_classes
            )));
        }
        if self.variant.is_diverse() && self.n_sub < 2 {
            return Err(Error::InvalidSpec(format!(
                "{} needs >= 2 sub-discriminators, got {}",
                self.variant, self.n_sub
            )));
        }
        if !(self.ortho_weight >= 0.0) {
            return Err(Error::InvalidSpec(
                "orthogonality weight must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Every trainable part on the adversary side (φ*): discriminator(s) plus the
/// augmentation layer for augmented variants.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryStack {
    pub config: AdversaryConfig,
    pub augment: Option<AugmentationLayer>,
    pub discriminators: Vec<MlpParams>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryGrads {
    pub augment: Option<AugmentGrads>,
    pub discriminators: Vec<MlpGrads>,
}

/// Result of one adversary evaluation with gradients.
#[derive(Clone, Debug)]
pub struct AdversaryPass {
    /// Cross-entropy on `g` (mean over sub-discriminators for DAdv).
    pub xent: f64,
    /// Orthogonality penalty, 0 unless requested for a diverse variant.
    pub penalty: f64,
    /// `xent + ortho_weight · penalty`; what the adversary minimizes.
    pub objective: f64,
    pub grads: AdversaryGrads,
    /// `∂ objective / ∂h`.
    pub dh: Matrix,
}

enum InputTrace {
    Plain,
    Concat,
    Augmented(AugmentTrace),
}

fn tensors_of<'a>(
    augment: Option<Vec<&'a [f64]>>,
    discs: impl Iterator<Item = Vec<&'a [f64]>>,
) -> Vec<&'a [f64]> {
    let mut t = augment.unwrap_or_default();
    for d in discs {
        t.extend(d);
    }
    t
}

impl Tensors for AdversaryStack {
    fn tensors(&self) -> Vec<&[f64]> {
        tensors_of(
            self.augment.as_ref().map(|a| a.tensors()),
            self.discriminators.iter().map(|d| d.tensors()),
        )
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = match &mut self.augment {
            Some(a) => a.tensors_mut(),
            None => Vec::new(),
        };
        for d in &mut self.discriminators {
            t.extend(d.tensors_mut());
        }
        t
    }
}

impl Tensors for AdversaryGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        tensors_of(
            self.augment.as_ref().map(|a| a.tensors()),
            self.discriminators.iter().map(|d| d.tensors()),
        )
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = match &mut self.augment {
            Some(a) => a.tensors_mut(),
            None => Vec::new(),
        };
        for d in &mut self.discriminators {
            t.extend(d.tensors_mut());
        }
        t
    }
}

impl AdversaryStack {
    pub fn build(config: &AdversaryConfig, seed: u64) -> Result<Self> {
        Self::build_with(config, &mut seeded(seed))
    }

    pub fn build_with(config: &AdversaryConfig, rng: &mut SeededRng) -> Result<Self> {
        config.validate()?;
        let augment = if config.variant.is_augmented() {
            Some(AugmentationLayer::new(
                config.hidden,
                config.n_classes,
                config.activation,
                rng,
            )?)
        } else {
            None
        };
        let spec = config.discriminator_spec();
        let discriminators = (0..config.discriminator_count())
            .map(|_| MlpParams::init_with(&spec, rng))
            .collect::<Result<_>>()?;
        Ok(AdversaryStack {
            config: config.clone(),
            augment,
            discriminators,
        })
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    fn check_inputs(&self, h: &Matrix, y: Option<&[usize]>) -> Result<()> {
        if h.cols() != self.config.hidden {
            return Err(Error::shape(
                "adversary input",
                format!("{} columns", self.config.hidden),
                h.cols(),
            ));
        }
        match y {
            None if self.variant().needs_target() => Err(Error::MissingLabels(format!(
                "{} requires target labels",
                self.variant()
            ))),
            Some(y) if y.len() != h.rows() => {
                Err(Error::shape("adversary targets", h.rows(), y.len()))
            }
            Some(y) => match y.iter().find(|&&c| c >= self.config.n_classes) {
                Some(c) => Err(Error::InvalidArgument(format!(
                    "target {c} out of range for {} classes",
                    self.config.n_classes
                ))),
                None => Ok(()),
            },
            None => Ok(()),
        }
    }

    fn prepare(&self, h: &Matrix, y: Option<&[usize]>) -> Result<(Matrix, InputTrace)> {
        match self.variant() {
            Variant::AdvY => {
                let y = y.expect("checked by check_inputs");
                Ok((
                    h.hconcat(&one_hot(y, self.config.n_classes)?)?,
                    InputTrace::Concat,
                ))
            }
            Variant::AAdv | Variant::ADAdv => {
                let layer = self
                    .augment
                    .as_ref()
                    .expect("augmented variant has a layer");
                let (z, t) = layer.forward(h, y.expect("checked by check_inputs"))?;
                Ok((z, InputTrace::Augmented(t)))
            }
            _ => Ok((h.clone(), InputTrace::Plain)),
        }
    }

    /// Discriminator logits for `h` (and `y` where the variant reads it).
    /// Returns one matrix per sub-discriminator for diverse variants, a single
    /// row-aligned matrix otherwise (Adv+Sep routes each row to its class's
    /// discriminator).
    pub fn forward(&self, h: &Matrix, y_onehot: Option<&Matrix>) -> Result<Vec<Matrix>> {
        let y = y_onehot.map(decode_one_hot).transpose()?;
        self.check_inputs(h, y.as_deref())?;
        let (z, _) = self.prepare(h, y.as_deref())?;
        if self.variant() == Variant::AdvSep {
            let y = y.expect("checked by check_inputs");
            let mut out = Matrix::zeros(h.rows(), self.config.n_protected);
            for (c, d) in self.discriminators.iter().enumerate() {
                let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
                if !rows.is_empty() {
                    out.scatter_add_rows(&rows, &d.predict(&z.select_rows(&rows))?)?;
                }
            }
            return Ok(vec![out]);
        }
        self.discriminators.iter().map(|d| d.predict(&z)).collect()
    }

    /// Adversary loss on protected labels `g` with gradients for every φ*
    /// parameter and for `h`. `weights` reweight instances (balanced
    /// training); `with_penalty` adds the orthogonality term for diverse
    /// variants.
    pub fn loss_and_grads(
        &self,
        h: &Matrix,
        y: Option<&[usize]>,
        g: &[usize],
        weights: Option<&[f64]>,
        with_penalty: bool,
    ) -> Result<AdversaryPass> {
        self.check_inputs(h, y)?;
        if g.len() != h.rows() {
            return Err(Error::shape(
                "adversary protected labels",
                h.rows(),
                g.len(),
            ));
        }
        let (z, input_trace) = self.prepare(h, y)?;
        let mut dz = Matrix::zeros(z.rows(), z.cols());
        let mut disc_grads = Vec::with_capacity(self.discriminators.len());
        let mut xent = 0.0;
        let mut penalty = 0.0;

        match self.variant() {
            Variant::AdvSep => {
                let y = y.expect("checked by check_inputs");
                let w: Vec<f64> = match weights {
                    Some(w) => w.to_vec(),
                    None => vec![1.0; g.len()],
                };
                let total: f64 = w.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::InvalidArgument("weights sum to zero".into()));
                }
                for (c, d) in self.discriminators.iter().enumerate() {
                    let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
                    let wc: Vec<f64> = rows.iter().map(|&i| w[i]).collect();
                    let share = wc.iter().sum::<f64>() / total;
                    if rows.is_empty() || share == 0.0 {
                        disc_grads.push(MlpGrads::zeros_like(d));
                        continue;
                    }
                    let gc: Vec<usize> = rows.iter().map(|&i| g[i]).collect();
                    let (logits, trace) = d.forward(&z.select_rows(&rows), None)?;
                    let (l, mut dl) = softmax_xent(&logits, &gc, Some(&wc))?;
                    xent += share * l;
                    dl.scale_in_place(share);
                    let (grads, dz_rows) = d.backward(&trace, &dl)?;
                    dz.scatter_add_rows(&rows, &dz_rows)?;
                    disc_grads.push(grads);
                }
            }
            Variant::DAdv | Variant::ADAdv => {
                let n = self.discriminators.len() as f64;
                let mut traces = Vec::with_capacity(self.discriminators.len());
                let mut dlogits = Vec::with_capacity(self.discriminators.len());
                for d in &self.discriminators {
                    let (logits, trace) = d.forward(&z, None)?;
                    let (l, mut dl) = softmax_xent(&logits, g, weights)?;
                    xent += l / n;
                    dl.scale_in_place(1.0 / n);
                    traces.push(trace);
                    dlogits.push(dl);
                }
                let dreps = if with_penalty {
                    let reps: Vec<Matrix> =
                        traces.iter().map(|t| t.last_hidden().clone()).collect();
                    let (p, mut dr) = orthogonality_penalty_grad(&reps)?;
                    penalty = p;
                    dr.iter_mut()
                        .for_each(|m| m.scale_in_place(self.config.ortho_weight));
                    Some(dr)
                } else {
                    None
                };
                for (k, d) in self.discriminators.iter().enumerate() {
                    let dr = dreps.as_ref().map(|dr| &dr[k]);
                    let (grads, dz_k) = d.backward_with_hidden(&traces[k], &dlogits[k], dr)?;
                    dz.add_assign(&dz_k)?;
                    disc_grads.push(grads);
                }
            }
            _ => {
                let d = &self.discriminators[0];
                let (logits, trace) = d.forward(&z, None)?;
                let (l, dl) = softmax_xent(&logits, g, weights)?;
                xent = l;
                let (grads, dz_all) = d.backward(&trace, &dl)?;
                dz = dz_all;
                disc_grads.push(grads);
            }
        }

        let (augment_grads, dh) = match input_trace {
            InputTrace::Plain => (None, dz),
            InputTrace::Concat => (None, dz.column_slice(0, self.config.hidden)),
            InputTrace::Augmented(t) => {
                let layer = self
                    .augment
                    .as_ref()
                    .expect("augmented variant has a layer");
                let (ag, dh) = layer.backward(&t, &dz)?;
                (Some(ag), dh)
            }
        };
        let objective = xent + self.config.ortho_weight * penalty;
        Ok(AdversaryPass {
            xent,
            penalty,
            objective,
            grads: AdversaryGrads {
                augment: augment_grads,
                discriminators: disc_grads,
            },
            dh,
        })
    }
}
