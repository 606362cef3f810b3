use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{evaluate, EvalReport, PredictionSet, Utopia};
use crate::models::MainModel;
use crate::nn::{Direction, PlateauSchedule};
use crate::rng::{stream, Stream};

use super::batches::{balanced_weights, epoch_batches};
use super::checkpoint::{Checkpoint, EpochLog};
use super::config::TrainConfig;
use super::early_stop::EarlyStopper;
use super::step::{Batch, DiscBatch, Trainer};

/// Evaluates `model` on `ds` against the (100, 100) Utopia point.
pub fn evaluate_model(model: &MainModel, ds: &Dataset) -> Result<EvalReport> {
    let preds = PredictionSet::new(
        model.predict(&ds.x)?,
        ds.y.clone(),
        ds.g.clone(),
        ds.n_classes.max(model.n_classes()),
        ds.n_groups,
    )?;
    evaluate(&preds, Utopia::default())
}

/// Per-row discriminator weights under balanced training (0 on rows without
/// a protected label).
fn row_weights(ds: &Dataset) -> Result<Vec<f64>> {
    let rows = ds.labeled_indices();
    let y: Vec<usize> = rows.iter().map(|&i| ds.y[i]).collect();
    let g: Vec<usize> = rows.iter().map(|&i| ds.g[i].expect("labeled")).collect();
    let w = balanced_weights(&y, &g)?;
    let mut out = vec![0.0; ds.len()];
    for (&i, wi) in rows.iter().zip(w) {
        out[i] = wi;
    }
    Ok(out)
}

/// Full training run: returns the best dev-DTO checkpoint and one log entry
/// per completed epoch.
pub fn train(
    config: &TrainConfig,
    train_set: &Dataset,
    dev_set: &Dataset,
) -> Result<(Checkpoint, Vec<EpochLog>)> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if dev_set.is_empty() {
        return Err(Error::Empty("dev set"));
    }
    let adversarial = config.variant.is_adversarial();
    if adversarial && train_set.labeled_count() == 0 {
        return Err(Error::MissingLabels(format!(
            "{} needs protected labels on at least one training instance",
            config.variant
        )));
    }
    // Without decoupling, instances lacking a protected label are dropped.
    let owned;
    let data = if adversarial && !config.decoupled && train_set.labeled_count() < train_set.len() {
        owned = train_set.subset(&train_set.labeled_indices());
        &owned
    } else {
        train_set
    };
    let weights = if adversarial && config.balanced {
        Some(row_weights(data)?)
    } else {
        None
    };

    let mut trainer = Trainer::new(config, data.dim(), data.n_classes, data.n_groups)?;
    let mut shuffle_rng = stream(config.seed, Stream::Shuffle);
    let mut disc_rng = stream(config.seed, Stream::DiscShuffle);
    let mut schedule = PlateauSchedule::new(
        config.lr,
        config.lr_factor,
        config.lr_patience,
        Direction::Minimize,
    )?;
    let mut stopper = EarlyStopper::new(config.patience);
    let mut best: Option<Checkpoint> = None;
    let mut history = Vec::new();

    for epoch in 1..=config.epochs {
        let (main_batches, disc_batches) =
            epoch_batches(data, config.batch_size, &mut shuffle_rng, &mut disc_rng);
        let (mut cls_sum, mut adv_sum, mut adv_n) = (0.0, 0.0, 0usize);
        for (k, rows) in main_batches.iter().enumerate() {
            let batch = Batch::from_rows(data, rows);
            let disc = adversarial.then(|| {
                let disc_rows = if config.decoupled {
                    disc_batches
                        .get(k % disc_batches.len().max(1))
                        .map_or(&[][..], Vec::as_slice)
                } else {
                    rows.as_slice()
                };
                DiscBatch::from_rows(data, disc_rows, weights.as_deref())
            });
            let losses = trainer.adversarial_step(&batch, disc.as_ref())?;
            cls_sum += losses.cls_loss;
            if let Some(a) = losses.adv_loss {
                adv_sum += a;
                adv_n += 1;
            }
        }
        let dev = evaluate_model(&trainer.model, dev_set)?;
        history.push(EpochLog {
            epoch,
            train_loss: cls_sum / main_batches.len() as f64,
            adv_loss: (adv_n > 0).then(|| adv_sum / adv_n as f64),
            dev_accuracy: dev.accuracy,
            dev_fairness: dev.fairness,
            dev_dto: dev.dto,
            lr: trainer.main_opt.lr,
        });
        schedule.observe(dev.dto);
        trainer.set_lr(schedule.lr);
        if stopper.observe(dev.dto) {
            best = Some(Checkpoint {
                model: trainer.model.clone(),
                epoch,
                dev,
            });
        }
        if stopper.should_stop() {
            break;
        }
    }
    let best = best.ok_or_else(|| Error::Internal("no epoch completed".into()))?;
    Ok((best, history))
}
