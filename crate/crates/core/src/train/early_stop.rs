use crate::error::{Error, Result};

/// Tracks the best (lowest) dev DTO and the stop condition epoch by epoch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EarlyStopper {
    pub patience: usize,
    /// 1-indexed epoch of the current best.
    pub best_epoch: usize,
    pub best: Option<f64>,
    pub since_best: usize,
    seen: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        EarlyStopper {
            patience,
            ..Default::default()
        }
    }

    /// Records the next epoch's metric; returns `true` if it is a new best.
    pub fn observe(&mut self, metric: f64) -> bool {
        self.seen += 1;
        if self.best.is_none_or(|b| metric < b) {
            self.best = Some(metric);
            self.best_epoch = self.seen;
            self.since_best = 0;
            true
        } else {
            self.since_best += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.patience > 0 && self.since_best >= self.patience
    }
}

/// Outcome of replaying a metric history through the stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EarlyStop {
    /// 1-indexed epoch with the lowest metric, earliest on ties.
    pub best_epoch: usize,
    /// 1-indexed epoch after which training halts, if the rule fires.
    pub stopped_after: Option<usize>,
}

pub fn early_stop_select(dto_history: &[f64], patience: usize) -> Result<EarlyStop> {
    if dto_history.is_empty() {
        return Err(Error::Empty("early stopping over an empty history"));
    }
    let mut s = EarlyStopper::new(patience);
    for (i, &m) in dto_history.iter().enumerate() {
        s.observe(m);
        if s.should_stop() {
            return Ok(EarlyStop {
                best_epoch: s.best_epoch,
                stopped_after: Some(i + 1),
            });
        }
    }
    Ok(EarlyStop {
        best_epoch: s.best_epoch,
        stopped_after: None,
    })
}
