use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Reduce-on-plateau learning-rate schedule.
///
/// Every non-improving call bumps the stall counter; once it reaches
/// `patience` the rate is multiplied by `factor` and the counter resets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauSchedule {
    pub lr: f64,
    pub best: Option<f64>,
    pub stalled: usize,
    pub factor: f64,
    pub patience: usize,
    pub direction: Direction,
}

impl PlateauSchedule {
    pub fn new(lr: f64, factor: f64, patience: usize, direction: Direction) -> Result<Self> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "plateau factor must lie in (0, 1), got {factor}"
            )));
        }
        if !(lr > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be > 0, got {lr}"
            )));
        }
        Ok(PlateauSchedule {
            lr,
            best: None,
            stalled: 0,
            factor,
            patience,
            direction,
        })
    }

    fn improves(&self, metric: f64) -> bool {
        match (self.best, self.direction) {
            (None, _) => true,
            (Some(b), Direction::Minimize) => metric < b,
            (Some(b), Direction::Maximize) => metric > b,
        }
    }

    /// Records one epoch's metric; returns `true` if the rate was reduced.
    pub fn observe(&mut self, metric: f64) -> bool {
        if self.improves(metric) {
            self.best = Some(metric);
            self.stalled = 0;
            return false;
        }
        self.stalled += 1;
        if self.stalled >= self.patience {
            self.lr *= self.factor;
            self.stalled = 0;
            true
        } else {
            false
        }
    }
}
