use serde::{Deserialize, Serialize};

/// Ideal (accuracy, fairness) corner, in percent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Utopia {
    pub accuracy: f64,
    pub fairness: f64,
}

impl Default for Utopia {
    fn default() -> Self {
        Utopia {
            accuracy: 100.0,
            fairness: 100.0,
        }
    }
}

impl Utopia {
    /// Best observed accuracy × best observed fairness among `points`.
    pub fn from_points(points: impl IntoIterator<Item = (f64, f64)>) -> Option<Self> {
        points.into_iter().fold(None, |acc, (a, f)| {
            Some(match acc {
                None => Utopia {
                    accuracy: a,
                    fairness: f,
                },
                Some(u) => Utopia {
                    accuracy: u.accuracy.max(a),
                    fairness: u.fairness.max(f),
                },
            })
        })
    }
}

/// Euclidean distance from `(accuracy, fairness)` to the Utopia point.
pub fn dto(accuracy: f64, fairness: f64, utopia: Utopia) -> f64 {
    (utopia.accuracy - accuracy).hypot(utopia.fairness - fairness)
}
