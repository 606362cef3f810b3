use super::pareto::CandidatePoint;
use crate::error::{Error, Result};

/// Outcome of constrained model selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub dev: CandidatePoint,
    pub test: CandidatePoint,
    pub floor: f64,
    /// No candidate met the floor; the most accurate dev point was returned.
    pub fallback: bool,
}

/// Picks the fairest dev candidate whose accuracy is at least
/// `(1 − slack) · reference_accuracy` and reports its aligned test twin.
/// Fairness ties go to higher dev accuracy, then to the earlier candidate.
pub fn constrained_select(
    dev: &[CandidatePoint],
    test: &[CandidatePoint],
    reference_accuracy: f64,
    slack: f64,
) -> Result<Selection> {
    if dev.is_empty() {
        return Err(Error::Empty("no candidates to select from"));
    }
    if dev.len() != test.len() {
        return Err(Error::shape(
            "constrained_select",
            format!("{} test points", dev.len()),
            format!("{}", test.len()),
        ));
    }
    if !(0.0..=1.0).contains(&slack) {
        return Err(Error::InvalidArgument(format!(
            "slack {slack} outside [0, 1]"
        )));
    }
    let floor = (1.0 - slack) * reference_accuracy;
    let better = |a: &CandidatePoint, b: &CandidatePoint| {
        a.fairness > b.fairness || (a.fairness == b.fairness && a.accuracy > b.accuracy)
    };
    let mut best: Option<usize> = None;
    for (i, c) in dev.iter().enumerate() {
        if c.accuracy >= floor && best.is_none_or(|b| better(c, &dev[b])) {
            best = Some(i);
        }
    }
    let (index, fallback) = match best {
        Some(i) => (i, false),
        None => {
            let mut i_best = 0;
            for (i, c) in dev.iter().enumerate() {
                if c.accuracy > dev[i_best].accuracy {
                    i_best = i;
                }
            }
            (i_best, true)
        }
    };
    Ok(Selection {
        index,
        dev: dev[index].clone(),
        test: test[index].clone(),
        floor,
        fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Provenance;

    fn pt(a: f64, f: f64) -> CandidatePoint {
        CandidatePoint::new(
            a,
            f,
            Provenance {
                variant: "adv".into(),
                lambda: 0.1,
                seed: 1,
                epoch: 3,
            },
        )
    }

    #[test]
    fn picks_fairest_above_floor() {
        let dev = [pt(78.0, 90.0), pt(77.0, 95.0), pt(74.0, 99.0)];
        let test = [pt(77.5, 89.0), pt(76.0, 94.0), pt(73.0, 98.0)];
        let s = constrained_select(&dev, &test, 80.0, 0.05).unwrap();
        assert!((s.floor - 76.0).abs() < 1e-12);
        assert_eq!(s.index, 1);
        assert_eq!(s.test, test[1]);
        assert!(!s.fallback);
    }

    #[test]
    fn vacuous_slack_is_globally_fairest() {
        let dev = [pt(78.0, 90.0), pt(77.0, 95.0), pt(74.0, 99.0)];
        assert_eq!(constrained_select(&dev, &dev, 80.0, 1.0).unwrap().index, 2);
    }

    #[test]
    fn fallback_to_most_accurate() {
        let dev = [pt(60.0, 99.0), pt(65.0, 90.0)];
        let s = constrained_select(&dev, &dev, 72.0, 0.01).unwrap();
        assert!(s.fallback);
        assert_eq!(s.index, 1);
        assert!(constrained_select(&[], &[], 72.0, 0.01).is_err());
        assert!(constrained_select(&dev, &dev[..1], 72.0, 0.01).is_err());
    }
}
